//! Command-line driver: generate -> train -> classify -> evaluate -> sweep-noise -> report.
//!
//! Every subcommand resolves its settings as flags over an optional JSON config
//! file over defaults, and writes the resolved settings to
//! `resolved_config.json` in its output directory. A resolved config can be fed
//! back through `--config` to repeat the run.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric divergence.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classify::pca::{projections_csv, Pca};
use crate::classify::sweep::sweep_csv;
use crate::classify::{classify_all, classify_observed, noise_sweep, results_csv, Report, SoftmaxConfig};
use crate::dataset::{
    build_dataset, load_dataset, read_trajectory_file, save_dataset, write_trajectory_file, NoiseLevel,
    ObservedTrajectory, Split, DEFAULT_FRACTIONS, STANDARD_LEVELS,
};
use crate::error::{Error, Result};
use crate::models::{simulate_trajectory, FleetParams, Perturbation, Scenario, ScenarioKind, UavClass, NUM_CLASSES};
use crate::pirnn::{load_checkpoint, save_checkpoint};
use crate::training::{fit_dataset, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

const RESOLVED_CONFIG: &str = "resolved_config.json";

#[derive(Debug, Parser)]
#[command(name = "pirnn-uav", version, about = "Simulate UAV fleets, train the residual network, classify trajectories")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only log warnings and errors
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a labeled dataset, or a single trajectory with --trajectory-out
    Generate(GenerateArgs),
    /// Train the network on a generated dataset
    Train(TrainArgs),
    /// Classify one trajectory
    Classify(ClassifyArgs),
    /// Score a checkpoint on a dataset split
    Evaluate(EvaluateArgs),
    /// Score a checkpoint under increasing measurement noise
    SweepNoise(SweepArgs),
    /// Rebuild the metrics report from a per-trajectory results CSV
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_per_class: Option<usize>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory holding quadcopter/fixed_wing/helicopter .params files
    #[arg(long)]
    params_dir: Option<PathBuf>,
    /// Train,val,test fractions
    #[arg(long, value_parser = triple)]
    fractions: Option<[f64; 3]>,
    #[arg(long)]
    split_seed: Option<u64>,
    /// Single-trajectory mode: vehicle class
    #[arg(long)]
    class: Option<UavClass>,
    /// Single-trajectory mode: maneuver
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    /// Single-trajectory mode: output file
    #[arg(long)]
    trajectory_out: Option<PathBuf>,
    /// Single-trajectory mode: omit the class label from the file
    #[arg(long)]
    unlabeled: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    early_stop_delta: Option<f64>,
    #[arg(long)]
    lambda_data: Option<f64>,
    #[arg(long)]
    lambda_phys: Option<f64>,
    #[arg(long)]
    batch_train: Option<usize>,
    #[arg(long)]
    batch_eval: Option<usize>,
    /// Phase learning rates
    #[arg(long, value_parser = triple)]
    lr: Option<[f64; 3]>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    hidden_width: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Trajectory file written by `generate --trajectory-out`
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Dataset directory, with --index
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    index: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// train, val or test
    #[arg(long)]
    split: Option<Split>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    pca_components: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise levels as state%:deriv% pairs, e.g. 3:5,5:10
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<String>>,
    #[arg(long)]
    split: Option<Split>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// results.csv written by `evaluate`
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateConfig {
    pub out: Option<PathBuf>,
    pub n_per_class: usize,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub params_dir: Option<PathBuf>,
    pub fractions: (f64, f64, f64),
    pub split_seed: Option<u64>,
    pub class: Option<UavClass>,
    pub scenario: Option<ScenarioKind>,
    pub trajectory_out: Option<PathBuf>,
    pub unlabeled: bool,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            out: None,
            n_per_class: 100,
            duration: 10.0,
            dt: 0.01,
            seed: 0,
            params_dir: None,
            fractions: DEFAULT_FRACTIONS,
            split_seed: None,
            class: None,
            scenario: None,
            trajectory_out: None,
            unlabeled: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainRunConfig {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    pub checkpoint: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub index: Option<usize>,
    pub softmax: SoftmaxConfig,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateConfig {
    pub checkpoint: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub split: Split,
    pub softmax: SoftmaxConfig,
    pub pca_components: usize,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            checkpoint: None,
            dataset: None,
            out: None,
            split: Split::Test,
            softmax: SoftmaxConfig::default(),
            pca_components: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub checkpoint: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub levels: Vec<NoiseLevel>,
    pub split: Split,
    pub softmax: SoftmaxConfig,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let mut levels = vec![NoiseLevel::new(0.0, 0.0)];
        levels.extend(STANDARD_LEVELS);
        Self {
            checkpoint: None,
            dataset: None,
            out: None,
            levels,
            split: Split::Test,
            softmax: SoftmaxConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// What a failed command reports: an exit code and a message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::TrainingDiverged { .. }
        | Error::IntegrationDiverged { .. }
        | Error::NonFinite(_)
        | Error::GimbalSingularity { .. } => EXIT_DIVERGED,
        _ => EXIT_DATA,
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `argv` (including the program name), runs the subcommand and returns
/// the process exit code.
fn triple(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 3 comma-separated numbers, got {}", v.len()))
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .try_init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            warn!("thread pool already initialized: {e}");
        }
    }
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Classify(a) => classify(a),
        Command::Evaluate(a) => evaluate(a),
        Command::SweepNoise(a) => sweep(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<C> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", p.display())))
        }
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    value.as_deref().ok_or_else(|| usage(format!("--{flag} is required")))
}

fn existing_dir<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    let p = required(value, flag)?;
    if !p.is_dir() {
        return Err(usage(format!("--{flag} {} is not a directory", p.display())));
    }
    Ok(p)
}

fn existing_file<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    let p = required(value, flag)?;
    if !p.is_file() {
        return Err(usage(format!("--{flag} {} is not a file", p.display())));
    }
    Ok(p)
}

/// Creates the output directory, refusing to write inside any input.
fn prepare_out(out: &Path, inputs: &[&Path]) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| usage(format!("cannot create {}: {e}", out.display())))?;
    let out_c = out.canonicalize().map_err(|e| usage(e.to_string()))?;
    for input in inputs {
        if let Ok(in_c) = input.canonicalize() {
            if out_c == in_c || (in_c.is_dir() && out_c.starts_with(&in_c)) {
                return Err(usage(format!(
                    "output {} would write into input {}",
                    out.display(),
                    input.display()
                )));
            }
        }
    }
    Ok(())
}

fn persist<C: Serialize>(command: &str, cfg: &C, out: &Path) -> CliResult<()> {
    info!("{command}: resolved config in {}", out.join(RESOLVED_CONFIG).display());
    fs::write(out.join(RESOLVED_CONFIG), serde_json::to_string_pretty(cfg).map_err(Error::from)?)
        .map_err(Error::from)?;
    Ok(())
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::from(Error::from(e)))
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let mut cfg: GenerateConfig = load_config(a.config.as_deref())?;
    set_opt(&mut cfg.out, a.out);
    set(&mut cfg.n_per_class, a.n_per_class);
    set(&mut cfg.duration, a.duration);
    set(&mut cfg.dt, a.dt);
    set(&mut cfg.seed, a.seed);
    set_opt(&mut cfg.params_dir, a.params_dir);
    if let Some([a, b, c]) = a.fractions {
        cfg.fractions = (a, b, c);
    }
    set_opt(&mut cfg.split_seed, a.split_seed);
    set_opt(&mut cfg.class, a.class);
    set_opt(&mut cfg.scenario, a.scenario);
    set_opt(&mut cfg.trajectory_out, a.trajectory_out);
    cfg.unlabeled |= a.unlabeled;

    let params = match &cfg.params_dir {
        Some(dir) => {
            existing_dir(&cfg.params_dir, "params-dir")?;
            FleetParams::load_dir(dir)?
        }
        None => FleetParams::default(),
    };
    println!("seed: {}", cfg.seed);

    if let Some(path) = cfg.trajectory_out.clone() {
        let class = cfg
            .class
            .ok_or_else(|| usage("--class is required with --trajectory-out"))?;
        let kind = cfg
            .scenario
            .unwrap_or(ScenarioKind::for_class(class)[0]);
        if !kind.valid_for(class) {
            return Err(usage(format!("scenario {} does not apply to {}", kind.name(), class.name())));
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| usage(format!("cannot create {}: {e}", parent.display())))?;
        }
        let traj = simulate_trajectory(
            class,
            &params,
            &Scenario::sampled(kind, cfg.seed),
            cfg.duration,
            cfg.dt,
            Perturbation::default(),
        )?;
        let mut obs = ObservedTrajectory::from(&traj);
        if cfg.unlabeled {
            obs.label = None;
        }
        write_trajectory_file(&path, &obs)?;
        let config_path = path.with_extension("config.json");
        write(&config_path, &serde_json::to_string_pretty(&cfg).map_err(Error::from)?)?;
        info!("wrote {} ({} samples)", path.display(), traj.len());
        return Ok(());
    }

    let out = required(&cfg.out, "out")?.to_path_buf();
    let inputs: Vec<&Path> = cfg.params_dir.iter().map(PathBuf::as_path).collect();
    prepare_out(&out, &inputs)?;
    info!(
        "simulating {} trajectories per class, {} s at dt {}",
        cfg.n_per_class, cfg.duration, cfg.dt
    );
    let mut ds = build_dataset(cfg.n_per_class, cfg.duration, cfg.dt, cfg.seed, &params)?;
    ds.partition(cfg.fractions, cfg.split_seed.unwrap_or(cfg.seed))?;
    save_dataset(&ds, &out)?;
    persist("generate", &cfg, &out)?;
    println!(
        "wrote {} trajectories ({} samples) to {}",
        ds.trajectories.len(),
        ds.total_samples(),
        out.display()
    );
    Ok(())
}

fn train(a: TrainArgs) -> CliResult<()> {
    let mut cfg: TrainRunConfig = load_config(a.config.as_deref())?;
    set_opt(&mut cfg.dataset, a.dataset);
    set_opt(&mut cfg.out, a.out);
    let t = &mut cfg.train;
    set(&mut t.epochs, a.epochs);
    set(&mut t.patience, a.patience);
    set(&mut t.early_stop_delta, a.early_stop_delta);
    set(&mut t.weights.data, a.lambda_data);
    set(&mut t.weights.phys, a.lambda_phys);
    set(&mut t.batch_train, a.batch_train);
    set(&mut t.batch_eval, a.batch_eval);
    set(&mut t.schedule.rates, a.lr);
    set(&mut t.window, a.window);
    set(&mut t.hidden_width, a.hidden_width);
    set(&mut t.seed, a.seed);
    cfg.train.validate()?;

    let dataset = existing_dir(&cfg.dataset, "dataset")?.to_path_buf();
    let out = required(&cfg.out, "out")?.to_path_buf();
    prepare_out(&out, &[&dataset])?;
    println!("seed: {}", cfg.train.seed);

    let ds = load_dataset(&dataset)?;
    if ds.partition.is_none() {
        return Err(Failure::from(Error::invalid("dataset has no train/val/test partition")));
    }
    persist("train", &cfg, &out)?;
    let (model, log) = fit_dataset(&ds, &cfg.train)?;
    save_checkpoint(&model.params, &model.norm, &out.join("model"))?;
    log.write_csv(&out.join("train_log.csv"))?;
    println!(
        "trained {} epochs{}; best epoch {} with validation loss {:.6e}",
        log.len(),
        if log.stopped_early { " (early stop)" } else { "" },
        log.best_epoch,
        log.best_val_loss().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn classify(a: ClassifyArgs) -> CliResult<()> {
    let mut cfg: ClassifyConfig = load_config(a.config.as_deref())?;
    set_opt(&mut cfg.checkpoint, a.checkpoint);
    set_opt(&mut cfg.trajectory, a.trajectory);
    set_opt(&mut cfg.dataset, a.dataset);
    set_opt(&mut cfg.index, a.index);
    set(&mut cfg.softmax.gamma, a.gamma);
    set_opt(&mut cfg.out, a.out);
    cfg.softmax.validate()?;

    let checkpoint = existing_dir(&cfg.checkpoint, "checkpoint")?.to_path_buf();
    let obs = match (&cfg.trajectory, &cfg.dataset) {
        (Some(_), None) => read_trajectory_file(existing_file(&cfg.trajectory, "trajectory")?)?,
        (None, Some(_)) => {
            let dir = existing_dir(&cfg.dataset, "dataset")?;
            let index = cfg.index.ok_or_else(|| usage("--index is required with --dataset"))?;
            let ds = load_dataset(dir)?;
            let traj = ds.trajectories.get(index).ok_or_else(|| {
                usage(format!("index {index} out of range ({} trajectories)", ds.trajectories.len()))
            })?;
            ObservedTrajectory::from(traj)
        }
        _ => return Err(usage("give exactly one of --trajectory or --dataset")),
    };
    if let Some(out) = &cfg.out {
        let mut inputs = vec![checkpoint.as_path()];
        inputs.extend(cfg.trajectory.iter().chain(&cfg.dataset).map(PathBuf::as_path));
        prepare_out(out, &inputs)?;
    }

    let model = load_checkpoint(&checkpoint)?;
    let result = classify_observed(&model, &obs, cfg.softmax)?;
    println!("{}", result.summary_line());
    if let Some(out) = &cfg.out {
        write(&out.join("classification.csv"), &results_csv(std::slice::from_ref(&result)))?;
        persist("classify", &cfg, out)?;
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> CliResult<()> {
    let mut cfg: EvaluateConfig = load_config(a.config.as_deref())?;
    set_opt(&mut cfg.checkpoint, a.checkpoint);
    set_opt(&mut cfg.dataset, a.dataset);
    set_opt(&mut cfg.out, a.out);
    set(&mut cfg.split, a.split);
    set(&mut cfg.softmax.gamma, a.gamma);
    set(&mut cfg.pca_components, a.pca_components);
    cfg.softmax.validate()?;

    let checkpoint = existing_dir(&cfg.checkpoint, "checkpoint")?.to_path_buf();
    let dataset = existing_dir(&cfg.dataset, "dataset")?.to_path_buf();
    let out = required(&cfg.out, "out")?.to_path_buf();
    prepare_out(&out, &[&checkpoint, &dataset])?;

    let model = load_checkpoint(&checkpoint)?;
    let ds = load_dataset(&dataset)?;
    let trajs = ds.split(cfg.split)?;
    let results = classify_all(&model, &trajs, cfg.softmax)?;
    let report = Report::from_results(&results)?;
    print!("{}", report.to_text());

    write(&out.join("results.csv"), &results_csv(&results))?;
    write(&out.join("report.txt"), &report.to_text())?;
    write(&out.join("report.csv"), &report.to_csv())?;
    write(&out.join("confusion.csv"), &report.confusion_csv())?;

    let samples: Vec<_> = trajs.iter().flat_map(|t| t.states.iter().copied()).collect();
    let labels: Vec<&str> = trajs
        .iter()
        .flat_map(|t| std::iter::repeat_n(t.class.name(), t.len()))
        .collect();
    let pca = Pca::fit(&samples, cfg.pca_components)?;
    write(&out.join("pca.csv"), &projections_csv(&labels, &pca.project(&samples)))?;
    info!("PCA explained variance ratios {:?}", pca.explained_variance_ratio);
    persist("evaluate", &cfg, &out)?;
    Ok(())
}

fn parse_level(s: &str) -> CliResult<NoiseLevel> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("noise level {s:?} is not state:deriv")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("bad noise percentage {v:?}")))
    };
    Ok(NoiseLevel::new(parse(a)?, parse(b)?))
}

fn sweep(a: SweepArgs) -> CliResult<()> {
    let mut cfg: SweepConfig = load_config(a.config.as_deref())?;
    set_opt(&mut cfg.checkpoint, a.checkpoint);
    set_opt(&mut cfg.dataset, a.dataset);
    set_opt(&mut cfg.out, a.out);
    if let Some(levels) = a.levels {
        cfg.levels = levels.iter().map(|s| parse_level(s)).collect::<CliResult<_>>()?;
    }
    set(&mut cfg.split, a.split);
    set(&mut cfg.softmax.gamma, a.gamma);
    set(&mut cfg.seed, a.seed);
    cfg.softmax.validate()?;
    if cfg.levels.is_empty() {
        return Err(usage("no noise levels given"));
    }

    let checkpoint = existing_dir(&cfg.checkpoint, "checkpoint")?.to_path_buf();
    let dataset = existing_dir(&cfg.dataset, "dataset")?.to_path_buf();
    let out = required(&cfg.out, "out")?.to_path_buf();
    prepare_out(&out, &[&checkpoint, &dataset])?;
    println!("seed: {}", cfg.seed);

    let model = load_checkpoint(&checkpoint)?;
    let ds = load_dataset(&dataset)?;
    let rows = noise_sweep(&model, &ds.split(cfg.split)?, &cfg.levels, cfg.seed, cfg.softmax)?;
    for r in &rows {
        println!(
            "noise ({:>4}%, {:>4}%)  accuracy {:.4}",
            r.level.state_pct, r.level.deriv_pct, r.report.accuracy
        );
    }
    write(&out.join("noise_sweep.csv"), &sweep_csv(&rows))?;
    persist("sweep-noise", &cfg, &out)?;
    Ok(())
}

/// Rebuilds the confusion matrix from the `true_class` and `predicted` columns
/// of a results CSV.
pub fn report_from_results_csv(text: &str) -> Result<Report> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or(Error::Empty("results file"))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::invalid(format!("results file has no `{name}` column")))
    };
    let (ti, pi) = (col("true_class")?, col("predicted")?);
    let mut confusion = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| {
            fields
                .get(i)
                .copied()
                .ok_or_else(|| Error::shape(header.len(), format!("{} fields on row {}", fields.len(), n + 1)))
        };
        let truth: UavClass = get(ti)?.parse()?;
        let predicted: UavClass = get(pi)?.parse()?;
        confusion[truth.id()][predicted.id()] += 1;
    }
    Report::from_confusion(confusion)
}

fn report(a: ReportArgs) -> CliResult<()> {
    let mut cfg: ReportConfig = load_config(a.config.as_deref())?;
    set_opt(&mut cfg.input, a.input);
    set_opt(&mut cfg.out, a.out);
    let input = existing_file(&cfg.input, "input")?.to_path_buf();
    if let Some(out) = &cfg.out {
        prepare_out(out, &[&input])?;
    }
    let text = fs::read_to_string(&input).map_err(Error::from)?;
    let report = report_from_results_csv(&text).map_err(|e| match e {
        Error::InvalidArgument(m) => Failure {
            code: EXIT_DATA,
            message: m,
        },
        other => Failure::from(other),
    })?;
    print!("{}", report.to_text());
    if let Some(out) = &cfg.out {
        write(&out.join("report.csv"), &report.to_csv())?;
        write(&out.join("confusion.csv"), &report.confusion_csv())?;
        persist("report", &cfg, out)?;
    }
    Ok(())
}
