//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::time::Instant;

use ndarray::{array, Array2};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use pirnn_uav::classify::{classify_all, confidences, noise_sweep, ClassificationResult, Report, SoftmaxConfig};
use pirnn_uav::dataset::{
    build_dataset, dataset_hash, load_dataset, save_dataset, split_dataset, NormStats, Split, DEFAULT_FRACTIONS,
    STANDARD_LEVELS,
};
use pirnn_uav::dynamics::{rk4_step, rotation_matrix, EulerAngles, Vec12};
use pirnn_uav::models::{heli_derivative, quad_derivative, FleetParams, Scenario, ScenarioKind, UavClass};
use pirnn_uav::pirnn::{check_gradients, load_checkpoint, save_checkpoint, Architecture, NetworkParams};
use pirnn_uav::trajectory::Trajectory;
use pirnn_uav::training::{data_loss, fit_dataset, hybrid_loss, physics_loss, LossWeights, TrainConfig};

const SEED: u64 = 7;

/// `(state %, deriv %, report)` per noise level.
type Sweep = Vec<(f64, f64, Report)>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() {
    let mut failed = 0;
    let mut record = |name: &str, o: Outcome| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    };

    let started = Instant::now();
    match desk_scale() {
        Ok((clean, sweep)) => {
            record("1 desk-scale accuracy", criterion_accuracy(&clean));
            record("2 confusion structure", criterion_confusion(&clean));
            record("3 noise robustness", criterion_noise(&clean, &sweep));
        }
        Err(e) => {
            for name in ["1 desk-scale accuracy", "2 confusion structure", "3 noise robustness"] {
                record(name, outcome(false, format!("pipeline error: {e}")));
            }
        }
    }
    eprintln!("desk-scale run took {:.0} s", started.elapsed().as_secs_f64());

    record("4 gradient correctness", criterion_gradients());
    record("5 numerical oracles", criterion_oracles());
    record("6 determinism", criterion_determinism());
    record("7 property suites", criterion_properties());

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

fn desk_scale() -> pirnn_uav::Result<(Report, Sweep)> {
    let mut ds = build_dataset(100, 10.0, 0.01, SEED, &FleetParams::default())?;
    ds.partition(DEFAULT_FRACTIONS, SEED)?;
    let cfg = TrainConfig { seed: SEED, ..Default::default() };
    let (model, log) = fit_dataset(&ds, &cfg)?;
    eprintln!(
        "trained {} epochs, best epoch {} with validation loss {:.5}",
        log.len(),
        log.best_epoch,
        log.best_val_loss().unwrap_or(f64::NAN)
    );
    let test = ds.split(Split::Test)?;
    let softmax = SoftmaxConfig::default();
    let clean = Report::from_results(&classify_all(&model, &test, softmax)?)?;
    let sweep = noise_sweep(&model, &test, &STANDARD_LEVELS, SEED, softmax)?
        .into_iter()
        .map(|row| (row.level.state_pct, row.level.deriv_pct, row.report))
        .collect();
    Ok((clean, sweep))
}

fn criterion_accuracy(clean: &Report) -> Outcome {
    let f1 = clean.metrics(UavClass::FixedWing).f1;
    outcome(
        clean.accuracy >= 0.90 && f1 >= 0.98,
        format!("clean accuracy {:.4} (>= 0.90), fixed-wing F1 {f1:.4} (>= 0.98)", clean.accuracy),
    )
}

fn criterion_confusion(clean: &Report) -> Outcome {
    let (q, f, h) = (UavClass::Quadcopter.id(), UavClass::FixedWing.id(), UavClass::Helicopter.id());
    let fw_confusions: usize = (0..3).filter(|&c| c != f).map(|c| clean.confusion[f][c] + clean.confusion[c][f]).sum();
    let qh = clean.confusion[q][h] + clean.confusion[h][q];
    outcome(
        fw_confusions == 0,
        format!("{qh} quadcopter/helicopter errors, {fw_confusions} involving fixed-wing; matrix {:?}", clean.confusion),
    )
}

fn criterion_noise(clean: &Report, sweep: &[(f64, f64, Report)]) -> Outcome {
    let acc = |s: f64, d: f64| {
        sweep
            .iter()
            .find(|(a, b, _)| *a == s && *b == d)
            .map(|(_, _, r)| r.accuracy)
            .unwrap_or(f64::NAN)
    };
    let (a35, a510, a1015, a1520) = (acc(3.0, 5.0), acc(5.0, 10.0), acc(10.0, 15.0), acc(15.0, 20.0));
    let drop = clean.accuracy - a1520;
    outcome(
        a35 >= a510 && a510 >= a1520 && a1015 >= 0.70 && drop >= 0.10,
        format!(
            "(3,5) {a35:.4} >= (5,10) {a510:.4} >= (15,20) {a1520:.4}; (10,15) {a1015:.4} >= 0.70; drop {drop:.4} >= 0.10"
        ),
    )
}

fn criterion_gradients() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        match check_gradients(16 + 4 * seed as usize, 4, 1e-6, seed) {
            Ok(g) => worst = worst.max(g.max_rel_error()),
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst < 1e-5 && secs < 60.0,
        format!("max relative error {worst:.2e} over 5 seeds in {secs:.1} s"),
    )
}

fn decay(x: &Vec12, _: &()) -> pirnn_uav::Result<Vec12> {
    Ok(x.map(|v| -v))
}

fn criterion_oracles() -> Outcome {
    let err = |steps: usize| -> f64 {
        let dt = 1.0 / steps as f64;
        let mut x = [1.0; 12];
        for _ in 0..steps {
            x = rk4_step(decay, &x, &(), dt).unwrap();
        }
        (x[0] - (-1.0f64).exp()).abs()
    };
    let factor = err(10) / err(20);

    let p = FleetParams::default();
    let rest = [0.0; 12];
    let quad = quad_derivative(&rest, &[p.quad.hover_speed(); 4], &p.quad).unwrap();
    let heli = heli_derivative(&rest, &[p.heli.mass * p.heli.g, 0.0, 0.0, 0.0], &p.heli).unwrap();
    let hover = quad.iter().chain(&heli).fold(0.0f64, |m, v| m.max(v.abs()));

    let conf = confidences(&[0.1, 0.5, 0.9], SoftmaxConfig { gamma: 10.0 }).unwrap();
    let softmax_err = conf
        .iter()
        .zip([0.98169, 0.01798, 0.00033])
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let phys = physics_loss(array![[0.0], [1.0], [3.0]].view()).unwrap();

    outcome(
        (14.0..=18.0).contains(&factor) && hover < 1e-9 && softmax_err <= 1e-5 && phys == 2.5,
        format!(
            "rk4 factor {factor:.3}, hover residual {hover:.1e}, softmax error {softmax_err:.1e}, physics loss {phys}"
        ),
    )
}

fn cli(args: &[&str]) -> i32 {
    pirnn_uav::cli::run(std::iter::once("pirnn-uav").chain(args.iter().copied()))
}

fn generate_and_train(root: &Path) -> Result<(String, Vec<String>), String> {
    let ds = root.join("ds");
    let run = root.join("run");
    let (ds_s, run_s) = (ds.to_str().unwrap(), run.to_str().unwrap());
    let code = cli(&["-q", "generate", "--n-per-class", "8", "--duration", "2", "--seed", "21", "--out", ds_s]);
    if code != 0 {
        return Err(format!("generate exited {code}"));
    }
    let code = cli(&["-q", "train", "--dataset", ds_s, "--epochs", "3", "--hidden-width", "32", "--seed", "21", "--out", run_s]);
    if code != 0 {
        return Err(format!("train exited {code}"));
    }
    let hash = dataset_hash(&ds).map_err(|e| e.to_string())?;
    let log = std::fs::read_to_string(run.join("train_log.csv")).map_err(|e| e.to_string())?;
    // every column except wall time
    let losses = log.lines().map(|l| l.rsplit_once(',').map_or(l, |p| p.0).to_owned()).collect();
    Ok((hash, losses))
}

fn criterion_determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    match (generate_and_train(a.path()), generate_and_train(b.path())) {
        (Ok((ha, la)), Ok((hb, lb))) => outcome(
            ha == hb && la == lb && la.len() > 1,
            format!(
                "dataset hashes {}, {} logged epochs {}",
                if ha == hb { "match" } else { "differ" },
                la.len().saturating_sub(1),
                if la == lb { "identical" } else { "differ" }
            ),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

fn stub(class: UavClass, tag: u64) -> Trajectory {
    Trajectory {
        class,
        scenario: Scenario::new(ScenarioKind::Hover, tag),
        dt: 0.01,
        states: vec![[tag as f64; 12]; 2],
        derivs: vec![[0.0; 12]; 2],
        controls: vec![[0.0; 4]; 2],
    }
}

fn run_property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn criterion_properties() -> Outcome {
    let checks: Vec<Result<(), String>> = vec![
        run_property(
            "rotation orthonormality",
            500,
            (-3.1..3.1f64, -1.5..1.5f64, -3.1..3.1f64),
            |(phi, theta, psi)| {
                let r = rotation_matrix(EulerAngles::new(phi, theta, psi)).unwrap();
                let off = (r.transpose() * r - nalgebra::Matrix3::identity()).abs().max();
                prop_assert!(off < 1e-12 && (r.determinant() - 1.0).abs() < 1e-12);
                Ok(())
            },
        ),
        run_property(
            "split stratification",
            100,
            (prop::array::uniform3(10usize..40), any::<u64>()),
            |(counts, seed)| {
                let trajs: Vec<_> = counts
                    .iter()
                    .enumerate()
                    .flat_map(|(c, &n)| (0..n).map(move |k| stub(UavClass::ALL[c], k as u64)))
                    .collect();
                let split = split_dataset(&trajs, DEFAULT_FRACTIONS, seed).unwrap();
                let mut seen = vec![false; trajs.len()];
                for s in [Split::Train, Split::Val, Split::Test] {
                    for &i in split.get(s) {
                        prop_assert!(!seen[i]);
                        seen[i] = true;
                    }
                }
                prop_assert!(seen.iter().all(|&v| v));
                for (c, &n) in counts.iter().enumerate() {
                    let train = split.get(Split::Train).iter().filter(|&&i| trajs[i].class_id() == c).count();
                    prop_assert_eq!(train, (0.8 * n as f64).round() as usize);
                }
                Ok(())
            },
        ),
        run_property(
            "loss non-negativity",
            300,
            (prop::collection::vec(-10.0..10.0f64, 60), prop::collection::vec(-10.0..10.0f64, 60)),
            |(a, b)| {
                let yhat = Array2::from_shape_vec((5, 12), a).unwrap();
                let y = Array2::from_shape_vec((5, 12), b).unwrap();
                prop_assert!(data_loss(yhat.view(), y.view()).unwrap() >= 0.0);
                prop_assert!(physics_loss(yhat.view()).unwrap() >= 0.0);
                prop_assert!(hybrid_loss(yhat.view(), y.view(), LossWeights::default()).unwrap() >= 0.0);
                Ok(())
            },
        ),
        run_property(
            "confidence normalization and argmin/argmax",
            500,
            (prop::array::uniform3(0.0..50.0f64), 0.1..100.0f64),
            |(losses, gamma)| {
                let cfg = SoftmaxConfig { gamma };
                let p = confidences(&losses, cfg).unwrap();
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let r = ClassificationResult::from_losses(losses, None, cfg).unwrap();
                let argmax = (0..3).fold(0, |b, i| if p[i] > p[b] { i } else { b });
                let argmin = (0..3).fold(0, |b, i| if losses[i] < losses[b] { i } else { b });
                prop_assert_eq!(r.predicted.id(), argmin);
                prop_assert_eq!(argmax, argmin);
                Ok(())
            },
        ),
        run_property(
            "checkpoint round trip",
            8,
            (any::<u64>(), 12usize..24),
            |(seed, hidden)| {
                let dir = tempfile::tempdir().unwrap();
                let p = NetworkParams::init(Architecture::with_hidden(hidden), seed).unwrap();
                save_checkpoint(&p, &NormStats::identity(), dir.path()).unwrap();
                let back = load_checkpoint(dir.path()).unwrap();
                for (a, b) in back.params.tensors().iter().zip(p.tensors()) {
                    prop_assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
                }
                Ok(())
            },
        ),
        run_property("dataset round trip", 3, any::<u64>(), |seed| {
            let dir = tempfile::tempdir().unwrap();
            let mut ds = build_dataset(3, 0.3, 0.01, seed, &FleetParams::default()).unwrap();
            ds.partition((0.34, 0.33, 0.33), seed).unwrap();
            save_dataset(&ds, dir.path()).unwrap();
            prop_assert_eq!(load_dataset(dir.path()).unwrap(), ds);
            Ok(())
        }),
    ];
    let failures: Vec<String> = checks.into_iter().filter_map(Result::err).collect();
    if failures.is_empty() {
        outcome(true, "6 suites passed")
    } else {
        outcome(false, failures.join("; "))
    }
}
