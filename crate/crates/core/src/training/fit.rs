use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use log::{debug, info};
use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, NormStats, Split};
use crate::error::{Error, Result};
use crate::models::NUM_CLASSES;
use crate::pirnn::{input_matrix, normalized_targets, Architecture, Model, NetworkParams, HIDDEN_WIDTH};
use crate::trajectory::Trajectory;
use crate::training::adam::{Adam, AdamConfig};
use crate::training::loss::{data_loss_grad, physics_loss, physics_loss_grad, LossWeights};
use crate::training::schedule::LrSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub weights: LossWeights,
    pub batch_train: usize,
    pub batch_eval: usize,
    pub epochs: usize,
    pub patience: usize,
    pub early_stop_delta: f64,
    pub schedule: LrSchedule,
    pub adam: AdamConfig,
    /// Length of the contiguous windows the temporal penalty is computed on.
    pub window: usize,
    pub hidden_width: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            weights: LossWeights::default(),
            batch_train: 256,
            batch_eval: 1000,
            epochs: 100,
            patience: 30,
            early_stop_delta: 1e-5,
            schedule: LrSchedule::default(),
            adam: AdamConfig::default(),
            window: 32,
            hidden_width: HIDDEN_WIDTH,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let w = self.weights;
        if !(w.data >= 0.0 && w.phys >= 0.0) || !w.data.is_finite() || !w.phys.is_finite() {
            return Err(Error::invalid(format!("loss weights must be finite and >= 0: {w:?}")));
        }
        if self.batch_train == 0 || self.batch_eval == 0 || self.epochs == 0 {
            return Err(Error::invalid("batch sizes and epochs must be >= 1"));
        }
        if self.window < 2 {
            return Err(Error::invalid("physics window must span at least 2 steps"));
        }
        if !(self.early_stop_delta >= 0.0) {
            return Err(Error::invalid("early_stop_delta must be >= 0"));
        }
        self.schedule.validate()?;
        Architecture::with_hidden(self.hidden_width).validate()
    }

    pub fn lr_at(&self, epoch: usize) -> Result<f64> {
        self.schedule.lr_at(epoch, self.epochs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Data term of the validation loss alone.
    pub val_data_loss: f64,
    pub lr: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn train_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.train_loss).collect()
    }

    pub fn val_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.val_loss).collect()
    }

    pub fn best_val_loss(&self) -> Option<f64> {
        self.records.get(self.best_epoch).map(|r| r.val_loss)
    }

    /// CSV with header `epoch,train_loss,val_loss,lr,seconds`; epochs are zero-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,lr,seconds\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{:e},{:e},{:e},{:.3}", r.epoch, r.train_loss, r.val_loss, r.lr, r.seconds);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Normalized samples of a set of trajectories, stacked in order.
struct Stacked {
    x: Array2<f64>,
    y: Array2<f64>,
    /// (first row, length, class id) per trajectory
    spans: Vec<(usize, usize, usize)>,
}

impl Stacked {
    fn new(trajs: &[&Trajectory], norm: &NormStats) -> Self {
        let total: usize = trajs.iter().map(|t| t.len()).sum();
        let mut x = Array2::zeros((total, crate::pirnn::INPUT_DIM));
        let mut y = Array2::zeros((total, crate::pirnn::OUTPUT_DIM));
        let mut spans = Vec::with_capacity(trajs.len());
        let mut row = 0;
        for t in trajs {
            let n = t.len();
            let normed: Vec<_> = t.states.iter().map(|s| norm.apply_x(s)).collect();
            x.slice_mut(s![row..row + n, ..]).assign(&input_matrix(&normed, t.class));
            y.slice_mut(s![row..row + n, ..]).assign(&normalized_targets(norm, &t.derivs));
            spans.push((row, n, t.class_id()));
            row += n;
        }
        Self { x, y, spans }
    }

    fn rows(&self) -> usize {
        self.x.nrows()
    }
}

fn gather(m: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    m.select(Axis(0), idx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalLoss {
    pub data: f64,
    pub phys: f64,
    pub total: f64,
}

fn predict_rows(params: &NetworkParams, x: ArrayView2<f64>, chunk: usize) -> Result<Array2<f64>> {
    let mut parts = Vec::new();
    let mut start = 0;
    while start < x.nrows() {
        let end = (start + chunk).min(x.nrows());
        parts.push(params.forward_batch(x.slice(s![start..end, ..]))?.0);
        start = end;
    }
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    Ok(concatenate(Axis(0), &views).expect("matching widths"))
}

/// Hybrid loss over whole trajectories: the data term is the mean over all
/// samples, the temporal term the mean over trajectories.
fn evaluate_stacked(params: &NetworkParams, set: &Stacked, w: LossWeights, chunk: usize) -> Result<EvalLoss> {
    let mut sq = 0.0;
    let mut phys = 0.0;
    let mut n_phys = 0usize;
    for &(start, len, _) in &set.spans {
        let pred = predict_rows(params, set.x.slice(s![start..start + len, ..]), chunk)?;
        let diff = &pred - &set.y.slice(s![start..start + len, ..]);
        sq += diff.mapv(|v| v * v).sum();
        if len >= 2 {
            phys += physics_loss(pred.view())?;
            n_phys += 1;
        }
    }
    let data = sq / set.rows().max(1) as f64;
    let phys = if n_phys > 0 { phys / n_phys as f64 } else { 0.0 };
    Ok(EvalLoss {
        data,
        phys,
        total: w.data * data + w.phys * phys,
    })
}

/// Validation-style hybrid loss of a model on raw trajectories.
pub fn evaluate(model: &Model, trajs: &[&Trajectory], w: LossWeights, chunk: usize) -> Result<EvalLoss> {
    if trajs.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    evaluate_stacked(&model.params, &Stacked::new(trajs, &model.norm), w, chunk.max(1))
}

/// Trains from scratch on `train`, early-stopping on `val`. Inputs and targets are
/// normalized with `norm`, which is stored in the returned model.
pub fn fit(train: &[&Trajectory], val: &[&Trajectory], norm: &NormStats, cfg: &TrainConfig) -> Result<(Model, TrainLog)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if val.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    if !norm.is_valid() {
        return Err(Error::invalid("normalization stats must be finite with positive spread"));
    }
    let train_set = Stacked::new(train, norm);
    let val_set = Stacked::new(val, norm);
    // window sources per class
    let mut by_class: Vec<Vec<(usize, usize)>> = vec![Vec::new(); NUM_CLASSES];
    for &(start, len, class) in &train_set.spans {
        if len >= cfg.window {
            by_class[class].push((start, len));
        }
    }
    let window_classes: Vec<usize> = (0..NUM_CLASSES).filter(|&c| !by_class[c].is_empty()).collect();
    let use_phys = cfg.weights.phys > 0.0 && !window_classes.is_empty();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = NetworkParams::init(Architecture::with_hidden(cfg.hidden_width), rng.gen())?;
    let mut adam = Adam::new(cfg.adam, params.tensors().iter().map(|t| t.len()));
    let mut order: Vec<usize> = (0..train_set.rows()).collect();

    let mut log = TrainLog::default();
    let mut best_params = params.clone();
    let mut best_val = f64::INFINITY;
    let mut reference = f64::INFINITY;
    let mut waited = 0usize;

    for epoch in 0..cfg.epochs {
        let started = Instant::now();
        let lr = cfg.lr_at(epoch)?;
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;

        for idx in order.chunks(cfg.batch_train) {
            let bx = gather(&train_set.x, idx);
            let by = gather(&train_set.y, idx);
            let nb = idx.len();

            let mut windows = Vec::new();
            if use_phys {
                for &c in &window_classes {
                    let (start, len) = by_class[c][rng.gen_range(0..by_class[c].len())];
                    let offset = start + rng.gen_range(0..=len - cfg.window);
                    windows.push(offset);
                }
            }
            let input = if windows.is_empty() {
                bx
            } else {
                let mut parts = vec![bx.view()];
                parts.extend(windows.iter().map(|&o| train_set.x.slice(s![o..o + cfg.window, ..])));
                concatenate(Axis(0), &parts).expect("matching widths")
            };

            let (out, cache) = params.forward_batch(input.view())?;
            let pred = out.slice(s![..nb, ..]);
            let diff = &pred - &by;
            let data = diff.mapv(|v| v * v).sum() / nb as f64;
            let mut upstream = Array2::zeros(out.raw_dim());
            upstream
                .slice_mut(s![..nb, ..])
                .assign(&(data_loss_grad(pred, by.view())? * cfg.weights.data));
            let mut phys = 0.0;
            let nw = windows.len() as f64;
            for k in 0..windows.len() {
                let rows = nb + k * cfg.window..nb + (k + 1) * cfg.window;
                let wp = out.slice(s![rows.clone(), ..]);
                phys += physics_loss(wp)? / nw;
                upstream
                    .slice_mut(s![rows, ..])
                    .assign(&(physics_loss_grad(wp)? * (cfg.weights.phys / nw)));
            }
            let loss = cfg.weights.data * data + cfg.weights.phys * phys;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            let grads = params.backward(&cache, upstream.view())?;
            adam.step(params.tensors_mut(), grads.tensors(), lr)?;
            loss_sum += loss;
            batches += 1;
        }

        let train_loss = loss_sum / batches as f64;
        let val = evaluate_stacked(&params, &val_set, cfg.weights, cfg.batch_eval)?;
        if !train_loss.is_finite() || !val.total.is_finite() || !params.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        let seconds = started.elapsed().as_secs_f64();
        log.records.push(EpochRecord {
            epoch,
            train_loss,
            val_loss: val.total,
            val_data_loss: val.data,
            lr,
            seconds,
        });
        info!(
            "epoch {epoch:>3}  train {train_loss:.6e}  val {:.6e}  lr {lr:.0e}  {seconds:.1}s",
            val.total
        );

        if val.total < best_val {
            best_val = val.total;
            best_params = params.clone();
            log.best_epoch = epoch;
        }
        if epoch == 0 || val.total < reference - cfg.early_stop_delta {
            reference = val.total;
            waited = 0;
        } else {
            waited += 1;
            if waited >= cfg.patience {
                debug!("early stop after epoch {epoch}");
                log.stopped_early = true;
                break;
            }
        }
    }

    Ok((
        Model {
            params: best_params,
            norm: norm.clone(),
        },
        log,
    ))
}

/// Trains on a partitioned dataset's train split, validating on its val split.
pub fn fit_dataset(ds: &Dataset, cfg: &TrainConfig) -> Result<(Model, TrainLog)> {
    let part = ds
        .partition
        .as_ref()
        .ok_or_else(|| Error::invalid("dataset must be partitioned before training"))?;
    fit(&ds.split(Split::Train)?, &ds.split(Split::Val)?, &part.norm, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Scenario, ScenarioKind, UavClass};

    fn decay(class: UavClass, seed: u64, n: usize) -> Trajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0: [f64; 12] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let rate = 0.5 + class.id() as f64;
        let dt = 0.05;
        let states: Vec<[f64; 12]> = (0..n)
            .map(|k| x0.map(|v| v * (-rate * k as f64 * dt).exp()))
            .collect();
        Trajectory {
            class,
            scenario: Scenario::new(ScenarioKind::Hover, seed),
            dt,
            derivs: states.iter().map(|s| s.map(|v| -rate * v)).collect(),
            controls: vec![[0.0; 4]; n],
            states,
        }
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            hidden_width: 16,
            batch_train: 32,
            window: 8,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn forced_early_stop_after_two_epochs() {
        let train: Vec<_> = (0..6).map(|i| decay(UavClass::ALL[i % 3], i as u64, 40)).collect();
        let val: Vec<_> = (0..3).map(|i| decay(UavClass::ALL[i], 100 + i as u64, 40)).collect();
        let norm = NormStats::fit(&train).unwrap();
        let cfg = TrainConfig {
            patience: 1,
            early_stop_delta: f64::INFINITY,
            epochs: 10,
            ..quick_cfg()
        };
        let tr: Vec<_> = train.iter().collect();
        let va: Vec<_> = val.iter().collect();
        let (_, log) = fit(&tr, &va, &norm, &cfg).unwrap();
        assert_eq!(log.len(), 2);
        assert!(log.stopped_early);
    }

    #[test]
    fn logged_rates_follow_schedule_and_best_is_minimum() {
        let train: Vec<_> = (0..6).map(|i| decay(UavClass::ALL[i % 3], i as u64, 40)).collect();
        let val: Vec<_> = (0..3).map(|i| decay(UavClass::ALL[i], 50 + i as u64, 40)).collect();
        let norm = NormStats::fit(&train).unwrap();
        let cfg = TrainConfig { epochs: 8, ..quick_cfg() };
        let tr: Vec<_> = train.iter().collect();
        let va: Vec<_> = val.iter().collect();
        let (model, log) = fit(&tr, &va, &norm, &cfg).unwrap();
        for r in &log.records {
            assert_eq!(r.lr, cfg.lr_at(r.epoch).unwrap());
        }
        let min = log.val_losses().into_iter().fold(f64::INFINITY, f64::min);
        assert_eq!(log.best_val_loss(), Some(min));
        let again = evaluate(&model, &va, cfg.weights, 1000).unwrap();
        assert_eq!(again.total, min);
        assert_eq!(log.to_csv().lines().count(), 9);
    }

    #[test]
    fn empty_sets_rejected() {
        let t = decay(UavClass::Quadcopter, 0, 40);
        let norm = NormStats::fit([&t]).unwrap();
        assert!(matches!(fit(&[], &[&t], &norm, &quick_cfg()), Err(Error::Empty(_))));
        assert!(matches!(fit(&[&t], &[], &norm, &quick_cfg()), Err(Error::Empty(_))));
    }
}
