//! Class identification by which dynamics hypothesis best explains a trajectory.

pub mod pca;
pub mod report;
pub mod sweep;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::ObservedTrajectory;
use crate::dynamics::Vec12;
use crate::error::{Error, Result};
use crate::models::{UavClass, NUM_CLASSES};
use crate::pirnn::Model;
use crate::trajectory::Trajectory;

pub use pca::{pca_project, projections_csv, Pca};
pub use report::{ClassMetrics, Report};
pub use sweep::{noise_sweep, sweep_csv, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxConfig {
    pub gamma: f64,
}

impl Default for SoftmaxConfig {
    fn default() -> Self {
        Self { gamma: 10.0 }
    }
}

impl SoftmaxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma > 0.0 && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("gamma must be finite and > 0, got {}", self.gamma)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub per_class_loss: [f64; NUM_CLASSES],
    pub confidence: [f64; NUM_CLASSES],
    pub predicted: UavClass,
    pub true_label: Option<UavClass>,
    /// Set when the minimum loss was shared and the lowest class id was chosen.
    pub tie: bool,
}

impl ClassificationResult {
    /// Builds a result from per-class losses.
    pub fn from_losses(losses: [f64; NUM_CLASSES], label: Option<UavClass>, cfg: SoftmaxConfig) -> Result<Self> {
        let confidence = confidences(&losses, cfg)?;
        let mut best = 0;
        for i in 1..NUM_CLASSES {
            if losses[i] < losses[best] {
                best = i;
            }
        }
        let tie = (0..NUM_CLASSES).any(|i| i != best && losses[i] == losses[best]);
        Ok(Self {
            per_class_loss: losses,
            confidence,
            predicted: UavClass::from_id(best)?,
            true_label: label,
            tie,
        })
    }

    pub fn is_correct(&self) -> Option<bool> {
        self.true_label.map(|l| l == self.predicted)
    }

    /// `label,conf_quad%,conf_fw%,conf_heli%,predicted,correct` with the label and
    /// correctness empty when unknown.
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{}", self.true_label.map(|l| l.name()).unwrap_or(""));
        for p in self.confidence {
            let _ = write!(s, ",{:.2}", 100.0 * p);
        }
        let correct = match self.is_correct() {
            Some(true) => "yes",
            Some(false) => "no",
            None => "",
        };
        let _ = write!(s, ",{},{}", self.predicted.name(), correct);
        s
    }

    /// One human-readable line with per-class confidence percentages.
    pub fn summary_line(&self) -> String {
        let confs: Vec<String> = UavClass::ALL
            .iter()
            .map(|c| format!("{} {:.1}%", c.name(), 100.0 * self.confidence[c.id()]))
            .collect();
        let mut line = format!("{} | predicted {}", confs.join("  "), self.predicted.name());
        if let Some(label) = self.true_label {
            let _ = write!(
                line,
                " | true {} ({})",
                label.name(),
                if label == self.predicted { "correct" } else { "incorrect" }
            );
        }
        if self.tie {
            line.push_str(" | tie");
        }
        line
    }
}

pub const RESULTS_CSV_HEADER: &str = "true_class,conf_quadcopter_pct,conf_fixed_wing_pct,conf_helicopter_pct,predicted,correct";

pub fn results_csv(results: &[ClassificationResult]) -> String {
    let mut out = format!("{RESULTS_CSV_HEADER}\n");
    for r in results {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// `exp(-gamma L_i) / sum_j exp(-gamma L_j)`, shifted by the smallest loss.
pub fn confidences(losses: &[f64; NUM_CLASSES], cfg: SoftmaxConfig) -> Result<[f64; NUM_CLASSES]> {
    cfg.validate()?;
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite("class-conditioned loss"));
    }
    let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let e = losses.map(|l| (-cfg.gamma * (l - min)).exp());
    let z: f64 = e.iter().sum();
    Ok(e.map(|v| v / z))
}

/// Mean squared residual of the model's predictions under the hypothesis `class`,
/// in normalized derivative units.
pub fn class_conditioned_loss(model: &Model, states: &[Vec12], derivs: &[Vec12], class: UavClass) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    if states.len() != derivs.len() {
        return Err(Error::shape(states.len(), derivs.len()));
    }
    let pred = model.predict_normalized(states, class)?;
    let target = model.targets(derivs);
    crate::training::data_loss(pred.view(), target.view())
}

pub fn class_conditioned_losses(model: &Model, states: &[Vec12], derivs: &[Vec12]) -> Result<[f64; NUM_CLASSES]> {
    let mut out = [0.0; NUM_CLASSES];
    for c in UavClass::ALL {
        out[c.id()] = class_conditioned_loss(model, states, derivs, c)?;
    }
    Ok(out)
}

pub fn classify(
    model: &Model,
    states: &[Vec12],
    derivs: &[Vec12],
    label: Option<UavClass>,
    cfg: SoftmaxConfig,
) -> Result<ClassificationResult> {
    let losses = class_conditioned_losses(model, states, derivs)?;
    ClassificationResult::from_losses(losses, label, cfg)
}

pub fn classify_trajectory(model: &Model, traj: &Trajectory, cfg: SoftmaxConfig) -> Result<ClassificationResult> {
    classify(model, &traj.states, &traj.derivs, Some(traj.class), cfg)
}

pub fn classify_observed(model: &Model, obs: &ObservedTrajectory, cfg: SoftmaxConfig) -> Result<ClassificationResult> {
    classify(model, &obs.states, &obs.derivs, obs.label, cfg)
}

/// Classifies every trajectory, in input order.
pub fn classify_all<T: std::borrow::Borrow<Trajectory> + Sync>(
    model: &Model,
    trajs: &[T],
    cfg: SoftmaxConfig,
) -> Result<Vec<ClassificationResult>> {
    trajs
        .par_iter()
        .map(|t| classify_trajectory(model, t.borrow(), cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_losses_uniform() {
        let p = confidences(&[0.7; 3], SoftmaxConfig::default()).unwrap();
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn huge_losses_do_not_overflow() {
        let p = confidences(&[1e4, 1e4 + 0.1, 2e4], SoftmaxConfig::default()).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] > p[1] && p[2] == 0.0);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(confidences(&[f64::NAN, 0.0, 0.0], SoftmaxConfig::default()).is_err());
        assert!(confidences(&[0.0; 3], SoftmaxConfig { gamma: 0.0 }).is_err());
    }

    #[test]
    fn tie_breaks_to_lowest_id() {
        let r = ClassificationResult::from_losses([0.2, 0.5, 0.2], None, SoftmaxConfig::default()).unwrap();
        assert_eq!(r.predicted, UavClass::Quadcopter);
        assert!(r.tie);
        let r = ClassificationResult::from_losses([0.3, 0.5, 0.2], None, SoftmaxConfig::default()).unwrap();
        assert!(!r.tie);
        assert_eq!(r.predicted, UavClass::Helicopter);
    }

    #[test]
    fn near_even_split_row() {
        // confidences close to (49.5, 0, 50.5)%
        let gap = (50.5f64 / 49.5).ln() / 10.0;
        let r = ClassificationResult::from_losses([0.1 + gap, 5.0, 0.1], Some(UavClass::Helicopter), SoftmaxConfig::default())
            .unwrap();
        assert!((r.confidence[0] - 0.495).abs() < 1e-6);
        assert!((r.confidence[2] - 0.505).abs() < 1e-6);
        assert_eq!(r.predicted, UavClass::Helicopter);
        assert_eq!(r.is_correct(), Some(true));
        assert_eq!(r.csv_row(), "Helicopter,49.50,0.00,50.50,Helicopter,yes");
    }
}
