use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::{classify_all, Report, SoftmaxConfig};
use crate::dataset::{add_noise, trajectory_seed, NoiseLevel, SignalScale};
use crate::error::{Error, Result};
use crate::pirnn::Model;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub level: NoiseLevel,
    pub report: Report,
}

/// Classifies noisy copies of the same test trajectories at each level. The noise
/// reference scale is measured on the clean test set; every (level, trajectory)
/// pair gets its own seed.
pub fn noise_sweep(
    model: &Model,
    test: &[&Trajectory],
    levels: &[NoiseLevel],
    seed: u64,
    cfg: SoftmaxConfig,
) -> Result<Vec<SweepRow>> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let scale = SignalScale::measure(test.iter().copied())?;
    levels
        .iter()
        .enumerate()
        .map(|(li, &level)| {
            let level_seed = seed ^ (li as u64 + 1).wrapping_mul(0xd6e8_feb8_6659_fd93);
            let noisy = test
                .iter()
                .enumerate()
                .map(|(k, t)| add_noise(t, level, &scale, trajectory_seed(level_seed, t.class, k)))
                .collect::<Result<Vec<_>>>()?;
            let results = classify_all(model, &noisy, cfg)?;
            Ok(SweepRow {
                level,
                report: Report::from_results(&results)?,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("state_noise_pct,deriv_noise_pct,accuracy,f1_quadcopter,f1_fixed_wing,f1_helicopter,samples\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{:.6},{:.6},{}",
            r.level.state_pct,
            r.level.deriv_pct,
            r.report.accuracy,
            r.report.per_class[0].f1,
            r.report.per_class[1].f1,
            r.report.per_class[2].f1,
            r.report.total
        );
    }
    s
}
