use serde::{Deserialize, Serialize};

use crate::dynamics::Vec12;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Standard deviations are floored here so constant columns normalize to zero.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-dimension z-score statistics for states (`x`) and derivatives (`y`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean_x: Vec12,
    pub std_x: Vec12,
    pub mean_y: Vec12,
    pub std_y: Vec12,
}

/// Population mean and standard deviation of each column, accumulated in one pass.
#[derive(Debug, Clone, Default)]
pub(crate) struct ColumnMoments {
    n: u64,
    mean: [f64; 12],
    m2: [f64; 12],
}

impl ColumnMoments {
    pub(crate) fn push(&mut self, row: &Vec12) {
        self.n += 1;
        let n = self.n as f64;
        for i in 0..12 {
            let delta = row[i] - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (row[i] - self.mean[i]);
        }
    }

    pub(crate) fn count(&self) -> u64 {
        self.n
    }

    pub(crate) fn mean(&self) -> Vec12 {
        self.mean
    }

    pub(crate) fn std(&self) -> Vec12 {
        let n = self.n.max(1) as f64;
        self.m2.map(|m| (m / n).sqrt())
    }
}

impl NormStats {
    /// Fits on the given (training) trajectories only.
    pub fn fit<'a>(train: impl IntoIterator<Item = &'a Trajectory>) -> Result<Self> {
        let mut x = ColumnMoments::default();
        let mut y = ColumnMoments::default();
        for traj in train {
            traj.states.iter().for_each(|r| x.push(r));
            traj.derivs.iter().for_each(|r| y.push(r));
        }
        if x.count() == 0 {
            return Err(Error::Empty("normalizer training split"));
        }
        Ok(Self {
            mean_x: x.mean(),
            std_x: x.std().map(|s| s.max(STD_FLOOR)),
            mean_y: y.mean(),
            std_y: y.std().map(|s| s.max(STD_FLOOR)),
        })
    }

    /// Identity transform.
    pub fn identity() -> Self {
        Self {
            mean_x: [0.0; 12],
            std_x: [1.0; 12],
            mean_y: [0.0; 12],
            std_y: [1.0; 12],
        }
    }

    pub fn apply_x(&self, x: &Vec12) -> Vec12 {
        std::array::from_fn(|i| (x[i] - self.mean_x[i]) / self.std_x[i])
    }

    pub fn invert_x(&self, z: &Vec12) -> Vec12 {
        std::array::from_fn(|i| z[i] * self.std_x[i] + self.mean_x[i])
    }

    pub fn apply_y(&self, y: &Vec12) -> Vec12 {
        std::array::from_fn(|i| (y[i] - self.mean_y[i]) / self.std_y[i])
    }

    pub fn invert_y(&self, z: &Vec12) -> Vec12 {
        std::array::from_fn(|i| z[i] * self.std_y[i] + self.mean_y[i])
    }

    pub fn is_valid(&self) -> bool {
        let finite = |v: &Vec12| v.iter().all(|x| x.is_finite());
        finite(&self.mean_x)
            && finite(&self.mean_y)
            && self.std_x.iter().chain(&self.std_y).all(|s| s.is_finite() && *s >= STD_FLOOR)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Scenario, ScenarioKind, UavClass};

    fn traj(states: Vec<Vec12>) -> Trajectory {
        let n = states.len();
        Trajectory {
            class: UavClass::Quadcopter,
            scenario: Scenario::new(ScenarioKind::Hover, 0),
            dt: 0.01,
            derivs: states.clone(),
            states,
            controls: vec![[0.0; 4]; n],
        }
    }

    #[test]
    fn constant_column_is_floored() {
        let mut a = [0.0; 12];
        a[3] = 7.0;
        let stats = NormStats::fit([&traj(vec![a, a, a])]).unwrap();
        assert_eq!(stats.std_x[3], STD_FLOOR);
        assert_eq!(stats.apply_x(&a)[3], 0.0);
    }

    #[test]
    fn plus_minus_one_column() {
        let mut a = [0.0; 12];
        let mut b = [0.0; 12];
        a[0] = -1.0;
        b[0] = 1.0;
        let stats = NormStats::fit([&traj(vec![a, b])]).unwrap();
        assert_eq!(stats.mean_x[0], 0.0);
        assert_eq!(stats.std_x[0], 1.0);
        assert_eq!(stats.apply_x(&a)[0], -1.0);
        assert_eq!(stats.apply_x(&b)[0], 1.0);
    }

    #[test]
    fn empty_split_rejected() {
        assert!(matches!(NormStats::fit([]), Err(Error::Empty(_))));
    }

    #[test]
    fn round_trip() {
        let rows: Vec<Vec12> = (0..20)
            .map(|k| std::array::from_fn(|i| (k * 13 + i * 7) as f64 * 0.37 - 11.0))
            .collect();
        let stats = NormStats::fit([&traj(rows.clone())]).unwrap();
        for r in &rows {
            let back = stats.invert_x(&stats.apply_x(r));
            let back_y = stats.invert_y(&stats.apply_y(r));
            for i in 0..12 {
                assert!((back[i] - r[i]).abs() < 1e-12);
                assert!((back_y[i] - r[i]).abs() < 1e-12);
            }
        }
    }
}
