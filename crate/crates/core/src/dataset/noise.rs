//! Additive Gaussian measurement noise for robustness studies.
//!
//! Noise levels are percentages of the clean per-dimension signal standard
//! deviation, measured over a reference set (the test split).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::normalize::ColumnMoments;
use crate::dynamics::Vec12;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Clean per-dimension signal spread used as the 100% noise reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalScale {
    pub std_x: Vec12,
    pub std_y: Vec12,
}

impl SignalScale {
    pub fn measure<'a>(reference: impl IntoIterator<Item = &'a Trajectory>) -> Result<Self> {
        let mut x = ColumnMoments::default();
        let mut y = ColumnMoments::default();
        for traj in reference {
            traj.states.iter().for_each(|r| x.push(r));
            traj.derivs.iter().for_each(|r| y.push(r));
        }
        if x.count() == 0 {
            return Err(Error::Empty("noise reference set"));
        }
        Ok(Self {
            std_x: x.std(),
            std_y: y.std(),
        })
    }
}

/// A `(sigma_x %, sigma_xdot %)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub state_pct: f64,
    pub deriv_pct: f64,
}

impl NoiseLevel {
    pub const fn new(state_pct: f64, deriv_pct: f64) -> Self {
        Self {
            state_pct,
            deriv_pct,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.state_pct == 0.0 && self.deriv_pct == 0.0
    }
}

/// The four state/derivative noise pairs of the robustness table.
pub const STANDARD_LEVELS: [NoiseLevel; 4] = [
    NoiseLevel::new(3.0, 5.0),
    NoiseLevel::new(5.0, 10.0),
    NoiseLevel::new(10.0, 15.0),
    NoiseLevel::new(15.0, 20.0),
];

fn perturb(rows: &mut [Vec12], sigma: &Vec12, rng: &mut ChaCha8Rng) {
    for row in rows {
        for (v, s) in row.iter_mut().zip(sigma) {
            let z: f64 = StandardNormal.sample(rng);
            *v += s * z;
        }
    }
}

/// Returns a copy of `traj` with independent zero-mean Gaussian noise on states and
/// derivatives. Controls, label and scenario are untouched.
pub fn add_noise(traj: &Trajectory, level: NoiseLevel, scale: &SignalScale, seed: u64) -> Result<Trajectory> {
    if !(level.state_pct >= 0.0) || !(level.deriv_pct >= 0.0) {
        return Err(Error::invalid(format!("noise percentages must be >= 0, got {level:?}")));
    }
    let mut out = traj.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if level.state_pct > 0.0 {
        let sigma = scale.std_x.map(|s| s * level.state_pct / 100.0);
        perturb(&mut out.states, &sigma, &mut rng);
    }
    if level.deriv_pct > 0.0 {
        let sigma = scale.std_y.map(|s| s * level.deriv_pct / 100.0);
        perturb(&mut out.derivs, &sigma, &mut rng);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Scenario, ScenarioKind, UavClass};

    fn ramp(n: usize) -> Trajectory {
        let states: Vec<Vec12> = (0..n)
            .map(|k| std::array::from_fn(|i| ((k * (i + 3)) % 97) as f64 * 0.1 + i as f64))
            .collect();
        Trajectory {
            class: UavClass::Helicopter,
            scenario: Scenario::new(ScenarioKind::Yaw, 1),
            dt: 0.01,
            derivs: states.iter().map(|r| r.map(|v| -2.0 * v)).collect(),
            states,
            controls: vec![[1.0; 4]; n],
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let t = ramp(50);
        let scale = SignalScale::measure([&t]).unwrap();
        let noisy = add_noise(&t, NoiseLevel::new(0.0, 0.0), &scale, 3).unwrap();
        assert_eq!(noisy, t);
    }

    #[test]
    fn seeded_and_shape_preserving() {
        let t = ramp(50);
        let scale = SignalScale::measure([&t]).unwrap();
        let a = add_noise(&t, NoiseLevel::new(5.0, 10.0), &scale, 3).unwrap();
        let b = add_noise(&t, NoiseLevel::new(5.0, 10.0), &scale, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.states, t.states);
        assert_eq!(a.len(), t.len());
        assert_eq!(a.class, t.class);
        assert_eq!(a.controls, t.controls);
    }

    #[test]
    fn empirical_noise_std_matches_target() {
        // 12_000 rows x 12 dims per block = 144k samples per array
        let t = ramp(12_000);
        let scale = SignalScale::measure([&t]).unwrap();
        let level = NoiseLevel::new(10.0, 15.0);
        let noisy = add_noise(&t, level, &scale, 11).unwrap();
        for i in 0..12 {
            let mut dx = ColumnMoments::default();
            let mut dy = ColumnMoments::default();
            for k in 0..t.len() {
                let mut rx = [0.0; 12];
                let mut ry = [0.0; 12];
                rx[0] = noisy.states[k][i] - t.states[k][i];
                ry[0] = noisy.derivs[k][i] - t.derivs[k][i];
                dx.push(&rx);
                dy.push(&ry);
            }
            let want_x = 0.10 * scale.std_x[i];
            let want_y = 0.15 * scale.std_y[i];
            assert!((dx.std()[0] / want_x - 1.0).abs() < 0.05);
            assert!((dy.std()[0] / want_y - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn negative_level_rejected() {
        let t = ramp(5);
        let scale = SignalScale::measure([&t]).unwrap();
        assert!(add_noise(&t, NoiseLevel::new(-1.0, 0.0), &scale, 0).is_err());
    }
}
