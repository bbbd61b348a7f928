use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dynamics::{rk4_step, Vec12};
use crate::error::{Error, Result};
use crate::models::fixed_wing::{cruise_trim, CRUISE_AIRSPEED};
use crate::models::{ControlProgram, FleetParams, Scenario, UavClass};
use crate::trajectory::Trajectory;

/// Seeds tried after the first before a scenario is declared infeasible.
pub const MAX_REJECTED_SEEDS: usize = 100;

/// States beyond this magnitude count as divergence.
const STATE_LIMIT: f64 = 1e6;

/// Standard deviations of the Gaussian offsets applied to the trim state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub position: f64,
    pub attitude: f64,
    pub rate: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            position: 0.5,
            attitude: 0.05,
            rate: 0.02,
        }
    }
}

impl Perturbation {
    pub fn none() -> Self {
        Self {
            position: 0.0,
            attitude: 0.0,
            rate: 0.0,
        }
    }
}

/// Trim state plus seeded Gaussian offsets on position, attitude and body rates.
pub fn initial_state(
    class: UavClass,
    params: &FleetParams,
    seed: u64,
    perturbation: Perturbation,
) -> Result<Vec12> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1417_57a7e);
    let mut draw = |sigma: f64| -> f64 {
        if sigma == 0.0 {
            0.0
        } else {
            Normal::new(0.0, sigma)
                .expect("sigma is finite and positive")
                .sample(&mut rng)
        }
    };
    let (pos, att, rates) = match class {
        UavClass::Quadcopter | UavClass::Helicopter => (0..3, 6..9, 9..12),
        UavClass::FixedWing => (9..12, 6..9, 3..6),
    };
    let mut s = match class {
        UavClass::FixedWing => cruise_trim(&params.fixed_wing, CRUISE_AIRSPEED)?.state(),
        _ => [0.0; 12],
    };
    for i in pos {
        s[i] += draw(perturbation.position);
    }
    for i in att {
        s[i] += draw(perturbation.attitude);
    }
    for i in rates {
        s[i] += draw(perturbation.rate);
    }
    Ok(s)
}

fn wrap_angle(a: f64) -> f64 {
    if (-PI..PI).contains(&a) {
        a
    } else {
        (a + PI).rem_euclid(2.0 * PI) - PI
    }
}

fn step_count(duration: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(duration > 0.0) {
        return Err(Error::invalid("duration and dt must be positive"));
    }
    let n = (duration / dt).round();
    if (n * dt - duration).abs() > 1e-9 * duration.max(1.0) {
        return Err(Error::invalid(format!(
            "duration {duration} is not a whole number of {dt} steps"
        )));
    }
    Ok(n as usize)
}

/// Integrates one trajectory from `x0` without any rejection logic.
///
/// Roll and yaw are wrapped into `[-pi, pi)` after every step; the derivative
/// functions only see them through trigonometric functions.
pub fn simulate_trajectory_from(
    class: UavClass,
    params: &FleetParams,
    scenario: &Scenario,
    x0: Vec12,
    duration: f64,
    dt: f64,
) -> Result<Trajectory> {
    let n = step_count(duration, dt)?;
    let program = ControlProgram::new(class, scenario, params)?;
    let model = params.for_class(class);

    let mut states = Vec::with_capacity(n + 1);
    let mut derivs = Vec::with_capacity(n + 1);
    let mut controls = Vec::with_capacity(n + 1);

    let mut x = x0;
    for k in 0..=n {
        let u = program.at(k as f64 * dt);
        derivs.push(model.derivative(&x, &u)?);
        states.push(x);
        controls.push(u);
        if k == n {
            break;
        }
        x = rk4_step(|s, c| model.derivative(s, c), &x, &u, dt)?;
        x[6] = wrap_angle(x[6]);
        x[8] = wrap_angle(x[8]);
        if x.iter().any(|v| v.abs() > STATE_LIMIT) {
            return Err(Error::IntegrationDiverged { stage: 0 });
        }
    }

    Ok(Trajectory {
        class,
        scenario: *scenario,
        dt,
        states,
        derivs,
        controls,
    })
}

fn is_rejection(err: &Error) -> bool {
    matches!(
        err,
        Error::GimbalSingularity { .. } | Error::IntegrationDiverged { .. } | Error::NonFinite(_)
    )
}

/// Simulates `scenario` from a seeded initial state, retrying with the next seed
/// when the flight hits the gimbal guard or diverges.
///
/// The returned trajectory's scenario carries the seed that succeeded.
pub fn simulate_trajectory(
    class: UavClass,
    params: &FleetParams,
    scenario: &Scenario,
    duration: f64,
    dt: f64,
    perturbation: Perturbation,
) -> Result<Trajectory> {
    for attempt in 0..=MAX_REJECTED_SEEDS {
        let sc = scenario.with_seed(scenario.seed.wrapping_add(attempt as u64));
        let x0 = initial_state(class, params, sc.seed, perturbation)?;
        match simulate_trajectory_from(class, params, &sc, x0, duration, dt) {
            Ok(traj) => return Ok(traj),
            Err(e) if is_rejection(&e) => {
                log::debug!("{class} {} seed {} rejected: {e}", sc.kind, sc.seed);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::ScenarioInfeasible {
        class: class.to_string(),
        scenario: scenario.kind.to_string(),
        rejected: MAX_REJECTED_SEEDS + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ScenarioKind;

    #[test]
    fn quad_hover_stays_put() {
        let fleet = FleetParams::default();
        let sc = Scenario::new(ScenarioKind::Hover, 0);
        let t = simulate_trajectory(UavClass::Quadcopter, &fleet, &sc, 10.0, 0.01, Perturbation::none())
            .unwrap();
        assert_eq!(t.len(), 1001);
        let last = t.states.last().unwrap();
        for i in 0..3 {
            assert!(last[i].abs() < 1e-6);
        }
    }

    #[test]
    fn heli_hover_altitude() {
        let fleet = FleetParams::default();
        let sc = Scenario::new(ScenarioKind::Hover, 0);
        let t = simulate_trajectory(UavClass::Helicopter, &fleet, &sc, 10.0, 0.01, Perturbation::none())
            .unwrap();
        let dz = t.states.last().unwrap()[2] - t.states[0][2];
        assert!(dz.abs() < 1e-6);
    }

    #[test]
    fn stored_derivatives_match_reevaluation() {
        let fleet = FleetParams::default();
        for class in UavClass::ALL {
            let sc = Scenario::sampled(ScenarioKind::Disturbed, 5);
            let t = simulate_trajectory(class, &fleet, &sc, 2.0, 0.01, Perturbation::default()).unwrap();
            let model = fleet.for_class(class);
            for k in (0..t.len()).step_by(37) {
                let d = model.derivative(&t.states[k], &t.controls[k]).unwrap();
                assert_eq!(d, t.derivs[k]);
            }
        }
    }

    #[test]
    fn rejects_fractional_steps() {
        let fleet = FleetParams::default();
        let sc = Scenario::new(ScenarioKind::Hover, 0);
        assert!(simulate_trajectory(UavClass::Quadcopter, &fleet, &sc, 1.0, 0.3, Perturbation::none()).is_err());
    }

    #[test]
    fn wraps_into_half_open_interval() {
        assert_eq!(wrap_angle(0.5), 0.5);
        assert!((wrap_angle(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert!((wrap_angle(-PI - 0.1) - (PI - 0.1)).abs() < 1e-12);
    }
}
