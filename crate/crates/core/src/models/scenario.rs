//! Open-loop maneuver scripts.
//!
//! Every scenario starts from the class trim (hover or cruise) and superposes a
//! smooth offset on the channel that drives the maneuver. `Disturbed` adds a
//! seeded sum of sinusoids to every channel; `Failure` zeroes one actuator with
//! a non-zero trim value after a seeded cutoff time.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::fixed_wing::{cruise_trim, CRUISE_AIRSPEED};
use crate::models::{ControlVector, FleetParams, UavClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Hover,
    Cruise,
    Climb,
    Roll,
    Pitch,
    Yaw,
    Disturbed,
    Failure,
}

impl ScenarioKind {
    /// The seven maneuvers flown by `class`, in dataset cycling order.
    pub fn for_class(class: UavClass) -> [ScenarioKind; 7] {
        use ScenarioKind::*;
        let trim = if class == UavClass::FixedWing { Cruise } else { Hover };
        [trim, Climb, Roll, Pitch, Yaw, Disturbed, Failure]
    }

    pub fn valid_for(self, class: UavClass) -> bool {
        match self {
            ScenarioKind::Hover => class != UavClass::FixedWing,
            ScenarioKind::Cruise => class == UavClass::FixedWing,
            _ => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Hover => "hover",
            ScenarioKind::Cruise => "cruise",
            ScenarioKind::Climb => "climb",
            ScenarioKind::Roll => "roll",
            ScenarioKind::Pitch => "pitch",
            ScenarioKind::Yaw => "yaw",
            ScenarioKind::Disturbed => "disturbed",
            ScenarioKind::Failure => "failure",
        }
    }

    pub fn index(self) -> i64 {
        self as i64
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use ScenarioKind::*;
        [Hover, Cruise, Climb, Roll, Pitch, Yaw, Disturbed, Failure]
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown scenario {s:?}")))
    }
}

/// Which actuator fails and when.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureSpec {
    pub channel: usize,
    pub cutoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub seed: u64,
    /// Multiplies the class's nominal maneuver amplitude.
    pub scale: f64,
    /// Explicit failure; drawn from `seed` when absent.
    pub failure: Option<FailureSpec>,
}

impl Scenario {
    /// Nominal amplitude.
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            scale: 1.0,
            failure: None,
        }
    }

    /// Amplitude scale drawn uniformly from `[0.5, 1.5)` using `seed`.
    pub fn sampled(kind: ScenarioKind, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1_e000);
        Self {
            scale: rng.gen_range(0.5..1.5),
            ..Self::new(kind, seed)
        }
    }

    pub fn with_failure(mut self, channel: usize, cutoff: f64) -> Self {
        self.failure = Some(FailureSpec { channel, cutoff });
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Actuator channels whose trim value is non-zero, i.e. the ones whose loss matters.
fn failure_candidates(class: UavClass) -> &'static [usize] {
    match class {
        UavClass::Quadcopter => &[0, 1, 2, 3],
        UavClass::FixedWing => &[0, 2],
        UavClass::Helicopter => &[0],
    }
}

/// Nominal maneuver amplitude and frequency (Hz) per class and channel role.
struct Nominal {
    climb: (f64, f64),
    roll: (f64, f64),
    pitch: (f64, f64),
    yaw: (f64, f64),
    disturbance: [f64; 4],
}

fn nominal(class: UavClass) -> Nominal {
    match class {
        // fractions of hover motor speed
        UavClass::Quadcopter => Nominal {
            climb: (0.03, 0.1),
            roll: (0.01, 0.5),
            pitch: (0.01, 0.5),
            yaw: (0.05, 0.2),
            disturbance: [0.01; 4],
        },
        // throttle fraction and surface deflections in rad
        UavClass::FixedWing => Nominal {
            climb: (0.1, 0.1),
            roll: (0.005, 0.25),
            pitch: (0.05, 0.25),
            yaw: (0.05, 0.25),
            disturbance: [0.03, 0.003, 0.01, 0.01],
        },
        // main thrust fraction, tail thrust in N, cyclic in rad
        UavClass::Helicopter => Nominal {
            climb: (0.06, 0.1),
            roll: (0.01, 0.5),
            pitch: (0.01, 0.5),
            yaw: (0.05, 0.2),
            disturbance: [0.01, 0.02, 0.005, 0.005],
        },
    }
}

#[derive(Debug, Clone, Copy)]
struct Tone {
    amplitude: f64,
    freq: f64,
    phase: f64,
}

/// A scenario resolved against a vehicle's trim; evaluate with [`ControlProgram::at`].
#[derive(Debug, Clone)]
pub struct ControlProgram {
    class: UavClass,
    kind: ScenarioKind,
    scale: f64,
    trim: ControlVector,
    tones: [[Tone; 3]; 4],
    failure: Option<FailureSpec>,
}

impl ControlProgram {
    pub fn new(class: UavClass, scenario: &Scenario, params: &FleetParams) -> Result<Self> {
        if !scenario.kind.valid_for(class) {
            return Err(Error::invalid(format!(
                "scenario {} is not defined for {class}",
                scenario.kind
            )));
        }
        let trim = trim_controls(class, params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

        let mut tones = [[Tone {
            amplitude: 0.0,
            freq: 0.0,
            phase: 0.0,
        }; 3]; 4];
        for channel in tones.iter_mut() {
            for tone in channel.iter_mut() {
                *tone = Tone {
                    amplitude: 1.0 / 3.0,
                    freq: rng.gen_range(0.2..1.5),
                    phase: rng.gen_range(0.0..TAU),
                };
            }
        }

        let failure = if scenario.kind == ScenarioKind::Failure {
            let spec = match scenario.failure {
                Some(spec) => spec,
                None => {
                    let cands = failure_candidates(class);
                    FailureSpec {
                        channel: cands[rng.gen_range(0..cands.len())],
                        cutoff: rng.gen_range(2.0..8.0),
                    }
                }
            };
            if spec.channel >= 4 {
                return Err(Error::invalid(format!("failure channel {} out of range", spec.channel)));
            }
            Some(spec)
        } else {
            None
        };

        Ok(Self {
            class,
            kind: scenario.kind,
            scale: scenario.scale,
            trim,
            tones,
            failure,
        })
    }

    pub fn trim(&self) -> ControlVector {
        self.trim
    }

    pub fn failure(&self) -> Option<FailureSpec> {
        self.failure
    }

    fn disturbance(&self, channel: usize, t: f64) -> f64 {
        self.tones[channel]
            .iter()
            .map(|tone| tone.amplitude * (TAU * tone.freq * t + tone.phase).sin())
            .sum()
    }

    pub fn at(&self, t: f64) -> ControlVector {
        let nom = nominal(self.class);
        let s = self.scale;
        let sine = |(a, f): (f64, f64)| s * a * (TAU * f * t).sin();
        // non-negative bump, zero at t = 0
        let bump = |(a, f): (f64, f64)| s * a * 0.5 * (1.0 - (TAU * f * t).cos());
        let mut u = self.trim;

        match (self.class, self.kind) {
            (_, ScenarioKind::Hover | ScenarioKind::Cruise | ScenarioKind::Failure) => {}
            (UavClass::Quadcopter, kind) => {
                let h = self.trim[0];
                match kind {
                    ScenarioKind::Climb => u.iter_mut().for_each(|w| *w += h * bump(nom.climb)),
                    ScenarioKind::Roll => {
                        let d = h * sine(nom.roll);
                        u[3] += d;
                        u[1] -= d;
                    }
                    ScenarioKind::Pitch => {
                        let d = h * sine(nom.pitch);
                        u[0] += d;
                        u[2] -= d;
                    }
                    ScenarioKind::Yaw => {
                        let d = h * sine(nom.yaw);
                        u[0] += d;
                        u[2] += d;
                        u[1] -= d;
                        u[3] -= d;
                    }
                    ScenarioKind::Disturbed => {
                        for (i, w) in u.iter_mut().enumerate() {
                            *w += h * s * nom.disturbance[i] * self.disturbance(i, t);
                        }
                    }
                    _ => unreachable!(),
                }
                u.iter_mut().for_each(|w| *w = w.max(0.0));
            }
            (UavClass::FixedWing, kind) => match kind {
                ScenarioKind::Climb => {
                    u[0] += bump(nom.climb);
                    u[2] -= 0.2 * bump(nom.climb);
                }
                ScenarioKind::Roll => u[1] += sine(nom.roll),
                ScenarioKind::Pitch => u[2] += sine(nom.pitch),
                ScenarioKind::Yaw => u[3] += sine(nom.yaw),
                ScenarioKind::Disturbed => {
                    for (i, v) in u.iter_mut().enumerate() {
                        *v += s * nom.disturbance[i] * self.disturbance(i, t);
                    }
                }
                _ => unreachable!(),
            },
            (UavClass::Helicopter, kind) => {
                let t_main = self.trim[0];
                match kind {
                    ScenarioKind::Climb => u[0] += t_main * bump(nom.climb),
                    ScenarioKind::Roll => u[2] += sine(nom.roll),
                    ScenarioKind::Pitch => u[3] += sine(nom.pitch),
                    ScenarioKind::Yaw => u[1] += bump(nom.yaw),
                    ScenarioKind::Disturbed => {
                        u[0] += t_main * s * nom.disturbance[0] * self.disturbance(0, t);
                        u[1] += s * nom.disturbance[1] * 0.5 * (1.0 + self.disturbance(1, t));
                        u[2] += s * nom.disturbance[2] * self.disturbance(2, t);
                        u[3] += s * nom.disturbance[3] * self.disturbance(3, t);
                    }
                    _ => unreachable!(),
                }
                u[0] = u[0].max(0.0);
                u[1] = u[1].max(0.0);
            }
        }

        if self.class == UavClass::FixedWing {
            u[0] = u[0].clamp(0.0, 1.0);
        }
        if let Some(f) = self.failure {
            if t >= f.cutoff {
                u[f.channel] = 0.0;
            }
        }
        u
    }
}

/// Trim controls: equal hover motor speeds, cruise trim, or main thrust equal to weight.
pub fn trim_controls(class: UavClass, params: &FleetParams) -> Result<ControlVector> {
    Ok(match class {
        UavClass::Quadcopter => [params.quad.hover_speed(); 4],
        UavClass::FixedWing => cruise_trim(&params.fixed_wing, CRUISE_AIRSPEED)?.controls(),
        UavClass::Helicopter => [params.heli.mass * params.heli.g, 0.0, 0.0, 0.0],
    })
}

/// Control vector of `scenario` at time `t` (seconds, within `[0, 10]` for dataset use).
pub fn generate_controls(
    class: UavClass,
    scenario: &Scenario,
    params: &FleetParams,
    t: f64,
) -> Result<ControlVector> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(format!("control time must be >= 0, got {t}")));
    }
    Ok(ControlProgram::new(class, scenario, params)?.at(t))
}
