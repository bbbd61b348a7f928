//! Vehicle models: derivative functions, parameters, open-loop scenarios and simulation.

pub mod fixed_wing;
pub mod heli;
pub mod params;
pub mod quad;
pub mod scenario;
pub mod simulate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::Vec12;
use crate::error::{Error, Result};

pub use fixed_wing::{cruise_trim, fw_derivative, CruiseTrim};
pub use heli::{heli_control_map, heli_derivative};
pub use params::{FixedWingParams, FleetParams, HeliParams, QuadParams};
pub use quad::quad_derivative;
pub use scenario::{generate_controls, ControlProgram, Scenario, ScenarioKind};
pub use simulate::{initial_state, simulate_trajectory, simulate_trajectory_from, Perturbation};

/// Four actuator values; meaning depends on the class.
///
/// * quadcopter: motor speeds `w1..w4` (rad/s)
/// * fixed-wing: throttle, aileron, elevator, rudder
/// * helicopter: main thrust, tail thrust, cyclic roll, cyclic pitch
pub type ControlVector = [f64; 4];

/// Vehicle class. The discriminant is the class id used by the network's one-hot input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UavClass {
    Quadcopter = 0,
    FixedWing = 1,
    Helicopter = 2,
}

pub const NUM_CLASSES: usize = 3;

impl UavClass {
    pub const ALL: [UavClass; NUM_CLASSES] =
        [UavClass::Quadcopter, UavClass::FixedWing, UavClass::Helicopter];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Result<Self> {
        Self::ALL
            .get(id)
            .copied()
            .ok_or_else(|| Error::invalid(format!("class id {id} out of range")))
    }

    pub fn name(self) -> &'static str {
        match self {
            UavClass::Quadcopter => "Quadcopter",
            UavClass::FixedWing => "Fixed-wing",
            UavClass::Helicopter => "Helicopter",
        }
    }
}

impl fmt::Display for UavClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UavClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quad" | "quadcopter" | "0" => Ok(UavClass::Quadcopter),
            "fw" | "fixed-wing" | "fixed_wing" | "fixedwing" | "1" => Ok(UavClass::FixedWing),
            "heli" | "helicopter" | "2" => Ok(UavClass::Helicopter),
            other => Err(Error::invalid(format!("unknown UAV class {other:?}"))),
        }
    }
}

/// Class-tagged parameter set.
#[derive(Debug, Clone, PartialEq)]
pub enum UavParams {
    Quadcopter(QuadParams),
    FixedWing(FixedWingParams),
    Helicopter(HeliParams),
}

impl UavParams {
    pub fn class(&self) -> UavClass {
        match self {
            UavParams::Quadcopter(_) => UavClass::Quadcopter,
            UavParams::FixedWing(_) => UavClass::FixedWing,
            UavParams::Helicopter(_) => UavClass::Helicopter,
        }
    }

    pub fn derivative(&self, state: &Vec12, control: &ControlVector) -> Result<Vec12> {
        match self {
            UavParams::Quadcopter(p) => quad_derivative(state, control, p),
            UavParams::FixedWing(p) => fw_derivative(state, control, p),
            UavParams::Helicopter(p) => heli_derivative(state, control, p),
        }
    }
}

impl FleetParams {
    pub fn for_class(&self, class: UavClass) -> UavParams {
        match class {
            UavClass::Quadcopter => UavParams::Quadcopter(self.quad.clone()),
            UavClass::FixedWing => UavParams::FixedWing(self.fixed_wing.clone()),
            UavClass::Helicopter => UavParams::Helicopter(self.heli.clone()),
        }
    }
}
