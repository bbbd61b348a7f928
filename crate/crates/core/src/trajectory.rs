use serde::{Deserialize, Serialize};

use crate::dynamics::Vec12;
use crate::models::{ControlVector, Scenario, UavClass};

/// A simulated flight: states, ground-truth derivatives and controls sampled on a
/// uniform time grid, plus the class label and scenario that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub class: UavClass,
    pub scenario: Scenario,
    pub dt: f64,
    pub states: Vec<Vec12>,
    pub derivs: Vec<Vec12>,
    pub controls: Vec<ControlVector>,
}

impl Trajectory {
    /// Number of samples (integration steps + 1).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of integration steps.
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn class_id(&self) -> usize {
        self.class.id()
    }

    pub fn is_consistent(&self) -> bool {
        self.states.len() == self.derivs.len()
            && self.states.len() == self.controls.len()
            && self
                .states
                .iter()
                .chain(&self.derivs)
                .all(|row| row.iter().all(|v| v.is_finite()))
            && self.controls.iter().all(|row| row.iter().all(|v| v.is_finite()))
    }
}
