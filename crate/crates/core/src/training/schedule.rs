use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant learning rate over three phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub rates: [f64; 3],
    /// Start of phases 2 and 3 as fractions of the epoch budget.
    pub boundaries: [f64; 2],
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self {
            rates: [1e-3, 1e-4, 1e-5],
            boundaries: [0.5, 0.75],
        }
    }
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        let [a, b, c] = self.rates;
        if !(a > b && b > c && c > 0.0) || !a.is_finite() {
            return Err(Error::invalid(format!("learning rates must be positive and strictly decreasing: {:?}", self.rates)));
        }
        let [p, q] = self.boundaries;
        if !(0.0 < p && p <= q && q <= 1.0) {
            return Err(Error::invalid(format!("phase boundaries must satisfy 0 < p <= q <= 1: {:?}", self.boundaries)));
        }
        Ok(())
    }

    /// Rate for zero-based `epoch` of an `epochs`-long run.
    pub fn lr_at(&self, epoch: usize, epochs: usize) -> Result<f64> {
        if epoch >= epochs {
            return Err(Error::invalid(format!("epoch {epoch} outside 0..{epochs}")));
        }
        let e = epoch as f64;
        let n = epochs as f64;
        Ok(if e < self.boundaries[0] * n {
            self.rates[0]
        } else if e < self.boundaries[1] * n {
            self.rates[1]
        } else {
            self.rates[2]
        })
    }
}
