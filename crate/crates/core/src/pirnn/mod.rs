//! Physics-informed residual network: `(state, class) -> state derivative`.

pub mod checkpoint;
pub mod gradcheck;
pub mod network;

use ndarray::Array2;

use crate::dataset::NormStats;
use crate::dynamics::Vec12;
use crate::error::Result;
use crate::models::UavClass;

pub use gradcheck::{check_gradients, GradCheck, TensorCheck};
pub use checkpoint::{load_checkpoint, load_checkpoint_as, load_standard, save_checkpoint};
pub use network::{
    encode_input, input_matrix, Architecture, Dense, ForwardCache, NetworkParams, ParamGradients, SkipMix,
    HIDDEN_WIDTH, INPUT_DIM, OUTPUT_DIM, STATE_DIM,
};

/// Trained network together with the normalizer it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: NetworkParams,
    pub norm: NormStats,
}

impl Model {
    /// Network inputs for raw states under the hypothesis `class`.
    pub fn inputs(&self, states: &[Vec12], class: UavClass) -> Array2<f64> {
        let normed: Vec<Vec12> = states.iter().map(|x| self.norm.apply_x(x)).collect();
        input_matrix(&normed, class)
    }

    /// Normalized regression targets for raw derivatives.
    pub fn targets(&self, derivs: &[Vec12]) -> Array2<f64> {
        normalized_targets(&self.norm, derivs)
    }

    /// Predictions in normalized derivative units, `rows x 12`.
    pub fn predict_normalized(&self, states: &[Vec12], class: UavClass) -> Result<Array2<f64>> {
        let (out, _) = self.params.forward_batch(self.inputs(states, class).view())?;
        Ok(out)
    }

    /// Predicted derivatives in physical units.
    pub fn predict(&self, states: &[Vec12], class: UavClass) -> Result<Vec<Vec12>> {
        let out = self.predict_normalized(states, class)?;
        Ok(out
            .rows()
            .into_iter()
            .map(|r| {
                let z: Vec12 = std::array::from_fn(|i| r[i]);
                self.norm.invert_y(&z)
            })
            .collect())
    }
}

pub fn normalized_targets(norm: &NormStats, derivs: &[Vec12]) -> Array2<f64> {
    let mut m = Array2::zeros((derivs.len(), OUTPUT_DIM));
    for (mut row, y) in m.rows_mut().into_iter().zip(derivs) {
        let z = norm.apply_y(y);
        row.iter_mut().zip(z).for_each(|(d, s)| *d = s);
    }
    m
}
