//! Hybrid-loss optimization of the residual network.

pub mod adam;
pub mod fit;
pub mod loss;
pub mod schedule;

pub use adam::{Adam, AdamConfig};
pub use fit::{evaluate, fit, fit_dataset, EpochRecord, EvalLoss, TrainConfig, TrainLog};
pub use loss::{data_loss, hybrid_loss, physics_loss, LossWeights};
pub use schedule::LrSchedule;
