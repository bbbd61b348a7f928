pub mod classify;
pub mod cli;
pub mod dataset;
pub mod dynamics;
pub mod error;
pub mod models;
pub mod pirnn;
pub mod trajectory;
pub mod training;

pub use error::{Error, Result};
