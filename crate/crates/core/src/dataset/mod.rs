//! Dataset assembly, splitting, normalization, noise injection and serialization.

pub mod io;
pub mod noise;
pub mod normalize;
pub mod split;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{simulate_trajectory, FleetParams, Perturbation, Scenario, ScenarioKind, UavClass, NUM_CLASSES};
use crate::trajectory::Trajectory;

pub use io::{load_dataset, read_trajectory_file, save_dataset, write_trajectory_file, ObservedTrajectory};
pub use io::dataset_hash;
pub use noise::{add_noise, NoiseLevel, SignalScale, STANDARD_LEVELS};
pub use normalize::NormStats;
pub use split::{split_dataset, Split, SplitIndices};

pub const DEFAULT_FRACTIONS: (f64, f64, f64) = (0.8, 0.1, 0.1);

/// How a dataset was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub n_per_class: usize,
    pub duration: f64,
    pub dt: f64,
    pub master_seed: u64,
    /// SHA-256 of the quadcopter, fixed-wing and helicopter parameter files.
    pub param_hashes: [String; 3],
}

/// Split membership plus the normalizer fitted on its training part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub fractions: (f64, f64, f64),
    pub seed: u64,
    pub indices: SplitIndices,
    pub norm: NormStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub info: DatasetInfo,
    pub trajectories: Vec<Trajectory>,
    pub partition: Option<Partition>,
}

/// Deterministic per-trajectory seed.
pub fn trajectory_seed(master_seed: u64, class: UavClass, index: usize) -> u64 {
    // splitmix64 finalizer over a packed key
    let mut z = master_seed
        ^ ((class.id() as u64) << 56)
        ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Simulates `n_per_class` trajectories of every class, cycling through the
/// class's seven scenario kinds. Deterministic in `master_seed`.
pub fn build_dataset(
    n_per_class: usize,
    duration: f64,
    dt: f64,
    master_seed: u64,
    params: &FleetParams,
) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::invalid("n_per_class must be >= 1"));
    }
    let jobs: Vec<(UavClass, usize)> = UavClass::ALL
        .iter()
        .flat_map(|&c| (0..n_per_class).map(move |k| (c, k)))
        .collect();
    let trajectories = jobs
        .par_iter()
        .map(|&(class, k)| {
            let kinds = ScenarioKind::for_class(class);
            let scenario = Scenario::sampled(kinds[k % kinds.len()], trajectory_seed(master_seed, class, k));
            simulate_trajectory(class, params, &scenario, duration, dt, Perturbation::default())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        info: DatasetInfo {
            n_per_class,
            duration,
            dt,
            master_seed,
            param_hashes: params.hashes.clone(),
        },
        trajectories,
        partition: None,
    })
}

impl Dataset {
    /// Splits, then fits the normalizer on the training trajectories.
    pub fn partition(&mut self, fractions: (f64, f64, f64), seed: u64) -> Result<&Partition> {
        let indices = split_dataset(&self.trajectories, fractions, seed)?;
        let norm = NormStats::fit(indices.train.iter().map(|&i| &self.trajectories[i]))?;
        Ok(self.partition.insert(Partition {
            fractions,
            seed,
            indices,
            norm,
        }))
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for t in &self.trajectories {
            counts[t.class.id()] += 1;
        }
        counts
    }

    pub fn total_samples(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    /// Trajectories of one split; errors when the dataset has not been partitioned.
    pub fn split(&self, split: Split) -> Result<Vec<&Trajectory>> {
        let part = self
            .partition
            .as_ref()
            .ok_or_else(|| Error::invalid("dataset has no train/val/test partition"))?;
        Ok(part.indices.get(split).iter().map(|&i| &self.trajectories[i]).collect())
    }

    pub fn split_owned(&self, split: Split) -> Result<Vec<Trajectory>> {
        Ok(self.split(split)?.into_iter().cloned().collect())
    }
}
