use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{UavClass, NUM_CLASSES};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "val" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split {other:?}"))),
        }
    }
}

/// Trajectory indices per split, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn get(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    /// Per-trajectory split labels for a dataset of `len` trajectories.
    pub fn assignment(&self, len: usize) -> Vec<Option<Split>> {
        let mut out = vec![None; len];
        for (split, idx) in [
            (Split::Train, &self.train),
            (Split::Val, &self.val),
            (Split::Test, &self.test),
        ] {
            for &i in idx {
                out[i] = Some(split);
            }
        }
        out
    }

    pub fn from_assignment(assignment: &[Option<Split>]) -> Self {
        let mut s = Self::default();
        for (i, a) in assignment.iter().enumerate() {
            match a {
                Some(Split::Train) => s.train.push(i),
                Some(Split::Val) => s.val.push(i),
                Some(Split::Test) => s.test.push(i),
                None => {}
            }
        }
        s
    }
}

/// Stratified, seeded split at trajectory granularity.
///
/// Within each class the trajectory indices are shuffled, then
/// `round(f_train * n)` go to training, `round(f_val * n)` to validation and
/// the remainder to test. Every class must populate all three splits.
pub fn split_dataset(
    trajectories: &[Trajectory],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<SplitIndices> {
    let (ft, fv, fs) = fractions;
    if [ft, fv, fs].iter().any(|f| !(0.0..=1.0).contains(f)) || (ft + fv + fs - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "split fractions must be in [0,1] and sum to 1, got {fractions:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SplitIndices::default();
    for class in UavClass::ALL {
        let mut idx: Vec<usize> = trajectories
            .iter()
            .enumerate()
            .filter(|(_, t)| t.class == class)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            continue;
        }
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_train = (ft * n as f64).round() as usize;
        let n_val = ((fv * n as f64).round() as usize).min(n - n_train.min(n));
        let n_test = n.saturating_sub(n_train + n_val);
        if n_train == 0 || n_val == 0 || n_test == 0 {
            return Err(Error::invalid(format!(
                "{class}: {n} trajectories give an empty split ({n_train}/{n_val}/{n_test})"
            )));
        }
        out.train.extend_from_slice(&idx[..n_train]);
        out.val.extend_from_slice(&idx[n_train..n_train + n_val]);
        out.test.extend_from_slice(&idx[n_train + n_val..]);
    }
    out.train.sort_unstable();
    out.val.sort_unstable();
    out.test.sort_unstable();
    if out.train.is_empty() {
        return Err(Error::Empty("dataset to split"));
    }
    Ok(out)
}

/// Number of trajectories of each class among `indices`.
pub fn class_counts(trajectories: &[Trajectory], indices: &[usize]) -> [usize; NUM_CLASSES] {
    let mut counts = [0; NUM_CLASSES];
    for &i in indices {
        counts[trajectories[i].class.id()] += 1;
    }
    counts
}
