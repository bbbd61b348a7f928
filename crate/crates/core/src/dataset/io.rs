//! On-disk formats.
//!
//! # Dataset directory
//!
//! ```text
//! manifest.json   structured metadata (format version 1)
//! states.bin      f64 LE, row-major, total_samples x 12
//! derivs.bin      f64 LE, row-major, total_samples x 12
//! controls.bin    f64 LE, row-major, total_samples x 4
//! labels.bin      i64 LE, one class id per trajectory
//! ```
//!
//! Trajectories are concatenated in manifest order; each manifest entry
//! records its sample count. The manifest also carries byte lengths and
//! SHA-256 digests of the four binary files.
//!
//! # Single trajectory file
//!
//! ```text
//! offset  type      field
//! 0       [u8; 8]   magic "PIRNNTRJ"
//! 8       u32 LE    version (1)
//! 12      u32 LE    reserved (0)
//! 16      i64 LE    class id, -1 when unlabeled
//! 24      i64 LE    scenario kind index, -1 when unknown
//! 32      u64 LE    scenario seed
//! 40      f64 LE    scenario amplitude scale
//! 48      u64 LE    sample count n
//! 56      f64 LE    dt
//! 64      f64 LE    states   n x 12
//!         f64 LE    derivs   n x 12
//!         f64 LE    controls n x 4
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::split::{Split, SplitIndices};
use crate::dataset::{Dataset, DatasetInfo, NormStats, Partition};
use crate::dynamics::Vec12;
use crate::error::{Error, Result};
use crate::models::{ControlVector, Scenario, ScenarioKind, UavClass, NUM_CLASSES};
use crate::trajectory::Trajectory;

pub const DATASET_FORMAT: &str = "pirnn-uav-dataset";
pub const DATASET_VERSION: u32 = 1;
pub const TRAJECTORY_MAGIC: &[u8; 8] = b"PIRNNTRJ";
pub const TRAJECTORY_VERSION: u32 = 1;

const FILES: [&str; 4] = ["states.bin", "derivs.bin", "controls.bin", "labels.bin"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FileEntry {
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrajectoryEntry {
    class: UavClass,
    scenario: Scenario,
    samples: usize,
    split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SplitEntry {
    fractions: (f64, f64, f64),
    seed: u64,
    norm: NormStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    info: DatasetInfo,
    class_counts: [usize; NUM_CLASSES],
    total_samples: usize,
    split: Option<SplitEntry>,
    trajectories: Vec<TrajectoryEntry>,
    files: BTreeMap<String, FileEntry>,
}

pub(crate) fn push_f64s(buf: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn read_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect()
}

fn rows<const N: usize>(flat: &[f64]) -> Vec<[f64; N]> {
    flat.chunks_exact(N)
        .map(|c| c.try_into().expect("chunk of N"))
        .collect()
}

pub(crate) fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let total = ds.total_samples();
    let mut states = Vec::with_capacity(total * 12 * 8);
    let mut derivs = Vec::with_capacity(total * 12 * 8);
    let mut controls = Vec::with_capacity(total * 4 * 8);
    let mut labels = Vec::with_capacity(ds.trajectories.len() * 8);
    for t in &ds.trajectories {
        if !t.is_consistent() {
            return Err(Error::invalid("cannot save an inconsistent trajectory"));
        }
        t.states.iter().for_each(|r| push_f64s(&mut states, r));
        t.derivs.iter().for_each(|r| push_f64s(&mut derivs, r));
        t.controls.iter().for_each(|r| push_f64s(&mut controls, r));
        labels.extend_from_slice(&(t.class.id() as i64).to_le_bytes());
    }

    let assignment = ds
        .partition
        .as_ref()
        .map(|p| p.indices.assignment(ds.trajectories.len()));
    let mut files = BTreeMap::new();
    for (name, bytes) in FILES.iter().zip([&states, &derivs, &controls, &labels]) {
        fs::write(dir.join(name), bytes)?;
        files.insert(
            name.to_string(),
            FileEntry {
                bytes: bytes.len() as u64,
                sha256: digest(bytes),
            },
        );
    }

    let manifest = Manifest {
        format: DATASET_FORMAT.to_string(),
        version: DATASET_VERSION,
        info: ds.info.clone(),
        class_counts: ds.class_counts(),
        total_samples: total,
        split: ds.partition.as_ref().map(|p| SplitEntry {
            fractions: p.fractions,
            seed: p.seed,
            norm: p.norm.clone(),
        }),
        trajectories: ds
            .trajectories
            .iter()
            .enumerate()
            .map(|(i, t)| TrajectoryEntry {
                class: t.class,
                scenario: t.scenario,
                samples: t.len(),
                split: assignment.as_ref().and_then(|a| a[i]),
            })
            .collect(),
        files,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

fn read_checked(dir: &Path, name: &str, entry: Option<&FileEntry>) -> Result<Vec<u8>> {
    let path = dir.join(name);
    let entry = entry.ok_or_else(|| Error::invalid(format!("manifest lists no {name}")))?;
    let bytes = fs::read(&path)?;
    if (bytes.len() as u64) < entry.bytes {
        return Err(Error::TruncatedFile {
            path,
            expected: entry.bytes,
            found: bytes.len() as u64,
        });
    }
    if bytes.len() as u64 != entry.bytes || digest(&bytes) != entry.sha256 {
        return Err(Error::HashMismatch { path });
    }
    Ok(bytes)
}

fn check_version(value: &serde_json::Value, expected: u32) -> Result<()> {
    let found = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::invalid("manifest has no version"))?;
    if found != expected as u64 {
        return Err(Error::VersionMismatch {
            expected,
            found: found.min(u32::MAX as u64) as u32,
        });
    }
    Ok(())
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(dir.join("manifest.json"))?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    check_version(&raw, DATASET_VERSION)?;
    let manifest: Manifest = serde_json::from_value(raw)?;
    if manifest.format != DATASET_FORMAT {
        return Err(Error::invalid(format!("not a dataset manifest: {}", manifest.format)));
    }

    let load = |name: &str| read_checked(dir, name, manifest.files.get(name));
    let states = read_f64s(&load("states.bin")?);
    let derivs = read_f64s(&load("derivs.bin")?);
    let controls = read_f64s(&load("controls.bin")?);
    let labels: Vec<i64> = load("labels.bin")?
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();

    let total = manifest.total_samples;
    let listed: usize = manifest.trajectories.iter().map(|t| t.samples).sum();
    if listed != total
        || states.len() != total * 12
        || derivs.len() != total * 12
        || controls.len() != total * 4
        || labels.len() != manifest.trajectories.len()
    {
        return Err(Error::shape(
            format!("{total} samples over {} trajectories", manifest.trajectories.len()),
            format!("{} state rows, {} labels", states.len() / 12, labels.len()),
        ));
    }

    let mut offset = 0;
    let mut trajectories = Vec::with_capacity(manifest.trajectories.len());
    for (entry, &label) in manifest.trajectories.iter().zip(&labels) {
        if label != entry.class.id() as i64 {
            return Err(Error::invalid(format!("label {label} disagrees with manifest class {}", entry.class)));
        }
        let n = entry.samples;
        trajectories.push(Trajectory {
            class: entry.class,
            scenario: entry.scenario,
            dt: manifest.info.dt,
            states: rows(&states[offset * 12..(offset + n) * 12]),
            derivs: rows(&derivs[offset * 12..(offset + n) * 12]),
            controls: rows(&controls[offset * 4..(offset + n) * 4]),
        });
        offset += n;
    }

    let partition = manifest.split.map(|s| {
        let assignment: Vec<Option<Split>> = manifest.trajectories.iter().map(|t| t.split).collect();
        Partition {
            fractions: s.fractions,
            seed: s.seed,
            indices: SplitIndices::from_assignment(&assignment),
            norm: s.norm,
        }
    });

    Ok(Dataset {
        info: manifest.info,
        trajectories,
        partition,
    })
}

/// SHA-256 of a saved dataset's manifest; the manifest embeds the digests of all
/// array files, so this identifies the whole dataset.
pub fn dataset_hash(dir: &Path) -> Result<String> {
    Ok(digest(&fs::read(dir.join("manifest.json"))?))
}

/// A trajectory as observed by the classifier, label optional.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedTrajectory {
    pub label: Option<UavClass>,
    pub scenario: Option<Scenario>,
    pub dt: f64,
    pub states: Vec<Vec12>,
    pub derivs: Vec<Vec12>,
    pub controls: Vec<ControlVector>,
}

impl From<&Trajectory> for ObservedTrajectory {
    fn from(t: &Trajectory) -> Self {
        Self {
            label: Some(t.class),
            scenario: Some(t.scenario),
            dt: t.dt,
            states: t.states.clone(),
            derivs: t.derivs.clone(),
            controls: t.controls.clone(),
        }
    }
}

fn kind_from_index(i: i64) -> Option<ScenarioKind> {
    use ScenarioKind::*;
    [Hover, Cruise, Climb, Roll, Pitch, Yaw, Disturbed, Failure]
        .into_iter()
        .find(|k| k.index() == i)
}

pub fn write_trajectory_file(path: &Path, obs: &ObservedTrajectory) -> Result<()> {
    let n = obs.states.len();
    if obs.derivs.len() != n || obs.controls.len() != n {
        return Err(Error::shape(format!("{n} rows in every block"), "ragged trajectory"));
    }
    let mut buf = Vec::with_capacity(64 + n * 28 * 8);
    buf.extend_from_slice(TRAJECTORY_MAGIC);
    buf.extend_from_slice(&TRAJECTORY_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&obs.label.map_or(-1, |c| c.id() as i64).to_le_bytes());
    buf.extend_from_slice(&obs.scenario.map_or(-1, |s| s.kind.index()).to_le_bytes());
    buf.extend_from_slice(&obs.scenario.map_or(0, |s| s.seed).to_le_bytes());
    buf.extend_from_slice(&obs.scenario.map_or(1.0, |s| s.scale).to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&obs.dt.to_le_bytes());
    obs.states.iter().for_each(|r| push_f64s(&mut buf, r));
    obs.derivs.iter().for_each(|r| push_f64s(&mut buf, r));
    obs.controls.iter().for_each(|r| push_f64s(&mut buf, r));
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_trajectory_file(path: &Path) -> Result<ObservedTrajectory> {
    let bytes = fs::read(path)?;
    let truncated = |expected: usize| Error::TruncatedFile {
        path: PathBuf::from(path),
        expected: expected as u64,
        found: bytes.len() as u64,
    };
    if bytes.len() < 64 {
        return Err(truncated(64));
    }
    if &bytes[..8] != TRAJECTORY_MAGIC {
        return Err(Error::invalid(format!("{} is not a trajectory file", path.display())));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let i64_at = |o: usize| i64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(8);
    if version != TRAJECTORY_VERSION {
        return Err(Error::VersionMismatch {
            expected: TRAJECTORY_VERSION,
            found: version,
        });
    }
    let label = match i64_at(16) {
        -1 => None,
        id if id >= 0 => Some(UavClass::from_id(id as usize)?),
        id => return Err(Error::invalid(format!("bad class id {id}"))),
    };
    let scenario = kind_from_index(i64_at(24)).map(|kind| Scenario {
        kind,
        seed: i64_at(32) as u64,
        scale: f64_at(40),
        failure: None,
    });
    let n = i64_at(48) as u64 as usize;
    let dt = f64_at(56);
    let expected = n
        .checked_mul(28 * 8)
        .and_then(|b| b.checked_add(64))
        .ok_or_else(|| Error::invalid("sample count overflows"))?;
    if bytes.len() < expected {
        return Err(truncated(expected));
    }
    let body = read_f64s(&bytes[64..expected]);
    Ok(ObservedTrajectory {
        label,
        scenario,
        dt,
        states: rows(&body[..n * 12]),
        derivs: rows(&body[n * 12..n * 24]),
        controls: rows(&body[n * 24..]),
    })
}
