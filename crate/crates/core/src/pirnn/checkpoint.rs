//! Checkpoint directory layout.
//!
//! ```text
//! checkpoint.json   header: format, version, architecture, skip mix,
//!                   normalization stats, parameter count, params.bin digest
//! params.bin        f64 LE, concatenated in this order:
//!                   W1 (hidden x 15, row-major), b1 (hidden),
//!                   W2..W5 (hidden x hidden, row-major) each followed by its bias,
//!                   Wout (12 x hidden, row-major), bout (12)
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::io::{digest, push_f64s, read_f64s};
use crate::dataset::NormStats;
use crate::error::{Error, Result};
use crate::pirnn::network::{Architecture, NetworkParams, SkipMix};
use crate::pirnn::Model;

pub const CHECKPOINT_FORMAT: &str = "pirnn-uav-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER: &str = "checkpoint.json";
const BLOB: &str = "params.bin";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    architecture: Architecture,
    skips: SkipMix,
    norm: NormStats,
    parameter_count: usize,
    sha256: String,
}

pub fn save_checkpoint(params: &NetworkParams, norm: &NormStats, dir: &Path) -> Result<()> {
    if !params.is_finite() {
        return Err(Error::NonFinite("network parameters"));
    }
    fs::create_dir_all(dir)?;
    let tensors = params.tensors();
    let count: usize = tensors.iter().map(|t| t.len()).sum();
    let mut blob = Vec::with_capacity(count * 8);
    for t in tensors {
        push_f64s(&mut blob, t);
    }
    let header = Header {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        architecture: params.architecture(),
        skips: params.skips,
        norm: norm.clone(),
        parameter_count: count,
        sha256: digest(&blob),
    };
    fs::write(dir.join(BLOB), &blob)?;
    fs::write(dir.join(HEADER), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

/// Loads a checkpoint whose architecture must equal `expected`.
pub fn load_checkpoint_as(dir: &Path, expected: Architecture) -> Result<Model> {
    let model = load_checkpoint(dir)?;
    let found = model.params.architecture();
    if found != expected {
        return Err(Error::shape(expected.describe(), found.describe()));
    }
    Ok(model)
}

/// Loads a checkpoint of the standard architecture.
pub fn load_standard(dir: &Path) -> Result<Model> {
    load_checkpoint_as(dir, Architecture::standard())
}

/// Loads a checkpoint of whatever architecture its header declares.
pub fn load_checkpoint(dir: &Path) -> Result<Model> {
    let text = fs::read_to_string(dir.join(HEADER))?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    let version = raw
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::MalformedCheckpoint("header has no version".into()))?;
    if version != CHECKPOINT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            expected: CHECKPOINT_VERSION,
            found: version.min(u32::MAX as u64) as u32,
        });
    }
    for key in ["architecture", "norm", "skips", "sha256"] {
        if raw.get(key).is_none_or(|v| v.is_null()) {
            return Err(Error::MalformedCheckpoint(format!("header is missing `{key}`")));
        }
    }
    let header: Header =
        serde_json::from_value(raw).map_err(|e| Error::MalformedCheckpoint(e.to_string()))?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(Error::MalformedCheckpoint(format!("unexpected format {}", header.format)));
    }
    if !header.norm.is_valid() {
        return Err(Error::MalformedCheckpoint("normalization stats are not finite and positive".into()));
    }

    let mut params = NetworkParams::zeros(header.architecture)?;
    params.skips = header.skips;
    let expected_count = header.architecture.parameter_count();
    if header.parameter_count != expected_count {
        return Err(Error::shape(expected_count, header.parameter_count));
    }

    let path = dir.join(BLOB);
    let bytes = fs::read(&path)?;
    let want = expected_count as u64 * 8;
    if (bytes.len() as u64) < want {
        return Err(Error::TruncatedFile {
            path,
            expected: want,
            found: bytes.len() as u64,
        });
    }
    if bytes.len() as u64 != want || digest(&bytes) != header.sha256 {
        return Err(Error::HashMismatch { path });
    }
    let values = read_f64s(&bytes);
    let mut offset = 0;
    for t in params.tensors_mut() {
        t.copy_from_slice(&values[offset..offset + t.len()]);
        offset += t.len();
    }
    if !params.is_finite() {
        return Err(Error::NonFinite("checkpoint parameters"));
    }
    Ok(Model {
        params,
        norm: header.norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm() -> NormStats {
        NormStats {
            mean_x: [0.5; 12],
            std_x: [2.0; 12],
            mean_y: [-1.0; 12],
            std_y: [0.25; 12],
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let p = NetworkParams::init(Architecture::standard(), 17).unwrap();
        save_checkpoint(&p, &norm(), dir.path()).unwrap();
        let m = load_standard(dir.path()).unwrap();
        assert_eq!(m.params.tensors(), p.tensors());
        assert_eq!(m.params.skips, p.skips);
        assert_eq!(m.norm, norm());
    }

    #[test]
    fn narrower_checkpoint_rejected_by_standard_loader() {
        let dir = tempfile::tempdir().unwrap();
        let p = NetworkParams::init(Architecture::with_hidden(64), 1).unwrap();
        save_checkpoint(&p, &norm(), dir.path()).unwrap();
        assert!(matches!(load_standard(dir.path()), Err(Error::ShapeMismatch { .. })));
        assert!(load_checkpoint(dir.path()).is_ok());
    }

    #[test]
    fn missing_norm_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = NetworkParams::init(Architecture::with_hidden(16), 1).unwrap();
        save_checkpoint(&p, &norm(), dir.path()).unwrap();
        let path = dir.path().join(HEADER);
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("norm");
        fs::write(&path, v.to_string()).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(Error::MalformedCheckpoint(_))));
    }

    #[test]
    fn corruption_and_version_detected() {
        let dir = tempfile::tempdir().unwrap();
        let p = NetworkParams::init(Architecture::with_hidden(16), 1).unwrap();
        save_checkpoint(&p, &norm(), dir.path()).unwrap();
        let blob = dir.path().join(BLOB);
        let mut bytes = fs::read(&blob).unwrap();
        bytes[100] ^= 1;
        fs::write(&blob, &bytes).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(Error::HashMismatch { .. })));
        fs::write(&blob, &bytes[..64]).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(Error::TruncatedFile { .. })));

        let path = dir.path().join(HEADER);
        let text = fs::read_to_string(&path).unwrap().replace("\"version\": 1", "\"version\": 9");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            load_checkpoint(dir.path()),
            Err(Error::VersionMismatch { expected: 1, found: 9 })
        ));
    }
}
