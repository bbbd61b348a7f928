use std::fs;

use proptest::prelude::*;

use pirnn_uav::dataset::io::dataset_hash;
use pirnn_uav::dataset::{
    build_dataset, load_dataset, read_trajectory_file, save_dataset, write_trajectory_file, NormStats,
    ObservedTrajectory,
};
use pirnn_uav::models::{FleetParams, Scenario, ScenarioKind, UavClass};
use pirnn_uav::pirnn::{load_checkpoint, load_standard, save_checkpoint, Architecture, NetworkParams};
use pirnn_uav::Error;

fn small_dataset(seed: u64) -> pirnn_uav::dataset::Dataset {
    let mut ds = build_dataset(5, 0.5, 0.01, seed, &FleetParams::default()).unwrap();
    ds.partition((0.6, 0.2, 0.2), seed).unwrap();
    ds
}

#[test]
fn dataset_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let ds = small_dataset(3);
    save_dataset(&ds, dir.path()).unwrap();
    let back = load_dataset(dir.path()).unwrap();
    assert_eq!(back, ds);
    assert_eq!(back.trajectories.len(), 15);
    assert!(back.trajectories.iter().all(|t| t.len() == 51));
}

#[test]
fn dataset_generation_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    save_dataset(&small_dataset(9), a.path()).unwrap();
    save_dataset(&small_dataset(9), b.path()).unwrap();
    assert_eq!(dataset_hash(a.path()).unwrap(), dataset_hash(b.path()).unwrap());
    let c = tempfile::tempdir().unwrap();
    save_dataset(&small_dataset(10), c.path()).unwrap();
    assert_ne!(dataset_hash(a.path()).unwrap(), dataset_hash(c.path()).unwrap());
}

#[test]
fn dataset_corruption_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&small_dataset(4), dir.path()).unwrap();
    let states = dir.path().join("states.bin");
    let bytes = fs::read(&states).unwrap();

    let mut flipped = bytes.clone();
    flipped[17] ^= 0x40;
    fs::write(&states, &flipped).unwrap();
    assert!(matches!(load_dataset(dir.path()), Err(Error::HashMismatch { .. })));

    fs::write(&states, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(load_dataset(dir.path()), Err(Error::TruncatedFile { .. })));

    fs::write(&states, &bytes).unwrap();
    assert!(load_dataset(dir.path()).is_ok());

    let manifest = dir.path().join("manifest.json");
    let text = fs::read_to_string(&manifest).unwrap();
    fs::write(&manifest, text.replacen("\"version\": 1", "\"version\": 2", 1)).unwrap();
    assert!(matches!(
        load_dataset(dir.path()),
        Err(Error::VersionMismatch { expected: 1, found: 2 })
    ));
}

#[test]
fn trajectory_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = small_dataset(5);
    let obs = ObservedTrajectory::from(&ds.trajectories[7]);
    let path = dir.path().join("t.bin");
    write_trajectory_file(&path, &obs).unwrap();
    assert_eq!(read_trajectory_file(&path).unwrap(), obs);

    let mut unlabeled = obs.clone();
    unlabeled.label = None;
    unlabeled.scenario = None;
    write_trajectory_file(&path, &unlabeled).unwrap();
    assert_eq!(read_trajectory_file(&path).unwrap(), unlabeled);

    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..100]).unwrap();
    assert!(matches!(read_trajectory_file(&path), Err(Error::TruncatedFile { .. })));
}

#[test]
fn checkpoint_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = NetworkParams::init(Architecture::with_hidden(64), 2).unwrap();
    save_checkpoint(&p, &NormStats::identity(), dir.path()).unwrap();
    assert!(matches!(load_standard(dir.path()), Err(Error::ShapeMismatch { .. })));
    assert_eq!(load_checkpoint(dir.path()).unwrap().params.tensors(), p.tensors());

    assert!(matches!(
        load_checkpoint(&dir.path().join("missing")),
        Err(Error::Io(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn checkpoint_round_trip_is_bitwise(seed in any::<u64>(), hidden in 12usize..40, mean in -5.0..5.0f64, spread in 0.1..9.0f64) {
        let dir = tempfile::tempdir().unwrap();
        let mut p = NetworkParams::init(Architecture::with_hidden(hidden), seed).unwrap();
        p.tensors_mut()[1][0] = -0.0;
        let norm = NormStats { mean_x: [mean; 12], std_x: [spread; 12], mean_y: [-mean; 12], std_y: [spread * 0.3; 12] };
        save_checkpoint(&p, &norm, dir.path()).unwrap();
        let m = load_checkpoint(dir.path()).unwrap();
        for (a, b) in m.params.tensors().iter().zip(p.tensors()) {
            prop_assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        prop_assert_eq!(m.norm, norm);
    }

    #[test]
    fn trajectory_file_round_trip_arbitrary(
        rows in prop::collection::vec(prop::array::uniform12(any::<f64>().prop_filter("finite", |v| v.is_finite())), 1..20),
        class in 0usize..3,
        seed in any::<u64>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let obs = ObservedTrajectory {
            label: Some(UavClass::ALL[class]),
            scenario: Some(Scenario::new(ScenarioKind::Yaw, seed)),
            dt: 0.01,
            derivs: rows.iter().rev().cloned().collect(),
            controls: rows.iter().map(|r| [r[0], r[1], r[2], r[3]]).collect(),
            states: rows,
        };
        let path = dir.path().join("t.bin");
        write_trajectory_file(&path, &obs).unwrap();
        prop_assert_eq!(read_trajectory_file(&path).unwrap(), obs);
    }
}
