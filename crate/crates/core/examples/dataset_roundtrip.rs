//! Builds a small dataset, writes it to disk, reads it back and exports one
//! trajectory as a standalone file.
//!
//! ```text
//! cargo run --release --example dataset_roundtrip -- [out_dir]
//! ```

use std::path::PathBuf;

use pirnn_uav::dataset::{
    build_dataset, dataset_hash, load_dataset, read_trajectory_file, save_dataset, write_trajectory_file,
    ObservedTrajectory, Split, DEFAULT_FRACTIONS,
};
use pirnn_uav::models::FleetParams;

fn main() -> pirnn_uav::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("pirnn-uav-example"), PathBuf::from);

    let mut ds = build_dataset(10, 2.0, 0.01, 3, &FleetParams::default())?;
    ds.partition(DEFAULT_FRACTIONS, 3)?;
    save_dataset(&ds, &out)?;
    println!("wrote {} trajectories to {}", ds.trajectories.len(), out.display());
    println!("content hash {}", dataset_hash(&out)?);

    let back = load_dataset(&out)?;
    assert_eq!(back, ds);
    for split in [Split::Train, Split::Val, Split::Test] {
        println!("{:<5} {:>3} trajectories", split.name(), back.split(split)?.len());
    }

    let mut obs = ObservedTrajectory::from(&back.trajectories[0]);
    obs.label = None;
    let file = out.join("unlabeled.bin");
    write_trajectory_file(&file, &obs)?;
    let again = read_trajectory_file(&file)?;
    println!("{} samples in {}, label {:?}", again.states.len(), file.display(), again.label);
    Ok(())
}
