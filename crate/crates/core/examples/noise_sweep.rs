//! Trains a quick model and measures test accuracy as sensor noise grows.
//!
//! ```text
//! cargo run --release --example noise_sweep -- [n_per_class] [epochs] [seed]
//! ```

use pirnn_uav::classify::{noise_sweep, SoftmaxConfig};
use pirnn_uav::dataset::{build_dataset, NoiseLevel, Split, DEFAULT_FRACTIONS, STANDARD_LEVELS};
use pirnn_uav::models::FleetParams;
use pirnn_uav::training::{fit_dataset, TrainConfig};

fn main() -> pirnn_uav::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(30) as usize;
    let epochs = args.get(1).copied().unwrap_or(15) as usize;
    let seed = args.get(2).copied().unwrap_or(7);

    let mut ds = build_dataset(n, 10.0, 0.01, seed, &FleetParams::default())?;
    ds.partition(DEFAULT_FRACTIONS, seed)?;
    let (model, _) = fit_dataset(&ds, &TrainConfig { epochs, seed, ..Default::default() })?;

    let mut levels = vec![NoiseLevel::new(0.0, 0.0)];
    levels.extend(STANDARD_LEVELS);
    let test = ds.split(Split::Test)?;
    println!("{:>8} {:>8} {:>9}  confusion", "state %", "deriv %", "accuracy");
    for row in noise_sweep(&model, &test, &levels, seed, SoftmaxConfig::default())? {
        println!(
            "{:>8} {:>8} {:>9.4}  {:?}",
            row.level.state_pct, row.level.deriv_pct, row.report.accuracy, row.report.confusion
        );
    }
    Ok(())
}
