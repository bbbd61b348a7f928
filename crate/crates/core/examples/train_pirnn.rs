//! Simulates a small fleet dataset, trains the network and scores the test split.
//!
//! ```text
//! cargo run --release --example train_pirnn -- [n_per_class] [epochs] [seed]
//! ```

use pirnn_uav::classify::{classify_all, Report, SoftmaxConfig};
use pirnn_uav::dataset::{build_dataset, Split, DEFAULT_FRACTIONS};
use pirnn_uav::models::FleetParams;
use pirnn_uav::training::{fit_dataset, TrainConfig};

fn main() -> pirnn_uav::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n_per_class = args.first().copied().unwrap_or(30) as usize;
    let epochs = args.get(1).copied().unwrap_or(10) as usize;
    let seed = args.get(2).copied().unwrap_or(7);

    let mut ds = build_dataset(n_per_class, 10.0, 0.01, seed, &FleetParams::default())?;
    ds.partition(DEFAULT_FRACTIONS, seed)?;
    println!("{} trajectories, {} samples", ds.trajectories.len(), ds.total_samples());

    let cfg = TrainConfig {
        epochs,
        seed,
        ..Default::default()
    };
    let (model, log) = fit_dataset(&ds, &cfg)?;
    println!("best epoch {} of {}, val loss {:.4e}", log.best_epoch, log.len(), log.best_val_loss().unwrap_or(f64::NAN));

    let test = ds.split(Split::Test)?;
    let results = classify_all(&model, &test, SoftmaxConfig::default())?;
    for r in &results {
        println!("{}  losses {:.4?}", r.summary_line(), r.per_class_loss);
    }
    println!("\n{}", Report::from_results(&results)?.to_text());
    Ok(())
}
