//! Trains a quick model, then classifies freshly simulated flights it has never
//! seen and shows the per-hypothesis losses behind each decision.
//!
//! ```text
//! cargo run --release --example classify_trajectory -- [epochs] [checkpoint_dir]
//! ```
//!
//! With a checkpoint directory the trained model is saved there, and reused on
//! the next run instead of training again.

use std::path::Path;

use pirnn_uav::classify::{classify, SoftmaxConfig};
use pirnn_uav::dataset::{build_dataset, DEFAULT_FRACTIONS};
use pirnn_uav::models::{simulate_trajectory, FleetParams, Perturbation, Scenario, ScenarioKind, UavClass};
use pirnn_uav::pirnn::{load_checkpoint, save_checkpoint, Model};
use pirnn_uav::training::{fit_dataset, TrainConfig};

fn model(epochs: usize, dir: Option<&Path>) -> pirnn_uav::Result<Model> {
    if let Some(d) = dir.filter(|d| d.join("checkpoint.json").is_file()) {
        println!("loading {}", d.display());
        return load_checkpoint(d);
    }
    let mut ds = build_dataset(30, 10.0, 0.01, 5, &FleetParams::default())?;
    ds.partition(DEFAULT_FRACTIONS, 5)?;
    let (model, log) = fit_dataset(&ds, &TrainConfig { epochs, seed: 5, ..Default::default() })?;
    println!("trained {} epochs", log.len());
    if let Some(d) = dir {
        save_checkpoint(&model.params, &model.norm, d)?;
    }
    Ok(model)
}

fn main() -> pirnn_uav::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map_or(15, |a| a.parse().expect("epoch count"));
    let dir = args.next();
    let model = model(epochs, dir.as_deref().map(Path::new))?;

    let params = FleetParams::default();
    let flights = [
        (UavClass::Quadcopter, ScenarioKind::Yaw),
        (UavClass::FixedWing, ScenarioKind::Climb),
        (UavClass::Helicopter, ScenarioKind::Hover),
        (UavClass::Helicopter, ScenarioKind::Disturbed),
    ];
    for (class, kind) in flights {
        let t = simulate_trajectory(class, &params, &Scenario::sampled(kind, 9001), 10.0, 0.01, Perturbation::default())?;
        // the label is only used for reporting, never for the decision
        let r = classify(&model, &t.states, &t.derivs, Some(class), SoftmaxConfig::default())?;
        println!("{kind:?} flight: {}", r.summary_line());
        println!("    losses {:.4?}", r.per_class_loss);
    }
    Ok(())
}
