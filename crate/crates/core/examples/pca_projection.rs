//! Projects the state samples of a small dataset onto their leading principal
//! components and prints per-class centroids in that plane.
//!
//! ```text
//! cargo run --release --example pca_projection -- [n_per_class] [csv_out]
//! ```

use pirnn_uav::classify::{projections_csv, Pca};
use pirnn_uav::dataset::{build_dataset, NormStats};
use pirnn_uav::models::{FleetParams, UavClass};

fn main() -> pirnn_uav::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10, |a| a.parse().expect("trajectories per class"));
    let csv_out = args.next();

    let ds = build_dataset(n, 5.0, 0.01, 11, &FleetParams::default())?;
    let norm = NormStats::fit(&ds.trajectories)?;
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for t in &ds.trajectories {
        for s in t.states.iter().step_by(10) {
            samples.push(norm.apply_x(s));
            labels.push(t.class.name());
        }
    }

    let pca = Pca::fit(&samples, 3)?;
    println!("explained variance {:.3?}", pca.explained_variance_ratio);
    let proj = pca.project(&samples);
    for class in UavClass::ALL {
        let pts: Vec<_> = proj.iter().zip(&labels).filter(|(_, l)| **l == class.name()).map(|(p, _)| p).collect();
        let c = |k: usize| pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64;
        println!("{:<11} centroid ({:>7.3}, {:>7.3}, {:>7.3})", class.name(), c(0), c(1), c(2));
    }

    if let Some(path) = csv_out {
        std::fs::write(&path, projections_csv(&labels, &proj))?;
        println!("wrote {path}");
    }
    Ok(())
}
