//! Flies every maneuver of every class once and prints where each ends up.
//!
//! ```text
//! cargo run --release --example simulate_uavs -- [duration_s] [seed]
//! ```

use pirnn_uav::models::{simulate_trajectory, FleetParams, Perturbation, Scenario, ScenarioKind, UavClass};

fn main() -> pirnn_uav::Result<()> {
    let mut args = std::env::args().skip(1);
    let duration: f64 = args.next().map_or(5.0, |a| a.parse().expect("duration in seconds"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("integer seed"));
    let params = FleetParams::default();

    println!("{:<11} {:<10} {:>6} {:>28} {:>10}", "class", "maneuver", "steps", "final position", "max |xdot|");
    for class in UavClass::ALL {
        for kind in ScenarioKind::for_class(class) {
            let traj = simulate_trajectory(
                class,
                &params,
                &Scenario::sampled(kind, seed),
                duration,
                0.01,
                Perturbation::default(),
            )?;
            let last = traj.states.last().expect("non-empty trajectory");
            // fixed-wing states lead with body velocities, rotorcraft with position
            let pos = match class {
                UavClass::FixedWing => [last[9], last[10], last[11]],
                _ => [last[0], last[1], last[2]],
            };
            let peak = traj.derivs.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            println!(
                "{:<11} {:<10} {:>6} {:>8.2} {:>8.2} {:>8.2}  {:>10.3}",
                class.name(),
                format!("{kind:?}"),
                traj.steps(),
                pos[0],
                pos[1],
                pos[2],
                peak
            );
        }
    }
    Ok(())
}
