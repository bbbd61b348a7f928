//! Compares backpropagated gradients with central differences, tensor by tensor.
//!
//! ```text
//! cargo run --release --example gradient_check -- [hidden] [seeds]
//! ```

use pirnn_uav::pirnn::check_gradients;

fn main() -> pirnn_uav::Result<()> {
    let mut args = std::env::args().skip(1);
    let hidden: usize = args.next().map_or(24, |a| a.parse().expect("hidden width"));
    let seeds: u64 = args.next().map_or(5, |a| a.parse().expect("seed count"));

    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let check = check_gradients(hidden, 4, 1e-6, seed)?;
        println!("seed {seed}");
        for t in &check.tensors {
            println!(
                "  {:<6} {:>6} entries  rel error {:.2e}  max abs error {:.2e}",
                t.name, t.entries, t.rel_error, t.max_abs_error
            );
        }
        worst = worst.max(check.max_rel_error());
    }
    println!("worst relative error {worst:.2e}");
    Ok(())
}
