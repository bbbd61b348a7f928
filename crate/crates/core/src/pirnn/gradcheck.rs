//! Central finite-difference check of [`NetworkParams::backward`].

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::pirnn::network::{Architecture, NetworkParams, INPUT_DIM, OUTPUT_DIM, STATE_DIM};

/// Agreement for one parameter tensor.
///
/// `rel_error` is `|a - n| / max(|a|, |n|)` over the whole tensor in the 2-norm.
/// A per-entry ratio is not used: forward-pass rounding puts ~1e-10 of absolute
/// noise on every central difference at step 1e-6, which is a large fraction of
/// the entries whose true gradient is tiny.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub entries: usize,
    pub rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub seed: u64,
    pub tensors: Vec<TensorCheck>,
}

impl GradCheck {
    pub fn max_rel_error(&self) -> f64 {
        self.tensors.iter().fold(0.0, |m, t| m.max(t.rel_error))
    }
}

fn tensor_names(depth: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=depth)
        .flat_map(|k| [format!("W{k}"), format!("b{k}")])
        .collect();
    names.push("W_out".into());
    names.push("b_out".into());
    names
}

/// `0.5 * sum((out - target)^2)` and its gradient with respect to `out`.
fn loss(params: &NetworkParams, x: &Array2<f64>, target: &Array2<f64>) -> Result<f64> {
    let (out, _) = params.forward_batch(x.view())?;
    Ok(0.5 * (&out - target).mapv(|v| v * v).sum())
}

/// Compares analytic gradients with central differences for a random network of
/// the given width on a random batch. Every parameter entry is perturbed.
pub fn check_gradients(hidden: usize, batch: usize, step: f64, seed: u64) -> Result<GradCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = NetworkParams::init(Architecture::with_hidden(hidden), seed)?;
    // nonzero biases so their paths are exercised too
    for t in params.tensors_mut() {
        for v in t.iter_mut() {
            *v += rng.gen_range(-0.1..0.1);
        }
    }
    let x = Array2::from_shape_fn((batch, INPUT_DIM), |(r, c)| {
        if c < STATE_DIM {
            rng.gen_range(-1.5..1.5)
        } else if c - STATE_DIM == r % 3 {
            1.0
        } else {
            0.0
        }
    });
    let (out, cache) = params.forward_batch(x.view())?;
    // Targets sit a small random residual away from the output. A loss of O(10)
    // changes by ~1e-9 under the step, where its own rounding is a few 1e-14 and
    // would show up as ~1e-5 relative error. Near the output the loss is ~1e-3
    // and the difference is exact to well below the tolerance.
    let residual = Array2::from_shape_fn((batch, OUTPUT_DIM), |_| rng.gen_range(-0.05..0.05));
    let target = &out - &residual;
    let upstream = &out - &target;
    let analytic = params.backward(&cache, upstream.view())?;
    let analytic: Vec<Vec<f64>> = analytic.tensors().iter().map(|t| t.to_vec()).collect();

    let names = tensor_names(params.hidden.len());
    let mut tensors = Vec::with_capacity(names.len());
    for (ti, name) in names.into_iter().enumerate() {
        let len = analytic[ti].len();
        let (mut diff2, mut a2, mut n2, mut worst) = (0.0, 0.0, 0.0, 0.0f64);
        for j in 0..len {
            let orig = params.tensors()[ti][j];
            params.tensors_mut()[ti][j] = orig + step;
            let plus = loss(&params, &x, &target)?;
            params.tensors_mut()[ti][j] = orig - step;
            let minus = loss(&params, &x, &target)?;
            params.tensors_mut()[ti][j] = orig;
            let numeric = (plus - minus) / (2.0 * step);
            let a = analytic[ti][j];
            diff2 += (a - numeric).powi(2);
            a2 += a * a;
            n2 += numeric * numeric;
            worst = worst.max((a - numeric).abs());
        }
        let norm = a2.max(n2).sqrt();
        tensors.push(TensorCheck {
            name,
            entries: len,
            rel_error: if norm > 0.0 { diff2.sqrt() / norm } else { 0.0 },
            max_abs_error: worst,
        });
    }
    Ok(GradCheck { seed, tensors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_network_passes() {
        for seed in 0..5 {
            let r = check_gradients(16, 6, 1e-6, seed).unwrap();
            assert!(r.max_rel_error() < 1e-5, "{r:?}");
            assert!(r.tensors.iter().all(|t| t.max_abs_error < 1e-8), "{r:?}");
        }
    }
}
