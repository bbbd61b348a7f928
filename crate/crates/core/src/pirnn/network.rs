//! Residual tanh MLP with fixed skip-mix coefficients.
//!
//! ```text
//! h1 = tanh(W1 in + b1)
//! h2 = tanh(W2 h1 + b2) + h1
//! h3 = tanh(W3 h2 + b3) + 0.7 h2 + 0.3 h1
//! h4 = tanh(W4 h3 + b4) + h3
//! h5 = tanh(W5 h4 + b5) + 0.6 h4 + 0.4 h1
//! y  = Wout h5 + bout + 0.5 h5[..12] + 0.3 h3[..12] + 0.2 h1[..12]
//! ```
//!
//! The hidden vectors are wider than the output, so the output skips use their
//! first `OUTPUT_DIM` components.

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::Vec12;
use crate::error::{Error, Result};
use crate::models::{UavClass, NUM_CLASSES};

pub const STATE_DIM: usize = 12;
pub const INPUT_DIM: usize = STATE_DIM + NUM_CLASSES;
pub const OUTPUT_DIM: usize = 12;
pub const HIDDEN_WIDTH: usize = 128;
pub const DEPTH: usize = 5;

static REVISION: AtomicU64 = AtomicU64::new(1);

fn next_revision() -> u64 {
    REVISION.fetch_add(1, Ordering::Relaxed)
}

/// Layer sizes. Depth is fixed at five hidden layers by the skip pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input: usize,
    pub hidden: usize,
    pub depth: usize,
    pub output: usize,
}

impl Architecture {
    pub const fn standard() -> Self {
        Self::with_hidden(HIDDEN_WIDTH)
    }

    pub const fn with_hidden(hidden: usize) -> Self {
        Self {
            input: INPUT_DIM,
            hidden,
            depth: DEPTH,
            output: OUTPUT_DIM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth != DEPTH || self.input != INPUT_DIM || self.output != OUTPUT_DIM {
            return Err(Error::shape(Architecture::standard().describe(), self.describe()));
        }
        if self.hidden < self.output {
            return Err(Error::invalid(format!(
                "hidden width {} is narrower than the output skips ({})",
                self.hidden, self.output
            )));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        format!("{}->{}x{}->{}", self.input, self.hidden, self.depth, self.output)
    }

    pub fn parameter_count(&self) -> usize {
        let first = self.hidden * self.input + self.hidden;
        let middle = (self.depth - 1) * (self.hidden * self.hidden + self.hidden);
        first + middle + self.output * self.hidden + self.output
    }
}

/// Skip-mix coefficients. These are constants of the architecture, not trained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipMix {
    /// h2 += a * h1
    pub h2_h1: f64,
    /// h3 += a * h2 + b * h1
    pub h3_h2: f64,
    pub h3_h1: f64,
    /// h4 += a * h3
    pub h4_h3: f64,
    /// h5 += a * h4 + b * h1
    pub h5_h4: f64,
    pub h5_h1: f64,
    /// y += a * h5 + b * h3 + c * h1 (first OUTPUT_DIM components)
    pub out_h5: f64,
    pub out_h3: f64,
    pub out_h1: f64,
}

impl Default for SkipMix {
    fn default() -> Self {
        Self {
            h2_h1: 1.0,
            h3_h2: 0.7,
            h3_h1: 0.3,
            h4_h3: 1.0,
            h5_h4: 0.6,
            h5_h1: 0.4,
            out_h5: 0.5,
            out_h3: 0.3,
            out_h1: 0.2,
        }
    }
}

/// Fully connected layer, `weight` is `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    fn apply(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut a = x.dot(&self.weight.t());
        a += &self.bias;
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub hidden: Vec<Dense>,
    pub output: Dense,
    pub skips: SkipMix,
    revision: u64,
}

/// Gradients with the same layout as [`NetworkParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradients {
    pub hidden: Vec<Dense>,
    pub output: Dense,
}

/// Activations recorded by [`NetworkParams::forward_batch`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Array2<f64>,
    /// Pre-skip tanh outputs of each hidden layer.
    tanh: Vec<Array2<f64>>,
    /// Hidden vectors after the skip additions.
    hidden: Vec<Array2<f64>>,
    revision: u64,
}

impl ForwardCache {
    pub fn rows(&self) -> usize {
        self.input.nrows()
    }

    pub fn tanh_activations(&self) -> &[Array2<f64>] {
        &self.tanh
    }
}

impl NetworkParams {
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let mut hidden = vec![Dense::zeros(arch.input, arch.hidden)];
        hidden.extend((1..arch.depth).map(|_| Dense::zeros(arch.hidden, arch.hidden)));
        Ok(Self {
            hidden,
            output: Dense::zeros(arch.hidden, arch.output),
            skips: SkipMix::default(),
            revision: next_revision(),
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in params.hidden.iter_mut().chain(std::iter::once(&mut params.output)) {
            let (fan_out, fan_in) = layer.weight.dim();
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            layer.weight.mapv_inplace(|_| rng.gen_range(-limit..limit));
        }
        Ok(params)
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input: self.hidden[0].weight.ncols(),
            hidden: self.hidden[0].weight.nrows(),
            depth: self.hidden.len(),
            output: self.output.weight.nrows(),
        }
    }

    fn layers(&self) -> impl Iterator<Item = &Dense> {
        self.hidden.iter().chain(std::iter::once(&self.output))
    }

    /// Every weight and bias as flat slices, in checkpoint order:
    /// `W1, b1, ..., W5, b5, Wout, bout`, weights row-major.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers()
            .flat_map(|l| {
                [
                    l.weight.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    /// Mutable view of every tensor. Invalidates existing forward caches.
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.revision = next_revision();
        self.hidden
            .iter_mut()
            .chain(std::iter::once(&mut self.output))
            .flat_map(|l| {
                [
                    l.weight.as_slice_mut().expect("standard layout"),
                    l.bias.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Forward pass over a batch (`rows x 15`), returning outputs (`rows x 12`)
    /// and the activations needed by [`NetworkParams::backward`].
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
        let arch = self.architecture();
        if input.ncols() != arch.input {
            return Err(Error::shape(
                format!("{} input columns", arch.input),
                format!("{}", input.ncols()),
            ));
        }
        let k = &self.skips;
        let mut tanh = Vec::with_capacity(DEPTH);
        let mut hidden: Vec<Array2<f64>> = Vec::with_capacity(DEPTH);

        for (i, layer) in self.hidden.iter().enumerate() {
            let prev = if i == 0 { input.view() } else { hidden[i - 1].view() };
            let mut t = layer.apply(&prev);
            t.mapv_inplace(f64::tanh);
            let mut h = t.clone();
            match i {
                0 => {}
                1 => h.scaled_add(k.h2_h1, &hidden[0]),
                2 => {
                    h.scaled_add(k.h3_h2, &hidden[1]);
                    h.scaled_add(k.h3_h1, &hidden[0]);
                }
                3 => h.scaled_add(k.h4_h3, &hidden[2]),
                4 => {
                    h.scaled_add(k.h5_h4, &hidden[3]);
                    h.scaled_add(k.h5_h1, &hidden[0]);
                }
                _ => unreachable!("depth is validated"),
            }
            tanh.push(t);
            hidden.push(h);
        }

        let out_dim = arch.output;
        let mut out = self.output.apply(&hidden[4].view());
        out.scaled_add(k.out_h5, &hidden[4].slice(s![.., ..out_dim]));
        out.scaled_add(k.out_h3, &hidden[2].slice(s![.., ..out_dim]));
        out.scaled_add(k.out_h1, &hidden[0].slice(s![.., ..out_dim]));

        Ok((
            out,
            ForwardCache {
                input: input.to_owned(),
                tanh,
                hidden,
                revision: self.revision,
            },
        ))
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<Vec12> {
        let view = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|_| Error::shape(INPUT_DIM, input.len()))?;
        let (out, _) = self.forward_batch(view)?;
        let mut y = [0.0; OUTPUT_DIM];
        y.iter_mut().zip(out.iter()).for_each(|(d, s)| *d = *s);
        Ok(y)
    }

    /// Reverse-mode gradients of a scalar loss given `upstream = dL/dy` (`rows x 12`).
    pub fn backward(&self, cache: &ForwardCache, upstream: ArrayView2<f64>) -> Result<ParamGradients> {
        if cache.revision != self.revision {
            return Err(Error::StaleCache("parameters changed since the forward pass"));
        }
        let arch = self.architecture();
        if upstream.dim() != (cache.rows(), arch.output) {
            return Err(Error::shape(
                format!("{}x{}", cache.rows(), arch.output),
                format!("{}x{}", upstream.nrows(), upstream.ncols()),
            ));
        }
        let k = &self.skips;
        let out_dim = arch.output;
        let h = &cache.hidden;

        let out_grad = Dense {
            weight: upstream.t().dot(&h[4]),
            bias: upstream.sum_axis(Axis(0)),
        };

        // dL/dh_i accumulated from every consumer of h_i
        let mut dh: Vec<Array2<f64>> = h.iter().map(|m| Array2::zeros(m.raw_dim())).collect();
        dh[4] = upstream.dot(&self.output.weight);
        dh[4].slice_mut(s![.., ..out_dim]).scaled_add(k.out_h5, &upstream);
        dh[2].slice_mut(s![.., ..out_dim]).scaled_add(k.out_h3, &upstream);
        dh[0].slice_mut(s![.., ..out_dim]).scaled_add(k.out_h1, &upstream);

        let mut grads: Vec<Option<Dense>> = vec![None; DEPTH];
        for i in (0..DEPTH).rev() {
            let g = std::mem::take(&mut dh[i]);
            // through tanh: d(pre) = dh * (1 - t^2)
            let mut da = cache.tanh[i].mapv(|t| 1.0 - t * t);
            da *= &g;
            let prev = if i == 0 { cache.input.view() } else { h[i - 1].view() };
            grads[i] = Some(Dense {
                weight: da.t().dot(&prev),
                bias: da.sum_axis(Axis(0)),
            });
            if i == 0 {
                break;
            }
            dh[i - 1] += &da.dot(&self.hidden[i].weight);
            match i {
                1 => dh[0].scaled_add(k.h2_h1, &g),
                2 => {
                    dh[1].scaled_add(k.h3_h2, &g);
                    dh[0].scaled_add(k.h3_h1, &g);
                }
                3 => dh[2].scaled_add(k.h4_h3, &g),
                4 => {
                    dh[3].scaled_add(k.h5_h4, &g);
                    dh[0].scaled_add(k.h5_h1, &g);
                }
                _ => unreachable!(),
            }
        }

        Ok(ParamGradients {
            hidden: grads.into_iter().map(|g| g.expect("every layer visited")).collect(),
            output: out_grad,
        })
    }
}

impl ParamGradients {
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.hidden
            .iter()
            .chain(std::iter::once(&self.output))
            .flat_map(|l| {
                [
                    l.weight.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Network input: normalized state followed by the class one-hot.
pub fn encode_input(norm_state: &Vec12, class: UavClass) -> [f64; INPUT_DIM] {
    let mut x = [0.0; INPUT_DIM];
    x[..STATE_DIM].copy_from_slice(norm_state);
    x[STATE_DIM + class.id()] = 1.0;
    x
}

/// Stacks normalized states with a fixed class one-hot into a `rows x 15` matrix.
pub fn input_matrix(norm_states: &[Vec12], class: UavClass) -> Array2<f64> {
    let mut m = Array2::zeros((norm_states.len(), INPUT_DIM));
    for (mut row, x) in m.rows_mut().into_iter().zip(norm_states) {
        row.as_slice_mut()
            .expect("row-major")
            .copy_from_slice(&encode_input(x, class));
    }
    m
}
