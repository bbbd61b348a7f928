use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias correction over a list of flat tensors.
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(cfg: AdamConfig, shapes: impl IntoIterator<Item = usize>) -> Self {
        let (m, v) = shapes.into_iter().map(|n| (vec![0.0; n], vec![0.0; n])).unzip();
        Self { cfg, t: 0, m, v }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One update `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: Vec<&mut [f64]>, grads: Vec<&[f64]>, lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape(self.m.len(), params.len().min(grads.len())));
        }
        self.t += 1;
        let AdamConfig { beta1, beta2, eps } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            if p.len() != m.len() || g.len() != m.len() {
                return Err(Error::shape(m.len(), p.len()));
            }
            for i in 0..m.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_unit_gradient() {
        let mut adam = Adam::new(AdamConfig::default(), [1]);
        let mut p = [0.5];
        adam.step(vec![&mut p], vec![&[1.0]], 1e-3).unwrap();
        let want = 0.5 - 1e-3 * (1.0 / (1.0 + 1e-8));
        assert!((p[0] - want).abs() < 1e-12);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn shape_checked() {
        let mut adam = Adam::new(AdamConfig::default(), [2]);
        let mut p = [0.0; 3];
        assert!(adam.step(vec![&mut p], vec![&[0.0; 3]], 1e-3).is_err());
    }
}
