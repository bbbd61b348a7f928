use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dynamics::Vec12;
use crate::error::{Error, Result};

const DIM: usize = 12;

/// Principal axes of a 12-dimensional sample cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec12,
    /// Unit eigenvectors as rows, ordered by decreasing eigenvalue.
    pub components: Vec<Vec12>,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    /// Centers the samples and eigendecomposes their covariance; keeps `k` axes.
    /// Each axis is signed so that its first nonzero loading is positive.
    pub fn fit(samples: &[Vec12], k: usize) -> Result<Self> {
        if k == 0 || k > DIM {
            return Err(Error::invalid(format!("PCA dimension must be in 1..=12, got {k}")));
        }
        let n = samples.len();
        if n < 2 {
            return Err(Error::invalid(format!("PCA needs at least 2 samples, got {n}")));
        }
        let mut mean = [0.0; DIM];
        for s in samples {
            for i in 0..DIM {
                mean[i] += s[i];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);

        let mut cov = DMatrix::<f64>::zeros(DIM, DIM);
        for s in samples {
            let d: Vec12 = std::array::from_fn(|i| s[i] - mean[i]);
            for i in 0..DIM {
                for j in i..DIM {
                    cov[(i, j)] += d[i] * d[j];
                }
            }
        }
        for i in 0..DIM {
            for j in i..DIM {
                let v = cov[(i, j)] / (n - 1) as f64;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("PCA covariance"));
        }

        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..DIM).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();

        let mut components = Vec::with_capacity(k);
        let mut eigenvalues = Vec::with_capacity(k);
        let mut explained = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            let mut v: Vec12 = std::array::from_fn(|i| eig.eigenvectors[(i, idx)]);
            let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
                if first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            let lambda = eig.eigenvalues[idx].max(0.0);
            components.push(v);
            eigenvalues.push(lambda);
            explained.push(if total > 0.0 { lambda / total } else { 0.0 });
        }
        Ok(Self {
            mean,
            components,
            eigenvalues,
            explained_variance_ratio: explained,
        })
    }

    pub fn project_one(&self, s: &Vec12) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| (0..DIM).map(|i| c[i] * (s[i] - self.mean[i])).sum())
            .collect()
    }

    pub fn project(&self, samples: &[Vec12]) -> Vec<Vec<f64>> {
        samples.iter().map(|s| self.project_one(s)).collect()
    }

    /// Maps projected coordinates back to the original space.
    pub fn reconstruct(&self, z: &[f64]) -> Vec12 {
        let mut out = self.mean;
        for (c, w) in self.components.iter().zip(z) {
            for i in 0..DIM {
                out[i] += w * c[i];
            }
        }
        out
    }
}

/// Fits on `samples` and returns their projections with the explained-variance ratios.
pub fn pca_project(samples: &[Vec12], k: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let pca = Pca::fit(samples, k)?;
    Ok((pca.project(samples), pca.explained_variance_ratio))
}

/// CSV with columns `class,pc1..pck` for external plotting.
pub fn projections_csv(labels: &[&str], projections: &[Vec<f64>]) -> String {
    let k = projections.first().map_or(0, Vec::len);
    let mut s = String::from("class");
    for i in 1..=k {
        let _ = write!(s, ",pc{i}");
    }
    s.push('\n');
    for (label, p) in labels.iter().zip(projections) {
        s.push_str(label);
        for v in p {
            let _ = write!(s, ",{v:.9e}");
        }
        s.push('\n');
    }
    s
}
