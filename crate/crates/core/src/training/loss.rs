//! Data, temporal-smoothness and hybrid losses, with gradients for backprop.

use ndarray::{s, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

fn check_same(yhat: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<()> {
    if yhat.dim() != y.dim() {
        return Err(Error::shape(format!("{:?}", y.dim()), format!("{:?}", yhat.dim())));
    }
    if yhat.nrows() == 0 {
        return Err(Error::Empty("loss input"));
    }
    Ok(())
}

/// Mean over rows of `||yhat_t - y_t||^2`.
pub fn data_loss(yhat: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    check_same(&yhat, &y)?;
    let sum: f64 = yhat
        .rows()
        .into_iter()
        .zip(y.rows())
        .map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
        .sum();
    Ok(sum / yhat.nrows() as f64)
}

/// Gradient of [`data_loss`] with respect to `yhat`.
pub fn data_loss_grad(yhat: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Array2<f64>> {
    check_same(&yhat, &y)?;
    let scale = 2.0 / yhat.nrows() as f64;
    Ok((&yhat - &y) * scale)
}

/// Mean over consecutive pairs of `||yhat_{t+1} - yhat_t||^2`. Rows must be
/// time-ordered samples of a single trajectory.
pub fn physics_loss(yhat: ArrayView2<f64>) -> Result<f64> {
    let t = yhat.nrows();
    if t < 2 {
        return Err(Error::invalid(format!("physics loss needs at least 2 time steps, got {t}")));
    }
    let diff = &yhat.slice(s![1.., ..]) - &yhat.slice(s![..t - 1, ..]);
    Ok(diff.mapv(|v| v * v).sum() / (t - 1) as f64)
}

/// Gradient of [`physics_loss`] with respect to `yhat`.
pub fn physics_loss_grad(yhat: ArrayView2<f64>) -> Result<Array2<f64>> {
    let t = yhat.nrows();
    if t < 2 {
        return Err(Error::invalid(format!("physics loss needs at least 2 time steps, got {t}")));
    }
    let scale = 2.0 / (t - 1) as f64;
    let diff = (&yhat.slice(s![1.., ..]) - &yhat.slice(s![..t - 1, ..])) * scale;
    let mut g = Array2::zeros(yhat.raw_dim());
    g.slice_mut(s![1.., ..]).scaled_add(1.0, &diff);
    g.slice_mut(s![..t - 1, ..]).scaled_add(-1.0, &diff);
    Ok(g)
}

/// Loss weights.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub data: f64,
    pub phys: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { data: 1.0, phys: 0.2 }
    }
}

/// `lambda_data * data_loss + lambda_phys * physics_loss` over one time-ordered sequence.
pub fn hybrid_loss(yhat: ArrayView2<f64>, y: ArrayView2<f64>, w: LossWeights) -> Result<f64> {
    let data = data_loss(yhat, y)?;
    if w.phys == 0.0 {
        return Ok(w.data * data);
    }
    Ok(w.data * data + w.phys * physics_loss(yhat)?)
}

/// Row-wise squared error, useful for per-sample accumulation.
pub fn squared_errors(yhat: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Vec<f64>> {
    check_same(&yhat, &y)?;
    Ok((&yhat - &y).mapv(|v| v * v).sum_axis(Axis(1)).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn data_loss_cases() {
        let y = Array2::zeros((1, 12));
        let mut yhat = Array2::zeros((1, 12));
        yhat[[0, 0]] = 1.0;
        yhat[[0, 1]] = 2.0;
        assert_eq!(data_loss(yhat.view(), y.view()).unwrap(), 5.0);
        assert_eq!(data_loss(y.view(), y.view()).unwrap(), 0.0);
        let doubled = &yhat * 2.0;
        assert_eq!(data_loss(doubled.view(), y.view()).unwrap(), 20.0);
        assert!(data_loss(yhat.view(), Array2::zeros((2, 12)).view()).is_err());
    }

    #[test]
    fn physics_loss_cases() {
        let seq = array![[0.0], [1.0], [3.0]];
        assert_eq!(physics_loss(seq.view()).unwrap(), 2.5);
        let rev = array![[3.0], [1.0], [0.0]];
        assert_eq!(physics_loss(rev.view()).unwrap(), 2.5);
        assert_eq!(physics_loss(Array2::from_elem((4, 3), 7.0).view()).unwrap(), 0.0);
        assert!(physics_loss(array![[1.0]].view()).is_err());
    }

    #[test]
    fn hybrid_cases() {
        // data 5, phys 2.5
        let yhat = array![[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]];
        let y = array![[0.0, 0.0], [1.0, 0.0], [3.0, 15f64.sqrt()]];
        let w = LossWeights::default();
        assert!((hybrid_loss(yhat.view(), y.view(), w).unwrap() - 5.5).abs() < 1e-12);
        let data_only = LossWeights { data: 1.0, phys: 0.0 };
        assert_eq!(
            hybrid_loss(yhat.view(), y.view(), data_only).unwrap(),
            data_loss(yhat.view(), y.view()).unwrap()
        );
    }

    #[test]
    fn gradients_match_differences() {
        let yhat = array![[0.3, -1.0], [1.2, 0.5], [2.0, 0.1], [-0.4, 0.9]];
        let y = array![[0.0, 1.0], [1.0, 0.0], [2.5, 0.3], [0.1, -0.2]];
        let gd = data_loss_grad(yhat.view(), y.view()).unwrap();
        let gp = physics_loss_grad(yhat.view()).unwrap();
        let h = 1e-6;
        for idx in [(0, 0), (1, 1), (2, 0), (3, 1)] {
            let mut p = yhat.clone();
            let mut m = yhat.clone();
            p[idx] += h;
            m[idx] -= h;
            let nd = (data_loss(p.view(), y.view()).unwrap() - data_loss(m.view(), y.view()).unwrap()) / (2.0 * h);
            let np = (physics_loss(p.view()).unwrap() - physics_loss(m.view()).unwrap()) / (2.0 * h);
            assert!((nd - gd[idx]).abs() < 1e-8);
            assert!((np - gp[idx]).abs() < 1e-8);
        }
    }
}
