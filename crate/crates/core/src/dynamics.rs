//! Shared rigid-body kinematics and the fixed-step RK4 integrator.
//!
//! Rotations are composed as `R = Rx(phi) * Ry(theta) * Rz(psi)`. The
//! fixed-wing gravity projection in [`crate::models::fixed_wing`] uses its own
//! closed form and the two conventions are deliberately left unreconciled.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;
/// Full 12-dimensional state or state derivative. Ordering depends on the vehicle class.
pub type Vec12 = [f64; 12];

/// Pitch may not come closer than this to +-pi/2.
pub const GIMBAL_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.theta.is_finite() && self.psi.is_finite()
    }
}

pub fn rot_x(phi: f64) -> Mat3 {
    let (s, c) = phi.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(psi: f64) -> Mat3 {
    let (s, c) = psi.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Body-to-inertial rotation `Rx(phi) * Ry(theta) * Rz(psi)`.
pub fn rotation_matrix(angles: EulerAngles) -> Result<Mat3> {
    if !angles.is_finite() {
        return Err(Error::invalid("rotation_matrix: non-finite Euler angle"));
    }
    Ok(rot_x(angles.phi) * rot_y(angles.theta) * rot_z(angles.psi))
}

/// Maps body rates `(p, q, r)` to Euler angle rates.
pub fn euler_rate_transform(phi: f64, theta: f64) -> Result<Mat3> {
    if !phi.is_finite() || !theta.is_finite() {
        return Err(Error::invalid("euler_rate_transform: non-finite angle"));
    }
    if theta.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_GUARD {
        return Err(Error::GimbalSingularity { theta: theta.abs() });
    }
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let tt = st / ct;
    Ok(Mat3::new(
        1.0,
        sp * tt,
        cp * tt,
        0.0,
        cp,
        -sp,
        0.0,
        sp / ct,
        cp / ct,
    ))
}

/// One classic fourth-order Runge-Kutta step with the control held constant.
///
/// A non-finite derivative at any stage aborts with
/// [`Error::IntegrationDiverged`] naming the stage (1 to 4).
pub fn rk4_step<C, F>(deriv_fn: F, state: &Vec12, control: &C, dt: f64) -> Result<Vec12>
where
    F: Fn(&Vec12, &C) -> Result<Vec12>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("rk4_step: dt must be positive, got {dt}")));
    }
    let stage = |x: &Vec12, idx: usize| -> Result<Vec12> {
        let d = deriv_fn(x, control)?;
        if d.iter().all(|v| v.is_finite()) {
            Ok(d)
        } else {
            Err(Error::IntegrationDiverged { stage: idx })
        }
    };
    let offset = |k: &Vec12, h: f64| -> Vec12 {
        let mut out = *state;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += h * ki;
        }
        out
    };

    let k1 = stage(state, 1)?;
    let k2 = stage(&offset(&k1, 0.5 * dt), 2)?;
    let k3 = stage(&offset(&k2, 0.5 * dt), 3)?;
    let k4 = stage(&offset(&k3, dt), 4)?;

    let mut next = *state;
    for i in 0..12 {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn scalar(f: impl Fn(f64) -> f64) -> impl Fn(&Vec12, &()) -> Result<Vec12> {
        move |x, _| {
            let mut d = [0.0; 12];
            d[0] = f(x[0]);
            Ok(d)
        }
    }

    #[test]
    fn identity_at_zero() {
        let r = rotation_matrix(EulerAngles::default()).unwrap();
        assert_eq!(r, Mat3::identity());
        assert_eq!(euler_rate_transform(0.0, 0.0).unwrap(), Mat3::identity());
    }

    #[test]
    fn quarter_roll() {
        let r = rotation_matrix(EulerAngles::new(FRAC_PI_2, 0.0, 0.0)).unwrap();
        let want = Mat3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert!((r - want).abs().max() < 1e-15);
    }

    #[test]
    fn rejects_nan_angles() {
        assert!(matches!(
            rotation_matrix(EulerAngles::new(f64::NAN, 0.0, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn gimbal_guard() {
        assert!(matches!(
            euler_rate_transform(0.0, FRAC_PI_2),
            Err(Error::GimbalSingularity { .. })
        ));
        assert!(euler_rate_transform(0.0, FRAC_PI_2 - 2e-6).is_ok());
    }

    #[test]
    fn euler_rate_entry() {
        let w = euler_rate_transform(FRAC_PI_6, FRAC_PI_6).unwrap();
        // sin(pi/6) * tan(pi/6) = 0.5 / sqrt(3)
        assert!((w[(0, 1)] - 0.288_675_134_594_812_9).abs() < 1e-15);
        assert!((w[(2, 2)] - 1.0).abs() < 1e-15); // cos/cos at equal angles
    }

    #[test]
    fn rk4_exponential_decay() {
        let mut x = [0.0; 12];
        x[0] = 1.0;
        let next = rk4_step(scalar(|v| -v), &x, &(), 0.1).unwrap();
        assert!((next[0] - (-0.1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn rk4_exact_cases() {
        let mut x = [0.0; 12];
        x[0] = 3.25;
        let next = rk4_step(scalar(|_| 0.0), &x, &(), 0.37).unwrap();
        assert_eq!(next, x);

        let next = rk4_step(scalar(|_| 1.0), &[0.0; 12], &(), 0.5).unwrap();
        assert_eq!(next[0], 0.5);
    }

    #[test]
    fn rk4_reports_diverged_stage() {
        // finite at x=0 but NaN after the first half step
        let f = |x: &Vec12, _: &()| -> Result<Vec12> {
            let mut d = [0.0; 12];
            d[0] = if x[0] == 0.0 { 1.0 } else { f64::NAN };
            Ok(d)
        };
        match rk4_step(f, &[0.0; 12], &(), 0.1) {
            Err(Error::IntegrationDiverged { stage }) => assert_eq!(stage, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rk4_rejects_bad_dt() {
        assert!(rk4_step(scalar(|v| v), &[0.0; 12], &(), 0.0).is_err());
    }
}
