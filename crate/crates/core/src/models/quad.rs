//! Quadcopter rigid-body dynamics.
//!
//! State: `[x, y, z, vx, vy, vz, phi, theta, psi, p, q, r]`, z up.
//! Control: motor speeds `w1..w4` in rad/s.

use crate::dynamics::{euler_rate_transform, rotation_matrix, EulerAngles, Vec12, Vec3};
use crate::error::{Error, Result};
use crate::models::params::QuadParams;
use crate::models::ControlVector;

/// Collective thrust and body torques `(u1, u2, u3, u4)` from motor speeds.
///
/// Rows of the mixer: `[1 1 1 1]`, `[0 -l 0 l]`, `[l 0 -l 0]`, `[0 0 0 0]`;
/// yaw enters only through the drag torques `t1 - t2 + t3 - t4`.
pub fn mixer(motors: &ControlVector, p: &QuadParams) -> [f64; 4] {
    let thrust = motors.map(|w| p.k_thrust * w * w);
    let drag = motors.map(|w| p.k_drag_torque * w * w);
    let l = p.arm_length;
    [
        thrust[0] + thrust[1] + thrust[2] + thrust[3],
        l * (thrust[3] - thrust[1]),
        l * (thrust[0] - thrust[2]),
        drag[0] - drag[1] + drag[2] - drag[3],
    ]
}

/// Rigid-body response shared by the quadcopter and the helicopter.
pub(crate) fn rotorcraft_derivative(
    state: &Vec12,
    u: [f64; 4],
    mass: f64,
    g: f64,
    inertia: [f64; 3],
    k_drag_v: f64,
    k_drag_w: f64,
) -> Result<Vec12> {
    let v = Vec3::new(state[3], state[4], state[5]);
    let (phi, theta, psi) = (state[6], state[7], state[8]);
    let omega = Vec3::new(state[9], state[10], state[11]);

    let r = rotation_matrix(EulerAngles::new(phi, theta, psi))?;
    let w = euler_rate_transform(phi, theta)?;

    let f_thrust = Vec3::new(0.0, 0.0, u[0]);
    let v_dot = (r * f_thrust - k_drag_v * v) / mass + Vec3::new(0.0, 0.0, -g);

    let i_omega = Vec3::new(inertia[0] * omega.x, inertia[1] * omega.y, inertia[2] * omega.z);
    let tau = Vec3::new(u[1], u[2], u[3]);
    let net = tau - k_drag_w * omega - omega.cross(&i_omega);
    let omega_dot = Vec3::new(net.x / inertia[0], net.y / inertia[1], net.z / inertia[2]);

    let eta_dot = w * omega;

    let d = [
        v.x, v.y, v.z, v_dot.x, v_dot.y, v_dot.z, eta_dot.x, eta_dot.y, eta_dot.z, omega_dot.x,
        omega_dot.y, omega_dot.z,
    ];
    if d.iter().all(|x| x.is_finite()) {
        Ok(d)
    } else {
        Err(Error::NonFinite("rotorcraft derivative"))
    }
}

pub fn quad_derivative(state: &Vec12, motors: &ControlVector, p: &QuadParams) -> Result<Vec12> {
    if !state.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("quadcopter state"));
    }
    let u = mixer(motors, p);
    rotorcraft_derivative(
        state,
        u,
        p.mass,
        p.g,
        p.inertia,
        p.k_drag_v,
        p.k_drag_w,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest() -> Vec12 {
        [0.0; 12]
    }

    #[test]
    fn hover_is_equilibrium() {
        let p = QuadParams::default();
        let w = p.hover_speed();
        let d = quad_derivative(&rest(), &[w; 4], &p).unwrap();
        assert!(d.iter().all(|x| x.abs() < 1e-12), "{d:?}");
    }

    #[test]
    fn motors_off_free_fall() {
        let p = QuadParams::default();
        let d = quad_derivative(&rest(), &[0.0; 4], &p).unwrap();
        assert_eq!(&d[3..6], &[0.0, 0.0, -p.g]);
        assert!(d[9..].iter().all(|x| *x == 0.0));
    }

    #[test]
    fn equal_speeds_give_pure_collective() {
        let p = QuadParams::default();
        let w = 250.0;
        let u = mixer(&[w; 4], &p);
        assert_eq!(&u[1..], &[0.0, 0.0, 0.0]);
        let d = quad_derivative(&rest(), &[w; 4], &p).unwrap();
        let want = 4.0 * p.k_thrust * w * w / p.mass - p.g;
        assert!((d[5] - want).abs() < 1e-12);
    }

    #[test]
    fn yaw_torque_sign() {
        let p = QuadParams::default();
        let h = p.hover_speed();
        // keep sum of squares constant
        let up = (h * h * 1.1).sqrt();
        let down = (h * h * 0.9).sqrt();
        let base = mixer(&[h; 4], &p);
        let u = mixer(&[up, down, up, down], &p);
        assert!(u[3] > 0.0);
        assert!((u[0] - base[0]).abs() < 1e-12);
    }

    #[test]
    fn gimbal_propagates() {
        let p = QuadParams::default();
        let mut s = rest();
        s[7] = std::f64::consts::FRAC_PI_2;
        assert!(matches!(
            quad_derivative(&s, &[0.0; 4], &p),
            Err(Error::GimbalSingularity { .. })
        ));
    }
}
