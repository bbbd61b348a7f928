//! Fixed-wing aircraft with affine aerodynamic coefficients.
//!
//! State: `[u, v, w, p, q, r, phi, theta, psi, x, y, z]` with body-frame
//! velocities first and z pointing down in the body frame.
//! Control: `[throttle, aileron, elevator, rudder]`, throttle clamped to `[0, 1]`.

use std::f64::consts::PI;

use crate::dynamics::{euler_rate_transform, rotation_matrix, EulerAngles, Vec12, Vec3};
use crate::error::{Error, Result};
use crate::models::params::FixedWingParams;
use crate::models::ControlVector;

/// Airspeeds below this are treated as zero: alpha = beta = 0, no aerodynamic loads.
pub const MIN_AIRSPEED: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirData {
    pub airspeed: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Aerodynamic loads in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroLoads {
    pub lift: f64,
    pub drag: f64,
    pub side: f64,
    /// Body-axis force `(f_x, f_y, f_z)` from lift, drag and side force.
    pub force: [f64; 3],
    /// Roll, pitch, yaw moments.
    pub moment: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CruiseTrim {
    pub airspeed: f64,
    pub alpha: f64,
    pub elevator: f64,
    pub throttle: f64,
}

impl CruiseTrim {
    pub fn controls(&self) -> ControlVector {
        [self.throttle, 0.0, self.elevator, 0.0]
    }

    /// Level, wings-level state flying at the trim airspeed with pitch equal to alpha.
    pub fn state(&self) -> Vec12 {
        let mut s = [0.0; 12];
        s[0] = self.airspeed * self.alpha.cos();
        s[2] = self.airspeed * self.alpha.sin();
        s[7] = self.alpha;
        s
    }
}

pub fn air_data(u: f64, v: f64, w: f64) -> AirData {
    let airspeed = (u * u + v * v + w * w).sqrt();
    if airspeed < MIN_AIRSPEED {
        return AirData {
            airspeed,
            alpha: 0.0,
            beta: 0.0,
        };
    }
    AirData {
        airspeed,
        alpha: w.atan2(u),
        beta: (v / airspeed).clamp(-1.0, 1.0).asin(),
    }
}

pub fn aero_loads(air: &AirData, controls: &ControlVector, p: &FixedWingParams) -> AeroLoads {
    if air.airspeed < MIN_AIRSPEED {
        return AeroLoads {
            lift: 0.0,
            drag: 0.0,
            side: 0.0,
            force: [0.0; 3],
            moment: [0.0; 3],
        };
    }
    let [_, aileron, elevator, rudder] = *controls;
    let c = &p.aero;
    let (alpha, beta) = (air.alpha, air.beta);
    let qbar_s = 0.5 * p.rho * air.airspeed * air.airspeed * p.wing_area;

    let c_lift = c.cl0 + c.cl_alpha * alpha + c.cl_de * elevator;
    let c_drag = c.cd0 + c.cd_k * c_lift * c_lift + c.cd_de * elevator;
    let c_side = c.cy_beta * beta + c.cy_dr * rudder;
    let c_roll = c.croll_beta * beta + c.croll_da * aileron;
    let c_pitch = c.cm0 + c.cm_alpha * alpha + c.cm_de * elevator;
    let c_yaw = c.cn_beta * beta + c.cn_dr * rudder;

    let lift = qbar_s * c_lift;
    let drag = qbar_s * c_drag;
    let side = qbar_s * c_side;
    let (sa, ca) = alpha.sin_cos();
    AeroLoads {
        lift,
        drag,
        side,
        force: [-ca * drag + sa * lift, side, -sa * drag - ca * lift],
        moment: [
            qbar_s * p.wingspan * c_roll,
            qbar_s * p.chord * c_pitch,
            qbar_s * p.wingspan * c_yaw,
        ],
    }
}

fn prop_gain(p: &FixedWingParams) -> f64 {
    p.rho * p.prop_diameter.powi(4) / (4.0 * PI * PI) * p.c_thrust
}

/// Propeller thrust along body x for a throttle setting.
pub fn prop_thrust(throttle: f64, p: &FixedWingParams) -> f64 {
    let omega = throttle.clamp(0.0, 1.0) * p.omega_in;
    prop_gain(p) * omega * omega
}

pub fn fw_derivative(state: &Vec12, controls: &ControlVector, p: &FixedWingParams) -> Result<Vec12> {
    if !state.iter().all(|x| x.is_finite()) || !controls.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("fixed-wing state or control"));
    }
    let vel = Vec3::new(state[0], state[1], state[2]);
    let (p_rate, q_rate, r_rate) = (state[3], state[4], state[5]);
    let omega = Vec3::new(p_rate, q_rate, r_rate);
    let (phi, theta, psi) = (state[6], state[7], state[8]);

    let w_euler = euler_rate_transform(phi, theta)?;
    let r = rotation_matrix(EulerAngles::new(phi, theta, psi))?;

    let air = air_data(vel.x, vel.y, vel.z);
    let aero = aero_loads(&air, controls, p);
    let thrust = prop_thrust(controls[0], p);

    let mg = p.mass * p.g;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let gravity = Vec3::new(-st * mg, ct * sp * mg, ct * cp * mg);

    let force = Vec3::new(aero.force[0] + thrust, aero.force[1], aero.force[2]) + gravity;
    let coupling = Vec3::new(
        -q_rate * vel.z + r_rate * vel.y,
        -r_rate * vel.x + p_rate * vel.z,
        -p_rate * vel.y + q_rate * vel.x,
    );
    let v_dot = force / p.mass + coupling;

    let inertia = p.inertia;
    let i_omega = Vec3::new(inertia[0] * omega.x, inertia[1] * omega.y, inertia[2] * omega.z);
    let net = Vec3::from(aero.moment) - omega.cross(&i_omega);
    let omega_dot = Vec3::new(net.x / inertia[0], net.y / inertia[1], net.z / inertia[2]);

    let eta_dot = w_euler * omega;
    let pos_dot = r * vel;

    let d = [
        v_dot.x, v_dot.y, v_dot.z, omega_dot.x, omega_dot.y, omega_dot.z, eta_dot.x, eta_dot.y,
        eta_dot.z, pos_dot.x, pos_dot.y, pos_dot.z,
    ];
    if d.iter().all(|x| x.is_finite()) {
        Ok(d)
    } else {
        Err(Error::NonFinite("fixed-wing derivative"))
    }
}

/// Level cruise trim at `airspeed` with pitch equal to angle of attack.
///
/// Solves `L(a) + D(a) tan(a) = m g` by bisection, with the elevator set for
/// zero pitching moment and throttle for `T = D / cos(a)`.
pub fn cruise_trim(p: &FixedWingParams, airspeed: f64) -> Result<CruiseTrim> {
    if !(airspeed > 0.0) {
        return Err(Error::invalid("trim airspeed must be positive"));
    }
    let c = &p.aero;
    let elevator_for = |alpha: f64| -(c.cm0 + c.cm_alpha * alpha) / c.cm_de;
    let residual = |alpha: f64| {
        let air = AirData {
            airspeed,
            alpha,
            beta: 0.0,
        };
        let loads = aero_loads(&air, &[0.0, 0.0, elevator_for(alpha), 0.0], p);
        loads.lift + loads.drag * alpha.tan() - p.mass * p.g
    };

    let (mut lo, mut hi) = (-0.3, 0.5);
    if residual(lo) * residual(hi) > 0.0 {
        return Err(Error::invalid(format!(
            "no level trim at {airspeed} m/s within alpha in [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(lo) * residual(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let elevator = elevator_for(alpha);
    let air = AirData {
        airspeed,
        alpha,
        beta: 0.0,
    };
    let drag = aero_loads(&air, &[0.0, 0.0, elevator, 0.0], p).drag;
    let thrust = drag / alpha.cos();
    let throttle = (thrust / prop_gain(p)).sqrt() / p.omega_in;
    if !(0.0..=1.0).contains(&throttle) {
        return Err(Error::invalid(format!(
            "trim at {airspeed} m/s needs throttle {throttle}"
        )));
    }
    Ok(CruiseTrim {
        airspeed,
        alpha,
        elevator,
        throttle,
    })
}

/// Default cruise airspeed.
pub const CRUISE_AIRSPEED: f64 = 25.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gravity_only_at_rest() {
        let p = FixedWingParams::default();
        let d = fw_derivative(&[0.0; 12], &[0.0; 4], &p).unwrap();
        assert_eq!(&d[..3], &[0.0, 0.0, p.g]);
        assert!(d[3..].iter().all(|x| *x == 0.0));
    }

    #[test]
    fn pure_sideslip_angles() {
        let a = air_data(0.0, 2.0, 0.0);
        assert_eq!(a.airspeed, 2.0);
        assert!((a.beta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(a.alpha, 0.0);
    }

    #[test]
    fn cruise_trim_is_equilibrium() {
        let p = FixedWingParams::default();
        let trim = cruise_trim(&p, CRUISE_AIRSPEED).unwrap();
        assert!(trim.alpha > 0.0 && trim.alpha < 0.2, "{trim:?}");
        let d = fw_derivative(&trim.state(), &trim.controls(), &p).unwrap();
        let worst = d[..6].iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{d:?}");
        // level: no vertical speed, forward speed equals airspeed
        assert!((d[9] - CRUISE_AIRSPEED).abs() < 1e-9);
        assert!(d[11].abs() < 1e-9);
    }

    #[test]
    fn throttle_is_clamped() {
        let p = FixedWingParams::default();
        assert_eq!(prop_thrust(1.7, &p), prop_thrust(1.0, &p));
        assert_eq!(prop_thrust(-0.5, &p), 0.0);
    }
}
