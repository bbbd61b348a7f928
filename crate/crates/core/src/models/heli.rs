//! Single-rotor helicopter.
//!
//! Same state ordering and rigid-body equations as the quadcopter; only the
//! control allocation differs. Tail-rotor thrust and the horizontal component of
//! the main-rotor thrust are neglected for translation, so yaw equilibrium needs
//! no tail trim.

use crate::dynamics::Vec12;
use crate::error::{Error, Result};
use crate::models::params::HeliParams;
use crate::models::quad::rotorcraft_derivative;
use crate::models::ControlVector;

/// `(T_m, T_r, d_phi, d_theta)` to `(T_m, T_m l sin d_phi, T_m l sin d_theta, T_r d)`.
pub fn heli_control_map(raw: &ControlVector, p: &HeliParams) -> Result<[f64; 4]> {
    let [t_main, t_tail, d_phi, d_theta] = *raw;
    if !raw.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("helicopter control"));
    }
    if t_main < 0.0 || t_tail < 0.0 {
        return Err(Error::invalid(format!(
            "rotor thrust must be non-negative, got T_m={t_main}, T_r={t_tail}"
        )));
    }
    Ok([
        t_main,
        t_main * p.arm_length * d_phi.sin(),
        t_main * p.arm_length * d_theta.sin(),
        t_tail * p.rotor_distance,
    ])
}

pub fn heli_derivative(state: &Vec12, raw: &ControlVector, p: &HeliParams) -> Result<Vec12> {
    if !state.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("helicopter state"));
    }
    let u = heli_control_map(raw, p)?;
    rotorcraft_derivative(state, u, p.mass, p.g, p.inertia, p.k_drag_v, p.k_drag_w)
}
