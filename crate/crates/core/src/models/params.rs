//! Physical constants per vehicle class and their flat `name = value` file format.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Every key of the target struct must be present exactly once; unknown keys
//! are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const DEFAULT_QUAD: &str = include_str!("../../params/quadcopter.params");
pub const DEFAULT_FIXED_WING: &str = include_str!("../../params/fixed_wing.params");
pub const DEFAULT_HELI: &str = include_str!("../../params/helicopter.params");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadParams {
    pub mass: f64,
    pub g: f64,
    /// Diagonal inertia (Ixx, Iyy, Izz).
    pub inertia: [f64; 3],
    pub arm_length: f64,
    pub k_thrust: f64,
    pub k_drag_torque: f64,
    pub k_drag_v: f64,
    pub k_drag_w: f64,
}

/// Affine aerodynamic coefficient model.
///
/// `C_L = CL0 + CL_alpha a + CL_de de`, `C_D = CD0 + CD_k C_L^2 + CD_de de`,
/// `C_y = Cy_beta b + Cy_dr dr`, `C_l = Cl_beta b + Cl_da da`,
/// `C_m = Cm0 + Cm_alpha a + Cm_de de`, `C_n = Cn_beta b + Cn_dr dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeroCoefficients {
    pub cl0: f64,
    pub cl_alpha: f64,
    pub cl_de: f64,
    pub cd0: f64,
    pub cd_k: f64,
    pub cd_de: f64,
    pub cy_beta: f64,
    pub cy_dr: f64,
    pub croll_beta: f64,
    pub croll_da: f64,
    pub cm0: f64,
    pub cm_alpha: f64,
    pub cm_de: f64,
    pub cn_beta: f64,
    pub cn_dr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedWingParams {
    pub mass: f64,
    pub g: f64,
    pub inertia: [f64; 3],
    pub rho: f64,
    pub wing_area: f64,
    pub wingspan: f64,
    pub chord: f64,
    pub prop_diameter: f64,
    pub c_thrust: f64,
    /// Propeller speed at full throttle (rad/s).
    pub omega_in: f64,
    pub aero: AeroCoefficients,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeliParams {
    pub mass: f64,
    pub g: f64,
    pub inertia: [f64; 3],
    /// Horizontal offset of main-rotor thrust from the center of mass.
    pub arm_length: f64,
    /// Main-to-tail rotor distance.
    pub rotor_distance: f64,
    pub k_drag_v: f64,
    pub k_drag_w: f64,
}

/// Parameter sets for all three classes plus the hash of each source text.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetParams {
    pub quad: QuadParams,
    pub fixed_wing: FixedWingParams,
    pub heli: HeliParams,
    pub hashes: [String; 3],
}

struct KvFile {
    values: BTreeMap<String, (usize, f64)>,
}

impl KvFile {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ParamFile {
                line: line_no,
                message: format!("expected `name = value`, got {line:?}"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| Error::ParamFile {
                line: line_no,
                message: format!("value for {key} is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::ParamFile {
                    line: line_no,
                    message: format!("value for {key} is not finite"),
                });
            }
            if values.insert(key.to_string(), (line_no, value)).is_some() {
                return Err(Error::ParamFile {
                    line: line_no,
                    message: format!("duplicate key {key}"),
                });
            }
        }
        Ok(Self { values })
    }

    fn take(&mut self, key: &str) -> Result<f64> {
        self.values
            .remove(key)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::ParamFile {
                line: 0,
                message: format!("missing key {key}"),
            })
    }

    fn finish(self) -> Result<()> {
        match self.values.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::ParamFile {
                line,
                message: format!("unknown key {key}"),
            }),
        }
    }
}

fn require_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for (name, v) in pairs {
        if *v <= 0.0 {
            return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(())
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl QuadParams {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KvFile::parse(text)?;
        let p = Self {
            mass: kv.take("m")?,
            g: kv.take("g")?,
            inertia: [kv.take("Ixx")?, kv.take("Iyy")?, kv.take("Izz")?],
            arm_length: kv.take("l")?,
            k_thrust: kv.take("k_T")?,
            k_drag_torque: kv.take("k_D")?,
            k_drag_v: kv.take("k_drag_v")?,
            k_drag_w: kv.take("k_drag_w")?,
        };
        kv.finish()?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(&[
            ("m", self.mass),
            ("g", self.g),
            ("Ixx", self.inertia[0]),
            ("Iyy", self.inertia[1]),
            ("Izz", self.inertia[2]),
            ("l", self.arm_length),
            ("k_T", self.k_thrust),
            ("k_D", self.k_drag_torque),
            ("k_drag_v", self.k_drag_v),
            ("k_drag_w", self.k_drag_w),
        ])
    }

    /// Motor speed at which four equal rotors exactly carry the weight.
    pub fn hover_speed(&self) -> f64 {
        (self.mass * self.g / (4.0 * self.k_thrust)).sqrt()
    }
}

impl Default for QuadParams {
    fn default() -> Self {
        Self::parse(DEFAULT_QUAD).expect("bundled quadcopter parameters are valid")
    }
}

impl FixedWingParams {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KvFile::parse(text)?;
        let p = Self {
            mass: kv.take("m")?,
            g: kv.take("g")?,
            inertia: [kv.take("Ixx")?, kv.take("Iyy")?, kv.take("Izz")?],
            rho: kv.take("rho")?,
            wing_area: kv.take("S")?,
            wingspan: kv.take("b")?,
            chord: kv.take("c_chord")?,
            prop_diameter: kv.take("D")?,
            c_thrust: kv.take("C_t")?,
            omega_in: kv.take("omega_in")?,
            aero: AeroCoefficients {
                cl0: kv.take("CL0")?,
                cl_alpha: kv.take("CL_alpha")?,
                cl_de: kv.take("CL_de")?,
                cd0: kv.take("CD0")?,
                cd_k: kv.take("CD_k")?,
                cd_de: kv.take("CD_de")?,
                cy_beta: kv.take("Cy_beta")?,
                cy_dr: kv.take("Cy_dr")?,
                croll_beta: kv.take("Cl_beta")?,
                croll_da: kv.take("Cl_da")?,
                cm0: kv.take("Cm0")?,
                cm_alpha: kv.take("Cm_alpha")?,
                cm_de: kv.take("Cm_de")?,
                cn_beta: kv.take("Cn_beta")?,
                cn_dr: kv.take("Cn_dr")?,
            },
        };
        kv.finish()?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(&[
            ("m", self.mass),
            ("g", self.g),
            ("Ixx", self.inertia[0]),
            ("Iyy", self.inertia[1]),
            ("Izz", self.inertia[2]),
            ("rho", self.rho),
            ("S", self.wing_area),
            ("b", self.wingspan),
            ("c_chord", self.chord),
            ("D", self.prop_diameter),
            ("omega_in", self.omega_in),
        ])?;
        if self.aero.cd0 < 0.0 {
            return Err(Error::invalid("CD0 must be >= 0"));
        }
        Ok(())
    }
}

impl Default for FixedWingParams {
    fn default() -> Self {
        Self::parse(DEFAULT_FIXED_WING).expect("bundled fixed-wing parameters are valid")
    }
}

impl HeliParams {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KvFile::parse(text)?;
        let p = Self {
            mass: kv.take("m")?,
            g: kv.take("g")?,
            inertia: [kv.take("Ixx")?, kv.take("Iyy")?, kv.take("Izz")?],
            arm_length: kv.take("l")?,
            rotor_distance: kv.take("d")?,
            k_drag_v: kv.take("k_drag_v")?,
            k_drag_w: kv.take("k_drag_w")?,
        };
        kv.finish()?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(&[
            ("m", self.mass),
            ("g", self.g),
            ("Ixx", self.inertia[0]),
            ("Iyy", self.inertia[1]),
            ("Izz", self.inertia[2]),
            ("l", self.arm_length),
            ("d", self.rotor_distance),
            ("k_drag_v", self.k_drag_v),
            ("k_drag_w", self.k_drag_w),
        ])
    }
}

impl Default for HeliParams {
    fn default() -> Self {
        Self::parse(DEFAULT_HELI).expect("bundled helicopter parameters are valid")
    }
}

impl FleetParams {
    pub fn from_texts(quad: &str, fixed_wing: &str, heli: &str) -> Result<Self> {
        Ok(Self {
            quad: QuadParams::parse(quad)?,
            fixed_wing: FixedWingParams::parse(fixed_wing)?,
            heli: HeliParams::parse(heli)?,
            hashes: [text_hash(quad), text_hash(fixed_wing), text_hash(heli)],
        })
    }

    /// Loads `quadcopter.params`, `fixed_wing.params` and `helicopter.params` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| std::fs::read_to_string(dir.join(name));
        Self::from_texts(
            &read("quadcopter.params")?,
            &read("fixed_wing.params")?,
            &read("helicopter.params")?,
        )
    }
}

impl Default for FleetParams {
    fn default() -> Self {
        Self::from_texts(DEFAULT_QUAD, DEFAULT_FIXED_WING, DEFAULT_HELI)
            .expect("bundled parameter files are valid")
    }
}
