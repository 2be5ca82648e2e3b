use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters. Defaults are the 0.54 kg test vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadrotorParams {
    /// kg
    pub mass: f64,
    /// Rotor arm length, m.
    pub arm_length: f64,
    /// Body-frame inertia tensor, kg m^2, row-major.
    pub inertia: [[f64; 3]; 3],
    /// m/s^2
    pub gravity: f64,
    /// Rotor drag moment per unit thrust, m (`M_i = kappa F_i`).
    pub drag_to_thrust: f64,
    /// Per-rotor thrust `[min, max]`, N. `None` means `[0, 3 m g / 4]`.
    pub thrust_limits: Option<[f64; 2]>,
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        Self {
            mass: 0.54,
            arm_length: 0.172,
            inertia: [[3e-3, 0.0, 3.06e-5], [0.0, 2.784e-3, 0.0], [3.06e-5, 0.0, 4.4856e-3]],
            gravity: 9.81,
            drag_to_thrust: 0.02,
            thrust_limits: None,
        }
    }
}

impl QuadrotorParams {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.inertia[r][c])
    }

    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }

    pub fn rotor_limits(&self) -> [f64; 2] {
        self.thrust_limits.unwrap_or([0.0, 3.0 * self.hover_thrust() / 4.0])
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("arm_length", self.arm_length),
            ("gravity", self.gravity),
            ("drag_to_thrust", self.drag_to_thrust),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Argument(format!("{name} = {v} must be positive and finite")));
            }
        }
        let i = self.inertia_matrix();
        if i.iter().any(|x| !x.is_finite()) || (i - i.transpose()).abs().max() > 1e-15 {
            return Err(Error::Argument("inertia tensor must be finite and symmetric".into()));
        }
        if i.cholesky().is_none() {
            return Err(Error::Argument("inertia tensor must be positive definite".into()));
        }
        let [lo, hi] = self.rotor_limits();
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
            return Err(Error::Argument(format!("rotor thrust limits [{lo}, {hi}] are invalid")));
        }
        if 4.0 * hi < self.hover_thrust() {
            return Err(Error::Argument("rotor limits cannot sustain hover".into()));
        }
        Ok(())
    }
}
