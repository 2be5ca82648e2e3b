use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::params::QuadrotorParams;
use super::state::QuadrotorState;
use crate::error::{Error, Result};
use crate::tuner::GainSet;

/// Gains in N m/rad (`kp`) and N m s/rad (`kd`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeGains {
    pub kp: [f64; 3],
    pub kd: [f64; 3],
}

impl Default for AttitudeGains {
    fn default() -> Self {
        Self { kp: [200.0; 3], kd: [10.0; 3] }
    }
}

/// Desired Z-Y-X Euler angles and Euler-angle rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttitudeCommand {
    pub angles: Vector3<f64>,
    pub rates: Vector3<f64>,
}

const SINGULARITY_MARGIN: f64 = 0.1;

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI { PI } else { w }
}

/// Euler-angle rates from body rates for the Z-Y-X convention.
fn euler_rates(phi: f64, theta: f64, body: &Vector3<f64>) -> Vector3<f64> {
    let (sp, cp) = phi.sin_cos();
    let (p, q, r) = (body.x, body.y, body.z);
    let yaw_part = (q * sp + r * cp) / theta.cos();
    Vector3::new(p + yaw_part * theta.sin(), q * cp - r * sp, yaw_part)
}

/// Per-axis PD on Euler angle and Euler-rate errors, `M = Kp e + Kd e'`.
pub fn attitude_controller(
    state: &QuadrotorState,
    desired: &AttitudeCommand,
    gains: &AttitudeGains,
) -> Result<Vector3<f64>> {
    let (phi, theta, psi) = state.euler();
    if (theta.abs() - FRAC_PI_2).abs() < SINGULARITY_MARGIN {
        return Err(Error::Singularity { theta });
    }
    let angle_err = Vector3::new(
        desired.angles.x - phi,
        desired.angles.y - theta,
        wrap_angle(desired.angles.z - psi),
    );
    let rate_err = desired.rates - euler_rates(phi, theta, &state.rates);
    let kp = Vector3::from(gains.kp);
    let kd = Vector3::from(gains.kd);
    Ok(kp.component_mul(&angle_err) + kd.component_mul(&rate_err))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateralGains {
    /// 1/s^2
    pub kp: f64,
    /// 1/s
    pub kd: f64,
    /// Largest commanded roll/pitch, rad.
    pub tilt_cap: f64,
}

impl Default for LateralGains {
    fn default() -> Self {
        Self { kp: 25.0, kd: 10.0, tilt_cap: 0.5 }
    }
}

/// Horizontal reference with acceleration feedforward.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LateralReference {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub acceleration: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltCommand {
    pub phi: f64,
    pub theta: f64,
    /// Values before the tilt cap was applied.
    pub raw_phi: f64,
    pub raw_theta: f64,
    pub saturated: bool,
}

/// Nested PD on x-y mapped to roll/pitch through the small-angle hover relation.
pub fn position_controller(
    state: &QuadrotorState,
    reference: &LateralReference,
    gains: &LateralGains,
    gravity: f64,
) -> TiltCommand {
    let (_, _, psi) = state.euler();
    let axis = |k: usize| {
        reference.acceleration[k]
            + gains.kd * (reference.velocity[k] - state.velocity[k])
            + gains.kp * (reference.position[k] - state.position[k])
    };
    let (ax, ay) = (axis(0), axis(1));
    let (s, c) = psi.sin_cos();
    let raw_phi = (ax * s - ay * c) / gravity;
    let raw_theta = (ax * c + ay * s) / gravity;
    let cap = gains.tilt_cap;
    let phi = raw_phi.clamp(-cap, cap);
    let theta = raw_theta.clamp(-cap, cap);
    TiltCommand { phi, theta, raw_phi, raw_theta, saturated: phi != raw_phi || theta != raw_theta }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustCommand {
    pub total: f64,
    pub raw: f64,
    pub saturated: bool,
}

/// `F_total = m g + N1 ref - K1 z - K2 z'`, clamped to the summed rotor limits.
pub fn altitude_controller(gamma: [f64; 2], reference: f64, gains: &GainSet, params: &QuadrotorParams) -> ThrustCommand {
    let [z, zdot] = gamma;
    let raw = params.hover_thrust() + gains.n[0] * reference - gains.k[0] * z - gains.k[1] * zdot;
    let [lo, hi] = params.rotor_limits();
    let total = raw.clamp(4.0 * lo, 4.0 * hi);
    ThrustCommand { total, raw, saturated: total != raw }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorCommand {
    pub forces: [f64; 4],
    /// Unclamped allocation.
    pub raw: [f64; 4],
    pub saturated: bool,
}

/// Inverts the plus-configuration allocation
/// `[sum F; L (F2 - F4); L (F3 - F1); kappa (F1 - F2 + F3 - F4)] = [F_total; M]`.
pub fn mix_rotors(total: f64, moments: &Vector3<f64>, params: &QuadrotorParams) -> RotorCommand {
    let quarter = total / 4.0;
    let roll = moments.x / (2.0 * params.arm_length);
    let pitch = moments.y / (2.0 * params.arm_length);
    let yaw = moments.z / (4.0 * params.drag_to_thrust);
    let raw = [quarter - pitch + yaw, quarter + roll - yaw, quarter + pitch + yaw, quarter - roll - yaw];
    let [lo, hi] = params.rotor_limits();
    let forces = raw.map(|f| f.clamp(lo, hi));
    RotorCommand { forces, raw, saturated: forces != raw }
}
