use nalgebra::{Quaternion, Vector3};

use super::params::QuadrotorParams;
use super::state::{Packed, QuadrotorState};
use crate::error::{Error, Result};
use crate::rk4;

/// Total thrust and body moments `[L (F2 - F4), L (F3 - F1), kappa (F1 - F2 + F3 - F4)]`.
pub fn body_wrench(forces: &[f64; 4], params: &QuadrotorParams) -> (f64, Vector3<f64>) {
    let [f1, f2, f3, f4] = *forces;
    let l = params.arm_length;
    (
        f1 + f2 + f3 + f4,
        Vector3::new(l * (f2 - f4), l * (f3 - f1), params.drag_to_thrust * (f1 - f2 + f3 - f4)),
    )
}

struct RigidBody {
    mass: f64,
    gravity: f64,
    inertia: nalgebra::Matrix3<f64>,
    inertia_inv: nalgebra::Matrix3<f64>,
    thrust: f64,
    torque: Vector3<f64>,
}

impl RigidBody {
    fn derivative(&self, x: &Packed) -> Packed {
        let v: Vector3<f64> = x.fixed_rows::<3>(3).into();
        let q = Quaternion::new(x[6], x[7], x[8], x[9]);
        let w: Vector3<f64> = x.fixed_rows::<3>(10).into();
        // thrust direction R e3 from the (possibly unnormalised) quaternion
        let n2 = q.norm_squared();
        let (qw, qi, qj, qk) = (q.w, q.i, q.j, q.k);
        let body_z = Vector3::new(
            2.0 * (qi * qk + qw * qj),
            2.0 * (qj * qk - qw * qi),
            qw * qw - qi * qi - qj * qj + qk * qk,
        ) / n2;
        let accel = body_z * (self.thrust / self.mass) - Vector3::new(0.0, 0.0, self.gravity);
        let qdot = q * Quaternion::from_imag(w) * 0.5;
        let wdot = self.inertia_inv * (self.torque - w.cross(&(self.inertia * w)));
        let mut dx = Packed::zeros();
        dx.fixed_rows_mut::<3>(0).copy_from(&v);
        dx.fixed_rows_mut::<3>(3).copy_from(&accel);
        dx[6] = qdot.w;
        dx[7] = qdot.i;
        dx[8] = qdot.j;
        dx[9] = qdot.k;
        dx.fixed_rows_mut::<3>(10).copy_from(&wdot);
        dx
    }
}

/// One RK4 step of the Newton-Euler equations with rotor forces held
/// constant; the quaternion is renormalised afterwards.
pub fn dynamics_step(
    state: &QuadrotorState,
    forces: &[f64; 4],
    params: &QuadrotorParams,
    dt: f64,
) -> Result<QuadrotorState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Argument(format!("dt = {dt} must be positive")));
    }
    let inertia = params.inertia_matrix();
    let inertia_inv = inertia
        .try_inverse()
        .ok_or_else(|| Error::Argument("inertia tensor is singular".into()))?;
    let (thrust, torque) = body_wrench(forces, params);
    let body = RigidBody { mass: params.mass, gravity: params.gravity, inertia, inertia_inv, thrust, torque };
    let next = rk4::step(|_, x| body.derivative(x), 0.0, &state.pack(), dt);
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { step: None, time: f64::NAN });
    }
    Ok(QuadrotorState::unpack(&next))
}
