use nalgebra::{Quaternion, SVector, UnitQuaternion, Vector3};

/// Packed `[r, v, q (w, i, j, k), omega]`.
pub type Packed = SVector<f64, 13>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorState {
    /// World-frame position, m (z up).
    pub position: Vector3<f64>,
    /// World-frame velocity, m/s.
    pub velocity: Vector3<f64>,
    /// Body-to-world rotation.
    pub attitude: UnitQuaternion<f64>,
    /// Body rates `[p, q, r]`, rad/s.
    pub rates: Vector3<f64>,
}

impl QuadrotorState {
    /// Level and at rest at `position`.
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            attitude: UnitQuaternion::identity(),
            rates: Vector3::zeros(),
        }
    }

    /// Z-Y-X Euler angles `(phi, theta, psi)`.
    pub fn euler(&self) -> (f64, f64, f64) {
        self.attitude.euler_angles()
    }

    pub fn pack(&self) -> Packed {
        let q = self.attitude.quaternion();
        let mut x = Packed::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.position);
        x.fixed_rows_mut::<3>(3).copy_from(&self.velocity);
        x[6] = q.w;
        x[7] = q.i;
        x[8] = q.j;
        x[9] = q.k;
        x.fixed_rows_mut::<3>(10).copy_from(&self.rates);
        x
    }

    /// Unpacks and renormalises the quaternion.
    pub(crate) fn unpack(x: &Packed) -> Self {
        Self {
            position: x.fixed_rows::<3>(0).into(),
            velocity: x.fixed_rows::<3>(3).into(),
            attitude: UnitQuaternion::from_quaternion(Quaternion::new(x[6], x[7], x[8], x[9])),
            rates: x.fixed_rows::<3>(10).into(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pack().iter().all(|v| v.is_finite())
    }
}
