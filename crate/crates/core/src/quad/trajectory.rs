use nalgebra::Vector3;

use crate::error::{ensure_finite, Error, Result};

/// Span of the rest-to-rest quintic, s.
pub const QUINTIC_DURATION: f64 = 4.0;
/// Slope of the straight-line velocity approximation over `[0, 2]` s, m/s^2.
pub const LINEAR_APPROX_SLOPE: f64 = 2.34375;

fn check_window(t: f64, hi: f64) -> Result<()> {
    ensure_finite("t", t)?;
    if !(0.0..=hi).contains(&t) {
        return Err(Error::Domain(format!("t = {t} s is outside [0, {hi}]")));
    }
    Ok(())
}

/// Position and velocity of `100 s^3 - 150 s^4 + 60 s^5`, `s = t / 4`.
pub fn quintic_reference(t: f64) -> Result<(f64, f64)> {
    check_window(t, QUINTIC_DURATION)?;
    let s = t / QUINTIC_DURATION;
    let pos = s * s * s * (100.0 + s * (-150.0 + 60.0 * s));
    let vel = s * s * (75.0 + s * (-150.0 + 75.0 * s));
    Ok((pos, vel))
}

pub fn quintic_acceleration(t: f64) -> Result<f64> {
    check_window(t, QUINTIC_DURATION)?;
    let s = t / QUINTIC_DURATION;
    Ok(s * (150.0 + s * (-450.0 + 300.0 * s)) / QUINTIC_DURATION)
}

/// `2.34375 t` on `[0, 2]`: the line from the origin to the quintic's peak velocity.
pub fn linear_velocity_approx(t: f64) -> Result<f64> {
    check_window(t, 2.0)?;
    Ok(LINEAR_APPROX_SLOPE * t)
}

/// Position/velocity/acceleration reference for the flight controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    /// Same quintic on all three axes.
    Quintic,
    /// Quintic on z only, x and y held at 0.
    QuinticAltitude,
    Hover { position: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        match self {
            Trajectory::Quintic | Trajectory::QuinticAltitude => QUINTIC_DURATION,
            Trajectory::Hover { .. } => f64::INFINITY,
        }
    }

    pub fn sample(&self, t: f64) -> Result<ReferenceSample> {
        match *self {
            Trajectory::Quintic => {
                let (p, v) = quintic_reference(t)?;
                let a = quintic_acceleration(t)?;
                Ok(ReferenceSample {
                    position: Vector3::repeat(p),
                    velocity: Vector3::repeat(v),
                    acceleration: Vector3::repeat(a),
                })
            }
            Trajectory::QuinticAltitude => {
                let (p, v) = quintic_reference(t)?;
                let a = quintic_acceleration(t)?;
                Ok(ReferenceSample {
                    position: Vector3::new(0.0, 0.0, p),
                    velocity: Vector3::new(0.0, 0.0, v),
                    acceleration: Vector3::new(0.0, 0.0, a),
                })
            }
            Trajectory::Hover { position } => {
                ensure_finite("t", t)?;
                Ok(ReferenceSample {
                    position: Vector3::from(position),
                    velocity: Vector3::zeros(),
                    acceleration: Vector3::zeros(),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_landmarks() {
        assert_eq!(quintic_reference(0.0).unwrap(), (0.0, 0.0));
        let (p, v) = quintic_reference(2.0).unwrap();
        assert_eq!(p, 5.0);
        assert_eq!(v, 4.6875);
        let (p, v) = quintic_reference(4.0).unwrap();
        assert!((p - 10.0).abs() < 1e-12 && v.abs() < 1e-12);
        assert!(quintic_reference(4.01).is_err());
        assert!(quintic_reference(-0.01).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for k in 1..40 {
            let t = f64::from(k) * 0.1;
            let (p1, v1) = quintic_reference(t - h).unwrap();
            let (p2, v2) = quintic_reference(t + h).unwrap();
            let (_, v) = quintic_reference(t).unwrap();
            assert!(((p2 - p1) / (2.0 * h) - v).abs() < 1e-7);
            assert!(((v2 - v1) / (2.0 * h) - quintic_acceleration(t).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn linear_approximation() {
        assert_eq!(linear_velocity_approx(2.0).unwrap(), 4.6875);
        assert_eq!(linear_velocity_approx(0.0).unwrap(), 0.0);
        assert_eq!(linear_velocity_approx(1.0).unwrap(), 2.34375);
        assert!(linear_velocity_approx(2.5).is_err());
    }
}
