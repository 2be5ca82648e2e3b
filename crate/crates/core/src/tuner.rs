//! Eigenvalue selection from an error budget and altitude pole placement.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::estimate::{limit_error, AccomplishmentModel};
use crate::profile::VelocityProfile;

/// Smallest fast/slow ratio for which the slow pole is treated as dominant.
pub const MIN_DOMINANCE_RATIO: f64 = 10.0;

/// Altitude state-feedback gains `F = -K [z, z'] + N [ref, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    /// `[K1 (N/m), K2 (N s/m)]`.
    pub k: [f64; 2],
    /// `[N1 (N/m), N2 (N s/m)]`, with `N1 = K1`.
    pub n: [f64; 2],
}

impl GainSet {
    /// Closed-loop matrix of `z'' = F / m` under these gains.
    pub fn closed_loop_matrix(&self, mass: f64) -> Matrix2<f64> {
        Matrix2::new(0.0, 1.0, -self.k[0] / mass, -self.k[1] / mass)
    }
}

fn first_order_limit(profile: &VelocityProfile, lambda: f64, t: f64, tol: f64) -> Result<f64> {
    let model = AccomplishmentModel::first_order(-lambda.abs())?;
    let est = limit_error(profile, &model, t, tol)?;
    if !est.converged {
        return Err(Error::Numeric(format!(
            "error limit did not converge at lambda = {lambda} (residual {:e})",
            est.residual
        )));
    }
    Ok(est.value)
}

/// First-order eigenvalue whose limiting tracking error at `t` equals
/// `target_error`, by bisection on `|lambda|` inside `bracket`.
pub fn solve_eigenvalue_for_error(
    profile: &VelocityProfile,
    t: f64,
    target_error: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    ensure_finite("target error", target_error)?;
    if target_error <= 0.0 {
        return Err(Error::Argument(format!("target error {target_error} must be positive")));
    }
    let travel = (profile.position(t)? - profile.initial_position()).abs();
    if target_error >= travel {
        return Err(Error::Infeasible(format!(
            "target error {target_error} m is not below the reference travel {travel} m"
        )));
    }
    let (a, b) = bracket;
    ensure_finite("bracket end", a)?;
    ensure_finite("bracket end", b)?;
    if a >= 0.0 || b >= 0.0 || a == b {
        return Err(Error::Bracketing(format!(
            "bracket [{a}, {b}] must hold two distinct negative eigenvalues"
        )));
    }
    // error falls as |lambda| grows
    let tol = 1e-9 * travel;
    let (mut slow, mut fast) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
    let e_slow = first_order_limit(profile, slow, t, tol)?;
    let e_fast = first_order_limit(profile, fast, t, tol)?;
    if !(e_fast <= target_error && target_error <= e_slow) {
        return Err(Error::Bracketing(format!(
            "errors [{e_fast}, {e_slow}] over |lambda| in [{slow}, {fast}] do not straddle {target_error}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (slow + fast);
        if fast - slow <= 1e-13 * fast || mid <= slow || mid >= fast {
            break;
        }
        if first_order_limit(profile, mid, t, tol)? > target_error {
            slow = mid;
        } else {
            fast = mid;
        }
    }
    Ok(-0.5 * (slow + fast))
}

/// `(ratio * lambda_dom, lambda_dom)`: a fast pole `ratio` times the dominant one.
pub fn dominant_pair(lambda_dom: f64, ratio: f64) -> Result<(f64, f64)> {
    ensure_finite("dominant eigenvalue", lambda_dom)?;
    ensure_finite("ratio", ratio)?;
    if lambda_dom >= 0.0 {
        return Err(Error::Argument(format!("dominant eigenvalue {lambda_dom} must be negative")));
    }
    if ratio < MIN_DOMINANCE_RATIO {
        return Err(Error::Dominance { ratio });
    }
    Ok((ratio * lambda_dom, lambda_dom))
}

/// Gains placing the poles of the gravity-compensated double integrator
/// `m z'' = F` at `eigenvalues`.
pub fn place_altitude_gains(mass: f64, eigenvalues: (f64, f64)) -> Result<GainSet> {
    ensure_finite("mass", mass)?;
    if mass <= 0.0 {
        return Err(Error::Argument(format!("mass {mass} kg must be positive")));
    }
    let (l1, l2) = eigenvalues;
    ensure_finite("eigenvalue", l1)?;
    ensure_finite("eigenvalue", l2)?;
    if l1 >= 0.0 || l2 >= 0.0 {
        return Err(Error::Argument(format!("eigenvalues ({l1}, {l2}) must be strictly negative")));
    }
    if l1 == l2 {
        return Err(Error::Argument(format!("eigenvalues ({l1}, {l2}) must be distinct")));
    }
    let k1 = mass * l1 * l2;
    let k2 = -mass * (l1 + l2);
    Ok(GainSet { k: [k1, k2], n: [k1, 0.0] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_eigs(m: Matrix2<f64>) -> [f64; 2] {
        let ev = m.complex_eigenvalues();
        assert!(ev.iter().all(|c| c.im.abs() < 1e-12));
        let mut re = [ev[0].re, ev[1].re];
        re.sort_by(f64::total_cmp);
        re
    }

    #[test]
    fn vehicle_pair_gains() {
        let g = place_altitude_gains(0.54, (-100.0, -10.0)).unwrap();
        assert!((g.k[0] - 540.0).abs() < 1e-12);
        assert!((g.k[1] - 59.4).abs() < 1e-12);
        assert_eq!(g.n[0], g.k[0]);
        assert_eq!(g.n[1], 0.0);
        let ev = sorted_eigs(g.closed_loop_matrix(0.54));
        assert!((ev[0] + 100.0).abs() < 1e-9 && (ev[1] + 10.0).abs() < 1e-9);
    }

    #[test]
    fn unit_mass_gains() {
        let g = place_altitude_gains(1.0, (-1.0, -2.0)).unwrap();
        assert_eq!(g.k, [2.0, 3.0]);
    }

    #[test]
    fn gain_preconditions() {
        assert!(matches!(place_altitude_gains(0.0, (-1.0, -2.0)), Err(Error::Argument(_))));
        assert!(matches!(place_altitude_gains(-1.0, (-1.0, -2.0)), Err(Error::Argument(_))));
        assert!(matches!(place_altitude_gains(1.0, (0.0, -2.0)), Err(Error::Argument(_))));
        assert!(matches!(place_altitude_gains(1.0, (-2.0, -2.0)), Err(Error::Argument(_))));
    }

    #[test]
    fn dominant_pairs() {
        assert_eq!(dominant_pair(-10.0, 10.0).unwrap(), (-100.0, -10.0));
        assert_eq!(dominant_pair(-1.0, 10.0).unwrap(), (-10.0, -1.0));
        assert!(matches!(dominant_pair(-10.0, 5.0), Err(Error::Dominance { .. })));
        assert!(dominant_pair(1.0, 10.0).is_err());
    }

    #[test]
    fn inverts_ramp_prediction() {
        let ramp = VelocityProfile::ramp(2.34375).unwrap();
        let lambda = solve_eigenvalue_for_error(&ramp, 2.0, 0.445_312_5, (-100.0, -1.0)).unwrap();
        // target is the closed form minus the e^(-20) tail, so the root sits a hair off -10
        assert!((lambda + 10.0).abs() < 1e-5, "{lambda}");
    }

    #[test]
    fn steady_ramp_error() {
        let c = VelocityProfile::constant(1.0).unwrap();
        let lambda = solve_eigenvalue_for_error(&c, 50.0, 0.5, (-10.0, -0.1)).unwrap();
        assert!((lambda + 2.0).abs() < 1e-4, "{lambda}");
    }

    #[test]
    fn infeasible_and_bad_brackets() {
        let c = VelocityProfile::constant(1.0).unwrap();
        assert!(matches!(solve_eigenvalue_for_error(&c, 10.0, 20.0, (-10.0, -0.1)), Err(Error::Infeasible(_))));
        assert!(matches!(solve_eigenvalue_for_error(&c, 10.0, 0.5, (-10.0, -5.0)), Err(Error::Bracketing(_))));
        assert!(matches!(solve_eigenvalue_for_error(&c, 10.0, 0.5, (-10.0, 1.0)), Err(Error::Bracketing(_))));
        assert!(matches!(solve_eigenvalue_for_error(&c, 10.0, -0.5, (-10.0, -1.0)), Err(Error::Argument(_))));
    }
}
