//! Dynamic state error of a feedforward-free tracking loop.
//!
//! The reference is replaced by a staircase of `n` setpoints held for `t / n`
//! each. During one hold the loop closes a fraction `p` of its remaining gap
//! (the *accomplishment*), so the error left at time `t` is
//!
//! ```text
//! e(t, n) = (t / n) * sum_{i=1..n} v(tau_i) * (1 - p)^(n + 1 - i)
//! ```
//!
//! and the continuous-reference error is the `n -> inf` limit.

use crate::error::{ensure_finite, Error, Result};
use crate::profile::VelocityProfile;
use crate::quadrature::{self, Tolerance};

/// Closed-loop accomplishment model `p(dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccomplishmentModel {
    FirstOrder { lambda: f64 },
    /// `p = 1 - c1 e^(lambda1 dt) - c2 e^(lambda2 dt)`.
    SecondOrder { lambda1: f64, lambda2: f64, c1: f64, c2: f64 },
}

fn check_eigenvalue(name: &str, lambda: f64) -> Result<()> {
    ensure_finite(name, lambda)?;
    if lambda >= 0.0 {
        return Err(Error::Configuration(format!("{name} = {lambda} is not strictly negative")));
    }
    Ok(())
}

impl AccomplishmentModel {
    pub fn first_order(lambda: f64) -> Result<Self> {
        check_eigenvalue("lambda", lambda)?;
        Ok(Self::FirstOrder { lambda })
    }

    /// Second-order model with the rest-to-rest step-response constants
    /// `c1 = l2 / (l2 - l1)`, `c2 = l1 / (l1 - l2)`, so `p(0) = 0` and `p'(0) = 0`.
    pub fn second_order(lambda1: f64, lambda2: f64) -> Result<Self> {
        check_eigenvalue("lambda1", lambda1)?;
        check_eigenvalue("lambda2", lambda2)?;
        check_distinct(lambda1, lambda2)?;
        let c1 = lambda2 / (lambda2 - lambda1);
        let c2 = lambda1 / (lambda1 - lambda2);
        Ok(Self::SecondOrder { lambda1, lambda2, c1, c2 })
    }

    pub fn second_order_with_constants(lambda1: f64, lambda2: f64, c1: f64, c2: f64) -> Result<Self> {
        let model = Self::SecondOrder { lambda1, lambda2, c1, c2 };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::FirstOrder { lambda } => check_eigenvalue("lambda", lambda),
            Self::SecondOrder { lambda1, lambda2, c1, c2 } => {
                check_eigenvalue("lambda1", lambda1)?;
                check_eigenvalue("lambda2", lambda2)?;
                check_distinct(lambda1, lambda2)?;
                ensure_finite("c1", c1)?;
                ensure_finite("c2", c2)?;
                if (c1 + c2 - 1.0).abs() > 1e-12 {
                    return Err(Error::Configuration(format!("c1 + c2 = {} must equal 1", c1 + c2)));
                }
                Ok(())
            }
        }
    }

    /// Fraction of the gap still open after a hold of `dt`, i.e. `1 - p(dt)`,
    /// evaluated without the cancellation of forming `p` first.
    pub fn retention(&self, dt: f64) -> f64 {
        match *self {
            Self::FirstOrder { lambda } => (lambda * dt).exp(),
            Self::SecondOrder { lambda1, lambda2, c1, c2 } => {
                c1 * (lambda1 * dt).exp() + c2 * (lambda2 * dt).exp()
            }
        }
    }

    /// The slowest (dominant) eigenvalue.
    pub fn dominant_eigenvalue(&self) -> f64 {
        match *self {
            Self::FirstOrder { lambda } => lambda,
            Self::SecondOrder { lambda1, lambda2, .. } => lambda1.max(lambda2),
        }
    }
}

fn check_distinct(lambda1: f64, lambda2: f64) -> Result<()> {
    if (lambda1 - lambda2).abs() <= 1e-12 * lambda1.abs().max(lambda2.abs()) {
        return Err(Error::Configuration(format!(
            "repeated second-order eigenvalue {lambda1}: degenerate models are not supported"
        )));
    }
    Ok(())
}

/// `p(dt)` for `model`.
pub fn accomplishment(model: &AccomplishmentModel, dt: f64) -> Result<f64> {
    ensure_finite("dt", dt)?;
    if dt < 0.0 {
        return Err(Error::Domain(format!("dt = {dt} must be non-negative")));
    }
    model.validate()?;
    Ok(1.0 - model.retention(dt))
}

/// Where inside each hold interval the reference velocity is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// `tau_i = (t / n) * i`.
    #[default]
    SegmentEnd,
    /// `tau_i = (t / n) * (i - 1)`.
    SegmentStart,
}

impl Sampling {
    pub(crate) fn sample_time(self, start: f64, h: f64, i: usize) -> f64 {
        match self {
            Sampling::SegmentEnd => start + h * i as f64,
            Sampling::SegmentStart => start + h * (i - 1) as f64,
        }
    }
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "end" | "segment-end" => Ok(Sampling::SegmentEnd),
            "start" | "segment-start" => Ok(Sampling::SegmentStart),
            other => Err(Error::Argument(format!("unknown sampling `{other}` (use end|start)"))),
        }
    }
}

/// How many segments an estimate is based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segments {
    Finite(usize),
    /// Extrapolated `n -> inf` limit; `n_max` is the finest grid evaluated.
    Limit { n_max: usize },
}

impl Segments {
    pub fn count(&self) -> usize {
        match *self {
            Segments::Finite(n) => n,
            Segments::Limit { n_max } => n_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    /// Error in metres.
    pub value: f64,
    pub segments: Segments,
    pub converged: bool,
    /// Size of the last extrapolation correction in metres (0 for finite `n`).
    pub residual: f64,
}

/// `e(t, n) = h sum_i v(tau_i) (1 - p)^(n + 1 - i)` term by term. Times are
/// measured from the profile start.
pub fn finite_n_error(
    profile: &VelocityProfile,
    model: &AccomplishmentModel,
    t: f64,
    n: usize,
    sampling: Sampling,
) -> Result<ErrorEstimate> {
    profile.check(t)?;
    model.validate()?;
    if n == 0 {
        return Err(Error::Argument("segment count n must be at least 1".into()));
    }
    let start = profile.start();
    let h = (t - start) / n as f64;
    let keep = model.retention(h);
    let value = h * (1..=n)
        .map(|i| profile.velocity_unchecked(sampling.sample_time(start, h, i)) * keep.powi((n + 1 - i) as i32))
        .sum::<f64>();
    Ok(ErrorEstimate {
        value,
        segments: Segments::Finite(n),
        converged: true,
        residual: 0.0,
    })
}

fn error_sum(profile: &VelocityProfile, model: &AccomplishmentModel, t: f64, n: usize, sampling: Sampling) -> f64 {
    let start = profile.start();
    let h = (t - start) / n as f64;
    let keep = model.retention(h);
    // Horner form of sum_i v_i keep^(n+1-i)
    let acc = (1..=n).fold(0.0, |acc, i| {
        (acc + profile.velocity_unchecked(sampling.sample_time(start, h, i))) * keep
    });
    h * acc
}

/// Options for [`limit_error_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    pub n0: usize,
    pub n_max: usize,
    pub sampling: Sampling,
    /// Deepest Richardson column used; bounds roundoff amplification.
    pub max_order: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self { n0: 64, n_max: 1 << 22, sampling: Sampling::SegmentEnd, max_order: 8 }
    }
}

/// `e(t) = lim e(t, n)` with default [`LimitOptions`].
pub fn limit_error(
    profile: &VelocityProfile,
    model: &AccomplishmentModel,
    t: f64,
    tol: f64,
) -> Result<ErrorEstimate> {
    limit_error_with(profile, model, t, tol, &LimitOptions::default())
}

/// Evaluates `e(t, n)` on `n0, 2 n0, 4 n0, ...` and Richardson-extrapolates
/// assuming an error expansion in powers of `1 / n` (leading term first).
/// Stops once successive diagonal extrapolants differ by at most `tol`.
pub fn limit_error_with(
    profile: &VelocityProfile,
    model: &AccomplishmentModel,
    t: f64,
    tol: f64,
    opts: &LimitOptions,
) -> Result<ErrorEstimate> {
    profile.check(t)?;
    model.validate()?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Argument(format!("tolerance {tol} must be positive")));
    }
    if opts.n0 == 0 || opts.n_max < opts.n0 {
        return Err(Error::Argument("limit options need 1 <= n0 <= n_max".into()));
    }

    let mut n = opts.n0;
    let mut previous: Vec<f64> = vec![error_sum(profile, model, t, n, opts.sampling)];
    let mut best = previous[0];
    let mut residual = f64::INFINITY;
    while n <= opts.n_max / 2 {
        n *= 2;
        let mut row = Vec::with_capacity(previous.len() + 1);
        row.push(error_sum(profile, model, t, n, opts.sampling));
        for j in 1..=previous.len().min(opts.max_order) {
            let factor = f64::from(1u32 << j) - 1.0;
            row.push(row[j - 1] + (row[j - 1] - previous[j - 1]) / factor);
        }
        let diag = *row.last().expect("row is never empty");
        let prev_diag = *previous.last().expect("row is never empty");
        residual = (diag - prev_diag).abs();
        best = diag;
        if residual <= tol {
            return Ok(ErrorEstimate {
                value: diag,
                segments: Segments::Limit { n_max: n },
                converged: true,
                residual,
            });
        }
        previous = row;
    }
    Ok(ErrorEstimate { value: best, segments: Segments::Limit { n_max: n }, converged: false, residual })
}

/// Ground truth for first-order loops: `int_start^t v(tau) e^(lambda (t - tau)) dtau`,
/// the variation-of-constants solution of `e' = lambda e + v`.
pub fn convolution_oracle(profile: &VelocityProfile, lambda: f64, t: f64) -> Result<f64> {
    check_eigenvalue("lambda", lambda)?;
    profile.check(t)?;
    let tol = Tolerance { relative: 1e-12, absolute: 1e-300, max_intervals: 20_000 };
    let q = quadrature::integrate(
        |tau| profile.velocity_unchecked(tau) * (lambda * (t - tau)).exp(),
        profile.start(),
        t,
        &profile.breakpoints(),
        tol,
    )?;
    Ok(q.value)
}

/// Polynomial in `p` with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly(pub Vec<i64>);

impl IntPoly {
    fn add_scaled(&mut self, other: &IntPoly, scale: i64) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += scale * b;
        }
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
    }

    fn times_p(&self) -> IntPoly {
        let mut c = Vec::with_capacity(self.0.len() + 1);
        c.push(0);
        c.extend_from_slice(&self.0);
        IntPoly(c)
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * p + c as f64)
    }
}

/// Largest segment count accepted by [`expand_segment_displacements`].
pub const MAX_EXPANSION_SEGMENTS: usize = 12;

/// Symbolic expansion of the switching process: entry `[m][i]` is the
/// polynomial in `p` multiplying `x_i` in the object's displacement during
/// segment `m` (both zero-based).
pub fn segment_displacement_polynomials(n: usize) -> Result<Vec<Vec<IntPoly>>> {
    if !(1..=MAX_EXPANSION_SEGMENTS).contains(&n) {
        return Err(Error::Argument(format!(
            "expansion supports 1..={MAX_EXPANSION_SEGMENTS} segments, got {n}"
        )));
    }
    let mut moved = vec![IntPoly::default(); n];
    let mut per_segment = Vec::with_capacity(n);
    for m in 0..n {
        // gap at the start of segment m: reference travel so far minus object travel so far
        let displacement: Vec<IntPoly> = (0..n)
            .map(|i| {
                let mut gap = IntPoly(vec![i64::from(i <= m)]);
                gap.add_scaled(&moved[i], -1);
                gap.times_p()
            })
            .collect();
        for (total, d) in moved.iter_mut().zip(&displacement) {
            total.add_scaled(d, 1);
        }
        per_segment.push(displacement);
    }
    Ok(per_segment)
}

/// Total object movement after `n` holds when the reference advances by
/// `x[i]` at the start of hold `i` and each hold closes a fraction `p` of the gap.
pub fn expand_segment_displacements(n: usize, p: f64, x: &[f64]) -> Result<f64> {
    if x.len() != n {
        return Err(Error::Argument(format!("expected {n} displacements, got {}", x.len())));
    }
    ensure_finite("p", p)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("accomplishment p = {p} must lie in [0, 1]")));
    }
    let segments = segment_displacement_polynomials(n)?;
    Ok(segments
        .iter()
        .map(|row| row.iter().zip(x).map(|(poly, xi)| poly.eval(p) * xi).sum::<f64>())
        .sum())
}

/// Coefficient polynomial of each `x_i` in the total movement.
pub fn movement_coefficients(n: usize) -> Result<Vec<IntPoly>> {
    let segments = segment_displacement_polynomials(n)?;
    let mut totals = vec![IntPoly::default(); n];
    for row in &segments {
        for (total, poly) in totals.iter_mut().zip(row) {
            total.add_scaled(poly, 1);
        }
    }
    Ok(totals)
}
