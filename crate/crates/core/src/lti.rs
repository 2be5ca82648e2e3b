//! First- and second-order closed-loop tracking simulations.

use std::io::Write;

use nalgebra::{Matrix2, Vector2};

use crate::error::{ensure_finite, Error, Result};
use crate::estimate::{convolution_oracle, finite_n_error, AccomplishmentModel, Sampling};
use crate::numfmt::sig17;
use crate::profile::VelocityProfile;
use crate::rk4;

/// A closed loop realised by state feedback on a chain of integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedLoopModel {
    /// `y' = -k (y - r)` with `k = -lambda`.
    FirstOrder { lambda: f64 },
    /// `y'' = -k1 (y - r) - k2 y'` with `k1 = l1 l2`, `k2 = -(l1 + l2)`.
    SecondOrder { lambda1: f64, lambda2: f64 },
}

impl ClosedLoopModel {
    pub fn first_order(lambda: f64) -> Result<Self> {
        stable("lambda", lambda)?;
        Ok(Self::FirstOrder { lambda })
    }

    pub fn second_order(lambda1: f64, lambda2: f64) -> Result<Self> {
        stable("lambda1", lambda1)?;
        stable("lambda2", lambda2)?;
        Ok(Self::SecondOrder { lambda1, lambda2 })
    }

    pub fn order(&self) -> usize {
        match self {
            Self::FirstOrder { .. } => 1,
            Self::SecondOrder { .. } => 2,
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        match *self {
            Self::FirstOrder { lambda } => vec![lambda],
            Self::SecondOrder { lambda1, lambda2 } => vec![lambda1, lambda2],
        }
    }

    /// Feedback gains on `[y - r, y']`.
    pub fn gains(&self) -> Vec<f64> {
        match *self {
            Self::FirstOrder { lambda } => vec![-lambda],
            Self::SecondOrder { lambda1, lambda2 } => vec![lambda1 * lambda2, -(lambda1 + lambda2)],
        }
    }

    /// Closed-loop system matrix in companion form; first order uses the
    /// top-left entry only.
    pub fn system_matrix(&self) -> Matrix2<f64> {
        let g = self.gains();
        match self {
            Self::FirstOrder { .. } => Matrix2::new(-g[0], 0.0, 0.0, 0.0),
            Self::SecondOrder { .. } => Matrix2::new(0.0, 1.0, -g[0], -g[1]),
        }
    }

    fn derivative(&self, state: &Vector2<f64>, reference: f64) -> Vector2<f64> {
        let g = self.gains();
        match self {
            Self::FirstOrder { .. } => Vector2::new(-g[0] * (state[0] - reference), 0.0),
            Self::SecondOrder { .. } => {
                Vector2::new(state[1], -g[0] * (state[0] - reference) - g[1] * state[1])
            }
        }
    }
}

fn stable(name: &str, lambda: f64) -> Result<()> {
    ensure_finite(name, lambda)?;
    if lambda >= 0.0 {
        return Err(Error::Configuration(format!("{name} = {lambda} is not strictly negative")));
    }
    Ok(())
}

/// Uniformly sampled reference/actual positions. `error = reference - position`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub time: Vec<f64>,
    pub reference: Vec<f64>,
    pub position: Vec<f64>,
    pub error: Vec<f64>,
}

impl Trace {
    fn with_capacity(dt: f64, n: usize) -> Self {
        Self {
            dt,
            time: Vec::with_capacity(n),
            reference: Vec::with_capacity(n),
            position: Vec::with_capacity(n),
            error: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, t: f64, reference: f64, position: f64) {
        self.time.push(t);
        self.reference.push(reference);
        self.position.push(position);
        self.error.push(reference - position);
    }

    fn push_with_error(&mut self, t: f64, reference: f64, error: f64) {
        self.time.push(t);
        self.reference.push(reference);
        self.position.push(reference - error);
        self.error.push(error);
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn final_position(&self) -> f64 {
        *self.position.last().expect("traces hold at least the initial sample")
    }

    pub fn final_error(&self) -> f64 {
        *self.error.last().expect("traces hold at least the initial sample")
    }

    /// Writes `t,ref_pos,pos,err` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "ref_pos", "pos", "err"])?;
        for k in 0..self.len() {
            w.write_record([
                sig17(self.time[k]),
                sig17(self.reference[k]),
                sig17(self.position[k]),
                sig17(self.error[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn step_count(span: f64, dt: f64) -> Result<usize> {
    ensure_finite("dt", dt)?;
    if dt <= 0.0 {
        return Err(Error::Argument(format!("dt = {dt} must be positive")));
    }
    if dt >= span {
        return Err(Error::Argument(format!("dt = {dt} must be smaller than the simulated span {span}")));
    }
    let steps = (span / dt).round();
    if (steps * dt - span).abs() > 1e-9 * span {
        return Err(Error::Argument(format!("span {span} is not an integer multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

/// RK4 simulation driven by an arbitrary reference position signal, starting
/// from `state0 = [y, y']` at `t0`.
pub fn simulate_with_reference<R: Fn(f64) -> f64>(
    model: &ClosedLoopModel,
    reference: R,
    t0: f64,
    state0: [f64; 2],
    t_end: f64,
    dt: f64,
) -> Result<Trace> {
    let steps = step_count(t_end - t0, dt)?;
    let mut trace = Trace::with_capacity(dt, steps + 1);
    let mut x = Vector2::from(state0);
    trace.push(t0, reference(t0), x[0]);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        x = rk4::step(|s, x| model.derivative(x, reference(s)), t, &x, dt);
        let t_next = t0 + (k + 1) as f64 * dt;
        trace.push(t_next, reference(t_next), x[0]);
    }
    Ok(trace)
}

/// RK4 simulation tracking the profile's position signal from rest at the
/// profile's initial position.
pub fn simulate_continuous(
    model: &ClosedLoopModel,
    profile: &VelocityProfile,
    t_end: f64,
    dt: f64,
) -> Result<Trace> {
    profile.check(t_end)?;
    let start = profile.start();
    let x0 = profile.initial_position();
    // sub-step times can overshoot t_end by rounding; clamp into the domain
    let hi = t_end;
    simulate_with_reference(
        model,
        |t| x0 + profile.displacement_unchecked(start, t.clamp(start, hi)),
        start,
        [x0, 0.0],
        t_end,
        dt,
    )
}

/// Staircase reference process: over hold `i` the setpoint sits at
/// `A_i = A_(i-1) + (t / n) v(tau_i)` and the first-order loop is advanced
/// with the exact propagator `e^(lambda t / n)`. Samples are the hold boundaries.
pub fn switching_trace(
    lambda: f64,
    profile: &VelocityProfile,
    t: f64,
    n: usize,
    sampling: Sampling,
) -> Result<Trace> {
    stable("lambda", lambda)?;
    profile.check(t)?;
    if n == 0 {
        return Err(Error::Argument("segment count n must be at least 1".into()));
    }
    let start = profile.start();
    let h = (t - start) / n as f64;
    let keep = (lambda * h).exp();
    let mut trace = Trace::with_capacity(h, n + 1);
    let mut setpoint = profile.initial_position();
    // the gap is the state so small errors are not lost against large travel
    let mut gap = 0.0;
    trace.push(start, setpoint, setpoint);
    for i in 1..=n {
        let step = h * profile.velocity_unchecked(sampling.sample_time(start, h, i));
        setpoint += step;
        gap = (gap + step) * keep;
        trace.push_with_error(start + h * i as f64, setpoint, gap);
    }
    Ok(trace)
}

/// Terminal error of [`switching_trace`].
pub fn simulate_switching_reference(
    lambda: f64,
    profile: &VelocityProfile,
    t: f64,
    n: usize,
    sampling: Sampling,
) -> Result<f64> {
    Ok(switching_trace(lambda, profile, t, n, sampling)?.final_error())
}

/// Least-squares slope of `log |e(t, n) - e(t)|` against `log n` for
/// `n = 2^4 ..= 2^14`, using the convolution oracle as `e(t)`.
pub fn convergence_order(profile: &VelocityProfile, lambda: f64, t: f64) -> Result<f64> {
    let model = AccomplishmentModel::first_order(lambda)?;
    let exact = convolution_oracle(profile, lambda, t)?;
    let mut points = Vec::new();
    for k in 4..=14 {
        let n = 1usize << k;
        let e = finite_n_error(profile, &model, t, n, Sampling::SegmentEnd)?.value;
        let gap = (e - exact).abs();
        if gap > 0.0 {
            points.push(((n as f64).ln(), gap.ln()));
        }
    }
    if points.len() < 2 {
        return Err(Error::Numeric(
            "convergence order is undefined: the finite-n error equals the limit".into(),
        ));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realised_eigenvalues_match() {
        let m = ClosedLoopModel::second_order(-100.0, -10.0).unwrap();
        let mut ev: Vec<f64> = m.system_matrix().complex_eigenvalues().iter().map(|c| c.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 100.0).abs() < 1e-9 && (ev[1] + 10.0).abs() < 1e-9, "{ev:?}");
        let m = ClosedLoopModel::first_order(-3.0).unwrap();
        assert_eq!(m.system_matrix()[(0, 0)], -3.0);
    }

    #[test]
    fn unit_ramp_terminal_position() {
        let m = ClosedLoopModel::first_order(-1.0).unwrap();
        let p = VelocityProfile::constant(1.0).unwrap();
        let tr = simulate_continuous(&m, &p, 10.0, 1e-4).unwrap();
        assert_eq!(tr.len(), 100_001);
        assert!((tr.final_position() - 9.000_045_399_9).abs() < 1e-6);
        assert!((tr.time[100_000] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_stays_put() {
        let m = ClosedLoopModel::first_order(-4.0).unwrap();
        let p = VelocityProfile::constant(0.0).unwrap();
        let tr = simulate_continuous(&m, &p, 2.0, 1e-3).unwrap();
        assert!(tr.position.iter().all(|&y| y == 0.0));
        assert!(tr.error.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn second_order_step_settles() {
        let m = ClosedLoopModel::second_order(-100.0, -10.0).unwrap();
        let tr = simulate_with_reference(&m, |_| 1.0, 0.0, [0.0, 0.0], 2.0, 1e-4).unwrap();
        assert!((tr.final_position() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn step_size_validation() {
        let m = ClosedLoopModel::first_order(-1.0).unwrap();
        let p = VelocityProfile::constant(1.0).unwrap();
        assert!(matches!(simulate_continuous(&m, &p, 1.0, 1.0), Err(Error::Argument(_))));
        assert!(matches!(simulate_continuous(&m, &p, 1.0, 0.0), Err(Error::Argument(_))));
        assert!(matches!(simulate_continuous(&m, &p, 1.0, 0.3), Err(Error::Argument(_))));
        assert!(matches!(simulate_continuous(&m, &VelocityProfile::quintic(), 5.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn switching_single_hold() {
        let p = VelocityProfile::constant(1.0).unwrap();
        let e = simulate_switching_reference(-1.0, &p, 1.0, 1, Sampling::SegmentEnd).unwrap();
        assert!((e - (-1.0f64).exp()).abs() < 1e-15);
        let e = simulate_switching_reference(-1.0, &p, 10.0, 100_000, Sampling::SegmentEnd).unwrap();
        assert!((e - 0.999_954_6).abs() < 1e-4);
        let zero = VelocityProfile::constant(0.0).unwrap();
        assert_eq!(simulate_switching_reference(-7.0, &zero, 3.0, 9, Sampling::SegmentStart).unwrap(), 0.0);
    }

    #[test]
    fn trace_csv_layout() {
        let p = VelocityProfile::constant(1.0).unwrap();
        let tr = switching_trace(-1.0, &p, 1.0, 2, Sampling::SegmentEnd).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,ref_pos,pos,err");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.0000000000000000,"));
    }

    #[test]
    fn convergence_order_first_order_in_one_over_n() {
        let c = VelocityProfile::constant(1.0).unwrap();
        let slope = convergence_order(&c, -1.0, 10.0).unwrap();
        assert!((slope + 1.0).abs() < 0.1, "{slope}");
        let r = VelocityProfile::ramp(2.34375).unwrap();
        let slope = convergence_order(&r, -10.0, 2.0).unwrap();
        assert!((slope + 1.0).abs() < 0.1, "{slope}");
        let zero = VelocityProfile::constant(0.0).unwrap();
        assert!(matches!(convergence_order(&zero, -1.0, 1.0), Err(Error::Numeric(_))));
    }
}
