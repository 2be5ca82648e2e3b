//! Reference velocity profiles and their integrated positions.
//!
//! A [`VelocityProfile`] pairs an evaluable velocity expression with the closed
//! time interval on which it is defined. Positions are obtained from the
//! closed-form antiderivative of each expression, so they are exact up to
//! rounding.

use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use crate::error::{ensure_finite, Error, Result};

/// Velocity expression tree in m/s as a function of absolute time in s.
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity {
    /// `sum_k coeffs[k] * t^k`.
    Polynomial(Vec<f64>),
    /// `amplitude * sin(angular_frequency * t + phase)`.
    Sinusoid { amplitude: f64, angular_frequency: f64, phase: f64 },
    /// `values[j]` on `[breaks[j], breaks[j + 1])`; `breaks.len() == values.len() + 1`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation through `(times[j], values[j])`.
    Table { times: Vec<f64>, values: Vec<f64> },
    Sum(Vec<Velocity>),
}

impl Velocity {
    /// Evaluates the velocity. Tables and piecewise-constant pieces assume `t`
    /// has already been checked against the domain.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Velocity::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
            Velocity::Sinusoid { amplitude, angular_frequency, phase } => {
                amplitude * (angular_frequency * t + phase).sin()
            }
            Velocity::PiecewiseConstant { breaks, values } => values[piece_index(breaks, t)],
            Velocity::Table { times, values } => {
                let j = piece_index(times, t);
                let w = (t - times[j]) / (times[j + 1] - times[j]);
                values[j] + w * (values[j + 1] - values[j])
            }
            Velocity::Sum(terms) => terms.iter().map(|v| v.eval(t)).sum(),
        }
    }

    /// Exact value of `int_a^b v(tau) dtau`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Velocity::Polynomial(c) => {
                let anti = |t: f64| {
                    c.iter()
                        .enumerate()
                        .rev()
                        .fold(0.0, |acc, (k, &ck)| acc * t + ck / (k as f64 + 1.0))
                        * t
                };
                anti(b) - anti(a)
            }
            Velocity::Sinusoid { amplitude, angular_frequency, phase } => {
                if *angular_frequency == 0.0 {
                    amplitude * phase.sin() * (b - a)
                } else {
                    // cos x - cos y = -2 sin((x+y)/2) sin((x-y)/2), avoids cancellation for short spans
                    let mid = angular_frequency * 0.5 * (a + b) + phase;
                    let half = angular_frequency * 0.5 * (b - a);
                    2.0 * amplitude / angular_frequency * mid.sin() * half.sin()
                }
            }
            Velocity::PiecewiseConstant { breaks, values } => {
                piecewise_integral(breaks, a, b, |j, lo, hi| values[j] * (hi - lo))
            }
            Velocity::Table { times, values } => piecewise_integral(times, a, b, |j, lo, hi| {
                let slope = (values[j + 1] - values[j]) / (times[j + 1] - times[j]);
                let at = |t: f64| values[j] + slope * (t - times[j]);
                0.5 * (at(lo) + at(hi)) * (hi - lo)
            }),
            Velocity::Sum(terms) => terms.iter().map(|v| v.integral(a, b)).sum(),
        }
    }

    /// Points where the velocity or its derivative may be discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Velocity::PiecewiseConstant { breaks, .. } => breaks.clone(),
            Velocity::Table { times, .. } => times.clone(),
            Velocity::Sum(terms) => terms.iter().flat_map(Velocity::breakpoints).collect(),
            _ => Vec::new(),
        }
    }

    /// The interval on which the expression itself is defined.
    fn natural_domain(&self) -> (f64, f64) {
        match self {
            Velocity::PiecewiseConstant { breaks: knots, .. } | Velocity::Table { times: knots, .. } => {
                (knots[0], knots[knots.len() - 1])
            }
            Velocity::Sum(terms) => terms.iter().map(Velocity::natural_domain).fold(
                (f64::NEG_INFINITY, f64::INFINITY),
                |(lo, hi), (a, b)| (lo.max(a), hi.min(b)),
            ),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Velocity::Polynomial(c) => c.iter().try_for_each(|&x| ensure_finite("polynomial coefficient", x)),
            Velocity::Sinusoid { amplitude, angular_frequency, phase } => {
                ensure_finite("amplitude", *amplitude)?;
                ensure_finite("angular frequency", *angular_frequency)?;
                ensure_finite("phase", *phase)
            }
            Velocity::PiecewiseConstant { breaks, values } => {
                if breaks.len() != values.len() + 1 || values.is_empty() {
                    return Err(Error::Argument(
                        "piecewise-constant profile needs values.len() + 1 breakpoints".into(),
                    ));
                }
                check_knots(breaks)?;
                values.iter().try_for_each(|&v| ensure_finite("velocity", v))
            }
            Velocity::Table { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(Error::Argument("velocity table needs at least two (t, v) rows".into()));
                }
                check_knots(times)?;
                values.iter().try_for_each(|&v| ensure_finite("velocity", v))
            }
            Velocity::Sum(terms) => terms.iter().try_for_each(Velocity::validate),
        }
    }
}

fn check_knots(knots: &[f64]) -> Result<()> {
    knots.iter().try_for_each(|&k| ensure_finite("knot time", k))?;
    if knots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("knot times must be strictly increasing".into()));
    }
    Ok(())
}

/// Index `j` of the piece `[knots[j], knots[j + 1])` containing `t`, clamped so
/// the last knot belongs to the final piece.
fn piece_index(knots: &[f64], t: f64) -> usize {
    let pieces = knots.len() - 1;
    knots.partition_point(|&k| k <= t).saturating_sub(1).min(pieces - 1)
}

fn piecewise_integral(knots: &[f64], a: f64, b: f64, piece: impl Fn(usize, f64, f64) -> f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut total = 0.0;
    for j in piece_index(knots, lo)..knots.len() - 1 {
        let seg_lo = knots[j].max(lo);
        let seg_hi = knots[j + 1].min(hi);
        if seg_hi > seg_lo {
            total += piece(j, seg_lo, seg_hi);
        }
        if knots[j + 1] >= hi {
            break;
        }
    }
    sign * total
}

/// A reference velocity on a closed time interval, plus the reference position
/// at the start of that interval.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    velocity: Velocity,
    start: f64,
    end: f64,
    initial_position: f64,
}

impl VelocityProfile {
    /// Builds a profile on `[start, end]`. `end` may be `+inf` for analytic
    /// expressions; tables must cover the requested interval.
    pub fn new(velocity: Velocity, start: f64, end: f64) -> Result<Self> {
        velocity.validate()?;
        ensure_finite("profile start", start)?;
        if end.is_nan() || end <= start {
            return Err(Error::Argument(format!("profile domain [{start}, {end}] is empty")));
        }
        let (lo, hi) = velocity.natural_domain();
        if start < lo || end > hi {
            return Err(Error::Domain(format!(
                "profile domain [{start}, {end}] exceeds the data range [{lo}, {hi}]"
            )));
        }
        Ok(Self { velocity, start, end, initial_position: 0.0 })
    }

    pub fn with_initial_position(mut self, position: f64) -> Self {
        self.initial_position = position;
        self
    }

    /// `v(t) = v` on `[0, inf)`.
    pub fn constant(v: f64) -> Result<Self> {
        Self::new(Velocity::Polynomial(vec![v]), 0.0, f64::INFINITY)
    }

    /// `v(t) = a * t` on `[0, inf)`.
    pub fn ramp(a: f64) -> Result<Self> {
        Self::new(Velocity::Polynomial(vec![0.0, a]), 0.0, f64::INFINITY)
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(Velocity::Polynomial(coeffs), 0.0, f64::INFINITY)
    }

    /// Rest-to-rest quintic from 0 to 10 m over `[0, 4]` s, expressed as the
    /// velocity polynomial `75 s^2 - 150 s^3 + 75 s^4` with `s = t / 4`.
    pub fn quintic() -> Self {
        let c = vec![0.0, 0.0, 75.0 / 16.0, -150.0 / 64.0, 75.0 / 256.0];
        Self::new(Velocity::Polynomial(c), 0.0, 4.0).expect("quintic profile is valid")
    }

    /// Reads a two-column `t,v` CSV (optional header row) as a linearly
    /// interpolated table.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::Argument(format!("csv row {} has fewer than two columns", row + 1)));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(t), Ok(v)) => {
                    times.push(t);
                    values.push(v);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::Argument(format!("csv row {} is not numeric", row + 1))),
            }
        }
        if times.len() < 2 {
            return Err(Error::Argument("velocity table needs at least two (t, v) rows".into()));
        }
        let (start, end) = (times[0], times[times.len() - 1]);
        Self::new(Velocity::Table { times, values }, start, end)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file)
    }

    pub fn velocity_expr(&self) -> &Velocity {
        &self.velocity
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn initial_position(&self) -> f64 {
        self.initial_position
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    pub(crate) fn check(&self, t: f64) -> Result<()> {
        ensure_finite("time", t)?;
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} s is outside the profile domain [{}, {}]",
                self.start, self.end
            )))
        }
    }

    pub fn velocity(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.velocity.eval(t))
    }

    /// Reference position `L(t) = L(start) + int_start^t v`.
    pub fn position(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.initial_position + self.velocity.integral(self.start, t))
    }

    /// Velocity without the domain check, for inner loops whose bounds were
    /// validated once.
    pub(crate) fn velocity_unchecked(&self, t: f64) -> f64 {
        self.velocity.eval(t)
    }

    pub(crate) fn displacement_unchecked(&self, a: f64, b: f64) -> f64 {
        self.velocity.integral(a, b)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.velocity.breakpoints()
    }
}

/// Parses a profile descriptor of the form `name[:key=value,...]`.
///
/// Recognised forms: `constant:v=1`, `ramp:a=2.34375`, `poly:c=0;1;2`,
/// `quintic`, `csv:path=data.csv`. Analytic profiles accept `t_end=` to bound
/// their domain; all accept `x0=` for the initial reference position.
impl FromStr for VelocityProfile {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut keys = Vec::new();
        for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("profile option `{kv}` is not key=value")))?;
            keys.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| keys.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Argument(format!("profile option {key}=`{v}` is not a number")))
                })
                .transpose()
        };
        let allowed: &[&str] = match name.trim() {
            "constant" => &["v", "t_end", "x0"],
            "ramp" => &["a", "v0", "t_end", "x0"],
            "poly" => &["c", "t_end", "x0"],
            "quintic" => &["x0"],
            "csv" => &["path", "x0"],
            other => return Err(Error::Argument(format!("unknown profile `{other}`"))),
        };
        if let Some((k, _)) = keys.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Argument(format!("profile `{name}` does not take option `{k}`")));
        }
        let t_end = num("t_end")?.unwrap_or(f64::INFINITY);
        let profile = match name.trim() {
            "constant" => {
                let v = num("v")?.ok_or_else(|| Error::Argument("constant profile needs v=".into()))?;
                Self::new(Velocity::Polynomial(vec![v]), 0.0, t_end)?
            }
            "ramp" => {
                let a = num("a")?.ok_or_else(|| Error::Argument("ramp profile needs a=".into()))?;
                let v0 = num("v0")?.unwrap_or(0.0);
                Self::new(Velocity::Polynomial(vec![v0, a]), 0.0, t_end)?
            }
            "poly" => {
                let list = get("c").ok_or_else(|| Error::Argument("poly profile needs c=c0;c1;...".into()))?;
                let coeffs = list
                    .split(';')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Argument(format!("poly coefficient `{s}` is not a number")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::new(Velocity::Polynomial(coeffs), 0.0, t_end)?
            }
            "quintic" => Self::quintic(),
            "csv" => {
                let path = get("path").ok_or_else(|| Error::Argument("csv profile needs path=".into()))?;
                Self::from_csv_path(path)?
            }
            _ => unreachable!(),
        };
        Ok(profile.with_initial_position(num("x0")?.unwrap_or(0.0)))
    }
}
