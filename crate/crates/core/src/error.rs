use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input lies outside the mathematical domain of an operation (time outside a
    /// profile, non-finite arguments, Euler singularity).
    #[error("domain: {0}")]
    Domain(String),
    #[error("argument: {0}")]
    Argument(String),
    /// Model construction is internally inconsistent (e.g. repeated eigenvalues).
    #[error("configuration: {0}")]
    Configuration(String),
    #[error("numeric: {0}")]
    Numeric(String),
    #[error("bracketing: {0}")]
    Bracketing(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// The fast/slow eigenvalue ratio is too small for the dominant-pole approximation.
    #[error("dominance: ratio {ratio} < 10, dominant-eigenvalue approximation does not hold")]
    Dominance { ratio: f64 },
    #[error("singularity: pitch {theta} rad is within 0.1 rad of +/-pi/2")]
    Singularity { theta: f64 },
    /// State became non-finite; `step` is the physics step index when known.
    #[error("blow-up: non-finite state{}", match step { Some(k) => format!(" at step {k} (t = {time} s)"), None => String::new() })]
    BlowUp { step: Option<usize>, time: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}
