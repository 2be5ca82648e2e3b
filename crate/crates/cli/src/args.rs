use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tracking_error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "trackerr", version, about = "Predict, tune and simulate dynamic tracking error")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tracking error and reached distance at time t.
    Predict(PredictArgs),
    /// Dominant eigenvalue and altitude gains for an error budget.
    Tune(TuneArgs),
    /// Closed-loop LTI simulation written as a CSV trace.
    SimLti(SimLtiArgs),
    /// Closed-loop quadrotor flight with a JSON summary at the query time.
    Fly(FlyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingArg {
    End,
    Start,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    Continuous,
    Switching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryArg {
    Quintic,
    /// Quintic on z, x and y held at zero.
    QuinticZ,
    Hover,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PredictArgs {
    /// Velocity profile, e.g. `constant:v=1`, `ramp:a=2.34375`, `quintic`, `csv:path=v.csv`.
    #[arg(long)]
    pub profile: Option<String>,
    /// First-order eigenvalue.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Second-order eigenvalues `l1,l2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true, requires = "c2")]
    pub c1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "c1")]
    pub c2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Convergence tolerance of the n -> inf limit, m.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Evaluate with a finite number of segments instead of the limit.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = SamplingArg::End)]
    pub sampling: SamplingArg,
    /// Profile whose position gives L(t) in `distance = L(t) - error`; defaults to --profile.
    #[arg(long)]
    pub ref_profile: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object whose keys (flag names) override the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TuneArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Allowed tracking error at t, m.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<f64>,
    /// Eigenvalue search interval `a,b`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1000.0, -0.01])]
    pub bracket: Vec<f64>,
    /// Fast/dominant eigenvalue ratio.
    #[arg(long, default_value_t = 10.0)]
    pub ratio: f64,
    /// Vehicle mass, kg (default 0.54, or taken from --params).
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    /// Quadrotor parameter JSON.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimLtiArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Second-order eigenvalues `l1,l2` (continuous mode only).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = SimMode::Continuous)]
    pub mode: SimMode,
    /// End time, s.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// RK4 step for continuous mode, s.
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    /// Hold count for switching mode.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = SamplingArg::End)]
    pub sampling: SamplingArg,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FlyArgs {
    /// Quadrotor parameter JSON; unset keys keep their defaults.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TrajectoryArg::Quintic)]
    pub trajectory: TrajectoryArg,
    /// Hover set-point `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 0.0, 1.0])]
    pub hover_at: Vec<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
    pub lambda_dom: f64,
    #[arg(long, default_value_t = 10.0)]
    pub ratio: f64,
    /// Desired yaw, rad.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub yaw: f64,
    /// Flight length, s (default: 4).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Physics step, s.
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    /// Controller rate, Hz.
    #[arg(long, default_value_t = 10_000.0)]
    pub control_rate: f64,
    /// Time at which simulated and predicted altitude are compared, s.
    #[arg(long, default_value_t = 2.0)]
    pub query: f64,
    /// Velocity profile for the altitude prediction (default: `ramp:a=2.34375`
    /// for quintic trajectories, `constant:v=0` for hover).
    #[arg(long)]
    pub predict_profile: Option<String>,
    /// FlightLog CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary destination; stdout if omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub trait Configurable: Serialize + DeserializeOwned {
    fn config_path(&self) -> Option<&Path>;
}

macro_rules! configurable {
    ($($t:ty),*) => {$(
        impl Configurable for $t {
            fn config_path(&self) -> Option<&Path> {
                self.config.as_deref()
            }
        }
    )*};
}

configurable!(PredictArgs, TuneArgs, SimLtiArgs, FlyArgs);

/// Applies the `--config` file, if any, on top of the parsed flags.
pub fn resolve<A: Configurable>(args: A) -> Result<A> {
    let Some(path) = args.config_path() else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(path)?;
    let overrides: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Argument(format!("config {}: {e}", path.display())))?;
    let Value::Object(overrides) = overrides else {
        return Err(Error::Argument(format!("config {} must hold a JSON object", path.display())));
    };
    let mut merged = serde_json::to_value(&args).expect("arguments serialize to JSON");
    let fields = merged.as_object_mut().expect("arguments serialize to an object");
    for (key, value) in overrides {
        if !fields.contains_key(&key) {
            return Err(Error::Argument(format!("config {}: unknown key `{key}`", path.display())));
        }
        fields.insert(key, value);
    }
    serde_json::from_value(merged).map_err(|e| Error::Argument(format!("config {}: {e}", path.display())))
}

pub fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
    value.clone().ok_or_else(|| Error::Argument(format!("missing --{flag}")))
}
