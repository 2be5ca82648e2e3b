use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use tracking_error::estimate::{finite_n_error, limit_error, limit_error_with, AccomplishmentModel, LimitOptions, Sampling};
use tracking_error::lti::{simulate_continuous, switching_trace, ClosedLoopModel};
use tracking_error::quad::{run_flight, FlightConfig, QuadrotorParams, Trajectory};
use tracking_error::tuner::{dominant_pair, place_altitude_gains, solve_eigenvalue_for_error, GainSet};
use tracking_error::{Error, Result, VelocityProfile};

use crate::args::{required, FlyArgs, PredictArgs, SamplingArg, SimLtiArgs, SimMode, TrajectoryArg, TuneArgs};
use crate::report::to_json;

fn sampling(s: SamplingArg) -> Sampling {
    match s {
        SamplingArg::End => Sampling::SegmentEnd,
        SamplingArg::Start => Sampling::SegmentStart,
    }
}

fn profile(spec: &Option<String>, flag: &str) -> Result<VelocityProfile> {
    required(spec, flag)?.parse()
}

fn pair(values: &[f64], flag: &str) -> Result<(f64, f64)> {
    match *values {
        [a, b] => Ok((a, b)),
        _ => Err(Error::Argument(format!("--{flag} takes exactly two comma-separated values"))),
    }
}

fn eigenvalues(lambda: Option<f64>, lambdas: &Option<Vec<f64>>) -> Result<Option<(f64, f64)>> {
    match (lambda, lambdas) {
        (Some(_), Some(_)) => Err(Error::Argument("give either --lambda or --lambdas, not both".into())),
        (None, None) => Err(Error::Argument("missing --lambda or --lambdas".into())),
        (Some(_), None) => Ok(None),
        (None, Some(l)) => pair(l, "lambdas").map(Some),
    }
}

fn load_params(path: &Path) -> Result<QuadrotorParams> {
    let text = std::fs::read_to_string(path)?;
    let params: QuadrotorParams = serde_json::from_str(&text)
        .map_err(|e| Error::Argument(format!("params {}: {e}", path.display())))?;
    params.validate()?;
    Ok(params)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct Gains {
    #[serde(rename = "K")]
    k: [f64; 2],
    #[serde(rename = "N")]
    n: [f64; 2],
}

impl From<GainSet> for Gains {
    fn from(g: GainSet) -> Self {
        Self { k: g.k, n: g.n }
    }
}

#[derive(Serialize)]
struct PredictReport {
    error: f64,
    distance: f64,
    reference_position: f64,
    n_used: usize,
    converged: bool,
    residual: f64,
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let velocity = profile(&a.profile, "profile")?;
    let t = required(&a.t, "t")?;
    let model = match eigenvalues(a.lambda, &a.lambdas)? {
        None => AccomplishmentModel::first_order(a.lambda.expect("checked above"))?,
        Some((l1, l2)) => match (a.c1, a.c2) {
            (Some(c1), Some(c2)) => AccomplishmentModel::second_order_with_constants(l1, l2, c1, c2)?,
            _ => AccomplishmentModel::second_order(l1, l2)?,
        },
    };
    if a.lambda.is_some() && (a.c1.is_some() || a.c2.is_some()) {
        return Err(Error::Argument("--c1/--c2 apply to second-order models only".into()));
    }
    let sampling = sampling(a.sampling);
    let est = match a.n {
        Some(n) => finite_n_error(&velocity, &model, t, n, sampling)?,
        None => limit_error_with(&velocity, &model, t, a.tol, &LimitOptions { sampling, ..LimitOptions::default() })?,
    };
    let reference_position = match &a.ref_profile {
        Some(spec) => spec.parse::<VelocityProfile>()?.position(t)?,
        None => velocity.position(t)?,
    };
    let report = PredictReport {
        error: est.value,
        distance: reference_position - est.value,
        reference_position,
        n_used: est.segments.count(),
        converged: est.converged,
        residual: est.residual,
    };
    emit(a.out.as_deref(), &to_json(&report))
}

#[derive(Serialize)]
struct TuneReport {
    lambda_dom: f64,
    eigenpair: [f64; 2],
    mass: f64,
    gains: Gains,
}

pub fn tune(a: &TuneArgs) -> Result<()> {
    let velocity = profile(&a.profile, "profile")?;
    let t = required(&a.t, "t")?;
    let target = required(&a.target, "target")?;
    let bracket = pair(&a.bracket, "bracket")?;
    let mass = match (a.mass, &a.params) {
        (Some(_), Some(_)) => return Err(Error::Argument("give either --mass or --params, not both".into())),
        (Some(m), None) => m,
        (None, Some(path)) => load_params(path)?.mass,
        (None, None) => QuadrotorParams::default().mass,
    };
    let lambda_dom = solve_eigenvalue_for_error(&velocity, t, target, bracket)?;
    let (fast, slow) = dominant_pair(lambda_dom, a.ratio)?;
    let gains = place_altitude_gains(mass, (fast, slow))?;
    let report = TuneReport { lambda_dom, eigenpair: [fast, slow], mass, gains: gains.into() };
    emit(a.out.as_deref(), &to_json(&report))
}

#[derive(Serialize)]
struct TraceSummary<'a> {
    trace: &'a str,
    rows: usize,
    final_position: f64,
    final_error: f64,
}

pub fn sim_lti(a: &SimLtiArgs) -> Result<()> {
    let velocity = profile(&a.profile, "profile")?;
    let t = required(&a.t, "t")?;
    let eig = eigenvalues(a.lambda, &a.lambdas)?;
    let trace = match a.mode {
        SimMode::Continuous => {
            let model = match eig {
                None => ClosedLoopModel::first_order(a.lambda.expect("checked above"))?,
                Some((l1, l2)) => ClosedLoopModel::second_order(l1, l2)?,
            };
            simulate_continuous(&model, &velocity, t, a.dt)?
        }
        SimMode::Switching => {
            if eig.is_some() {
                return Err(Error::Argument("switching mode takes a first-order --lambda".into()));
            }
            switching_trace(a.lambda.expect("checked above"), &velocity, t, a.n, sampling(a.sampling))?
        }
    };
    match &a.out {
        Some(path) => {
            trace.write_csv(BufWriter::new(File::create(path)?))?;
            let summary = TraceSummary {
                trace: &path.to_string_lossy(),
                rows: trace.len(),
                final_position: trace.final_position(),
                final_error: trace.final_error(),
            };
            emit(None, &to_json(&summary))
        }
        None => trace.write_csv(io::stdout().lock()),
    }
}

#[derive(Serialize)]
struct FlySummary {
    query: f64,
    z_at: f64,
    predicted: f64,
    gap: f64,
    reference_z: f64,
    lambda_dom: f64,
    eigenpair: [f64; 2],
    gains: Gains,
    samples: usize,
    tilt_clamps: usize,
    thrust_clamps: usize,
    rotor_clamps: usize,
}

pub fn fly(a: &FlyArgs) -> Result<()> {
    let params = match &a.params {
        Some(path) => load_params(path)?,
        None => QuadrotorParams::default(),
    };
    let trajectory = match a.trajectory {
        TrajectoryArg::Quintic => Trajectory::Quintic,
        TrajectoryArg::QuinticZ => Trajectory::QuinticAltitude,
        TrajectoryArg::Hover => match *a.hover_at.as_slice() {
            [x, y, z] => Trajectory::Hover { position: [x, y, z] },
            _ => return Err(Error::Argument("--hover-at takes x,y,z".into())),
        },
    };
    let (fast, slow) = dominant_pair(a.lambda_dom, a.ratio)?;
    let gains = place_altitude_gains(params.mass, (fast, slow))?;

    let mut config = FlightConfig::new(trajectory, gains);
    config.yaw = a.yaw;
    config.t_end = a.t_end.unwrap_or(4.0);
    config.dt = a.dt;
    config.control_rate = a.control_rate;
    if !(0.0..=config.t_end).contains(&a.query) {
        return Err(Error::Argument(format!("--query {} must lie in [0, {}]", a.query, config.t_end)));
    }

    let default_spec = match a.trajectory {
        TrajectoryArg::Hover => "constant:v=0",
        _ => "ramp:a=2.34375",
    };
    let predict_profile: VelocityProfile = a.predict_profile.as_deref().unwrap_or(default_spec).parse()?;
    let model = AccomplishmentModel::first_order(slow)?;
    let est = limit_error(&predict_profile, &model, a.query, 1e-10)?;
    if !est.converged {
        return Err(Error::Numeric(format!("predicted error did not converge (residual {:e})", est.residual)));
    }
    let reference_z = trajectory.sample(a.query)?.position.z;
    let predicted = reference_z - est.value;

    let log = run_flight(&params, &config)?;
    let z_at = log.sample_at(a.query)?.state.position.z;
    if let Some(path) = &a.out {
        log.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let summary = FlySummary {
        query: a.query,
        z_at,
        predicted,
        gap: z_at - predicted,
        reference_z,
        lambda_dom: slow,
        eigenpair: [fast, slow],
        gains: gains.into(),
        samples: log.samples.len(),
        tilt_clamps: log.tilt_clamps,
        thrust_clamps: log.thrust_clamps,
        rotor_clamps: log.rotor_clamps,
    };
    emit(a.summary.as_deref(), &to_json(&summary))
}
