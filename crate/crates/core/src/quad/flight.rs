use std::io::Write;

use nalgebra::Vector3;

use super::control::{
    altitude_controller, attitude_controller, mix_rotors, position_controller, AttitudeCommand, AttitudeGains,
    LateralGains, LateralReference,
};
use super::dynamics::{body_wrench, dynamics_step};
use super::params::QuadrotorParams;
use super::state::QuadrotorState;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::numfmt::sig17;
use crate::tuner::GainSet;

#[derive(Debug, Clone, PartialEq)]
pub struct FlightConfig {
    pub trajectory: Trajectory,
    pub altitude: GainSet,
    pub attitude: AttitudeGains,
    pub lateral: LateralGains,
    /// Desired yaw, rad.
    pub yaw: f64,
    pub t_end: f64,
    /// Physics step, s.
    pub dt: f64,
    /// Controller update rate, Hz; its period must be a multiple of `dt`.
    pub control_rate: f64,
}

impl FlightConfig {
    pub fn new(trajectory: Trajectory, altitude: GainSet) -> Self {
        Self {
            trajectory,
            altitude,
            attitude: AttitudeGains::default(),
            lateral: LateralGains::default(),
            yaw: 0.0,
            t_end: 4.0,
            dt: 1e-4,
            control_rate: 10_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightSample {
    pub t: f64,
    pub state: QuadrotorState,
    pub ref_position: Vector3<f64>,
    pub ref_velocity: Vector3<f64>,
    /// Rotor forces applied from this sample on, N.
    pub forces: [f64; 4],
    /// Body moments produced by those forces, N m.
    pub moments: Vector3<f64>,
    /// Any clamp (tilt, total thrust or rotor) active in the held command.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightLog {
    pub dt: f64,
    pub samples: Vec<FlightSample>,
    pub tilt_clamps: usize,
    pub thrust_clamps: usize,
    pub rotor_clamps: usize,
}

impl FlightLog {
    /// Sample at time `t`, which must fall on the logging grid.
    pub fn sample_at(&self, t: f64) -> Result<&FlightSample> {
        let k = (t / self.dt).round();
        if !(k >= 0.0 && (k * self.dt - t).abs() <= 1e-9 * t.abs().max(1.0)) {
            return Err(Error::Argument(format!("t = {t} is not on the {} s logging grid", self.dt)));
        }
        self.samples
            .get(k as usize)
            .ok_or_else(|| Error::Domain(format!("t = {t} is beyond the end of the flight")))
    }

    pub fn last(&self) -> &FlightSample {
        self.samples.last().expect("a flight log holds the initial sample")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "t", "x", "y", "z", "vx", "vy", "vz", "phi", "theta", "psi", "p", "q", "r", "F1", "F2", "F3", "F4",
            "ref_x", "ref_y", "ref_z",
        ])?;
        for s in &self.samples {
            let (phi, theta, psi) = s.state.euler();
            let st = &s.state;
            let row = [
                s.t,
                st.position.x,
                st.position.y,
                st.position.z,
                st.velocity.x,
                st.velocity.y,
                st.velocity.z,
                phi,
                theta,
                psi,
                st.rates.x,
                st.rates.y,
                st.rates.z,
                s.forces[0],
                s.forces[1],
                s.forces[2],
                s.forces[3],
                s.ref_position.x,
                s.ref_position.y,
                s.ref_position.z,
            ];
            w.write_record(row.iter().map(|&v| sig17(v)))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn steps_per_control(dt: f64, control_rate: f64) -> Result<usize> {
    if !(control_rate.is_finite() && control_rate > 0.0) {
        return Err(Error::Argument(format!("control rate {control_rate} Hz must be positive")));
    }
    let ratio = 1.0 / (control_rate * dt);
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * k {
        return Err(Error::Argument(format!(
            "control period 1/{control_rate} s is not a whole number of {dt} s physics steps"
        )));
    }
    Ok(k as usize)
}

/// Closed-loop flight from rest at the trajectory's start point. The
/// controller runs as a zero-order hold at `control_rate` over RK4 physics
/// at `dt`; every physics sample is logged.
pub fn run_flight(params: &QuadrotorParams, config: &FlightConfig) -> Result<FlightLog> {
    params.validate()?;
    let dt = config.dt;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Argument(format!("dt = {dt} must be positive")));
    }
    if !(config.t_end > 0.0 && config.t_end <= config.trajectory.duration()) {
        return Err(Error::Domain(format!(
            "t_end = {} must lie in (0, {}]",
            config.t_end,
            config.trajectory.duration()
        )));
    }
    if config.altitude.n[0] != config.altitude.k[0] {
        return Err(Error::Argument("altitude gains must satisfy N1 = K1".into()));
    }
    let steps = (config.t_end / dt).round();
    if (steps * dt - config.t_end).abs() > 1e-9 * config.t_end {
        return Err(Error::Argument(format!("t_end {} is not a multiple of dt = {dt}", config.t_end)));
    }
    let steps = steps as usize;
    let every = steps_per_control(dt, config.control_rate)?;

    let start = config.trajectory.sample(0.0)?;
    let mut state = QuadrotorState::at_rest(start.position);
    let mut log = FlightLog {
        dt,
        samples: Vec::with_capacity(steps + 1),
        tilt_clamps: 0,
        thrust_clamps: 0,
        rotor_clamps: 0,
    };
    let mut forces = [0.0; 4];
    let mut saturated = false;
    for k in 0..=steps {
        let t = (k as f64 * dt).min(config.t_end);
        let reference = config.trajectory.sample(t)?;
        if k % every == 0 && k < steps {
            let lateral = LateralReference {
                position: [reference.position.x, reference.position.y],
                velocity: [reference.velocity.x, reference.velocity.y],
                acceleration: [reference.acceleration.x, reference.acceleration.y],
            };
            let tilt = position_controller(&state, &lateral, &config.lateral, params.gravity);
            let command = AttitudeCommand {
                angles: Vector3::new(tilt.phi, tilt.theta, config.yaw),
                rates: Vector3::zeros(),
            };
            let moments = attitude_controller(&state, &command, &config.attitude)?;
            let thrust = altitude_controller(
                [state.position.z, state.velocity.z],
                reference.position.z,
                &config.altitude,
                params,
            );
            let rotors = mix_rotors(thrust.total, &moments, params);
            log.tilt_clamps += usize::from(tilt.saturated);
            log.thrust_clamps += usize::from(thrust.saturated);
            log.rotor_clamps += usize::from(rotors.saturated);
            saturated = tilt.saturated || thrust.saturated || rotors.saturated;
            forces = rotors.forces;
        }
        let (_, moments) = body_wrench(&forces, params);
        log.samples.push(FlightSample {
            t,
            state,
            ref_position: reference.position,
            ref_velocity: reference.velocity,
            forces,
            moments,
            saturated,
        });
        if k < steps {
            state = dynamics_step(&state, &forces, params, dt).map_err(|e| match e {
                Error::BlowUp { .. } => Error::BlowUp { step: Some(k), time: t },
                other => other,
            })?;
        }
    }
    Ok(log)
}
