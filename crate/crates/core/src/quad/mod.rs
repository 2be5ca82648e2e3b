//! Rigid-body quadrotor simulation with attitude PD, lateral nested PD and
//! pole-placed altitude feedback.

pub mod control;
pub mod dynamics;
pub mod flight;
pub mod params;
pub mod state;
pub mod trajectory;

pub use control::{
    altitude_controller, attitude_controller, mix_rotors, position_controller, AttitudeCommand, AttitudeGains,
    LateralGains, LateralReference, RotorCommand, ThrustCommand, TiltCommand,
};
pub use dynamics::{body_wrench, dynamics_step};
pub use flight::{run_flight, FlightConfig, FlightLog, FlightSample};
pub use params::QuadrotorParams;
pub use state::QuadrotorState;
pub use trajectory::{linear_velocity_approx, quintic_reference, Trajectory};
