//! Prediction of the dynamic tracking error of feedforward-free control loops.
//!
//! * [`estimate`] evaluates the switching-reference error sum and its limit,
//!   with an independent convolution oracle.
//! * [`lti`] simulates first- and second-order closed loops, both continuously
//!   (fixed-step RK4) and as an exact switching-setpoint process.
//! * [`tuner`] inverts the error formula to pick eigenvalues and places
//!   altitude gains.
//! * [`quad`] is a rigid-body quadrotor simulator with the matching controllers.

pub mod error;
pub mod estimate;
pub mod lti;
pub mod numfmt;
pub mod profile;
pub mod quad;
pub mod quadrature;
pub mod rk4;
pub mod tuner;

pub use error::{Error, Result};
pub use estimate::{
    accomplishment, convolution_oracle, expand_segment_displacements, finite_n_error, limit_error,
    limit_error_with, AccomplishmentModel, ErrorEstimate, LimitOptions, Sampling, Segments,
};
pub use profile::{Velocity, VelocityProfile};
