//! Six-degree-of-freedom simulation of a tail-actuated robotic fish with a
//! movable internal weight block.
//!
//! The crate covers the kinematic frames, the tail and weight-block
//! actuators, quasi-steady hydrodynamic loads with fitted coefficient
//! curves, the coupled rigid-body dynamics, damping-coefficient
//! identification against measured speed traces and steady-motion metrics.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuation;
pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod estimation;
pub mod frames;
pub mod hydro;
pub mod vehicle;

pub use dynamics::{simulate, Scenario, Trajectory};
pub use vehicle::VehicleParams;
