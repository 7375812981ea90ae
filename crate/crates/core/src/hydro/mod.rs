//! Fluid, gravity and buoyancy loads.

pub mod coefficients;
pub mod forces;

pub use coefficients::{
    eval_coefficient, fit_coefficient_model, Basis, CoefficientError, CoefficientFamily,
    CoefficientModel, CoefficientSet, CoefficientTable, DefaultTables, FitOptions,
};
pub use forces::{
    body_plane_forces, damping_torque, gravity_buoyancy, impact_torque, tail_cop_offset,
    tail_cop_velocity, tail_forces, tail_torque, BodyPlane, GravityBuoyancy, HydroParams,
    SurfaceLoad, Wrench, G0,
};
