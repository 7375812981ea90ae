//! Vehicle parameter record and the shipped default vehicle.
//!
//! The defaults describe a fish-shaped hull of roughly 0.29 × 0.12 × 0.13 m.
//! They are estimates (ellipsoid volume, smooth stall-plateau coefficient
//! curves),
//! not measured values; replace them through a config file when measured
//! values are available.

use nalgebra::Vector3;

use crate::actuation::{center_of_mass, ActuationError, ActuatorGeometry, BlockCommand, MassModel};
use crate::hydro::{CoefficientSet, HydroParams};

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParams {
    pub mass: MassModel,
    pub geometry: ActuatorGeometry,
    pub hydro: HydroParams,
}

impl VehicleParams {
    /// Estimated parameters of the reference vehicle. The shipped configs
    /// spell out exactly these values.
    pub fn nominal() -> Self {
        let geometry = ActuatorGeometry {
            bracket_origin: Vector3::new(0.03, 0.0, -0.035),
            tail_origin: Vector3::new(-0.11, 0.0, 0.0),
            d1: 0.02,
            d2: 0.015,
            d3: 0.01,
            slider_neutral: 0.03,
            tail_radius: 0.04,
            slider_range: (-0.02, 0.02),
        };
        let mass = MassModel {
            total: 1.8,
            block: 0.2,
            buoyancy: 1.8,
            // Places the neutral centre of mass at (0, 0, -0.01).
            static_moment: Vector3::new(-0.006, 0.0, -0.014),
            block_inertia: Vector3::new(3.0e-5, 3.0e-5, 3.0e-5),
            body_inertia: Vector3::new(2.5e-3, 5.3e-3, 5.0e-3),
        };
        let hydro = HydroParams {
            rho: 1000.0,
            tail_area: 0.005,
            area: Vector3::new(0.0122, 0.023, 0.020),
            damping: Vector3::new(-0.01, -0.01, -0.002),
            coefficients: CoefficientSet::nominal(),
        };
        Self {
            mass,
            geometry,
            hydro,
        }
    }

    pub fn neutral_center_of_mass(&self) -> Result<Vector3<f64>, ActuationError> {
        center_of_mass(&BlockCommand::NEUTRAL, &self.mass, &self.geometry).map(|c| c.into_vector())
    }

    /// Rewrites the static moments so that the neutral centre of mass lands on `target`.
    pub fn set_neutral_center_of_mass(
        &mut self,
        target: Vector3<f64>,
    ) -> Result<(), ActuationError> {
        let cw = crate::actuation::block_position(&BlockCommand::NEUTRAL, &self.geometry)?;
        self.mass.static_moment = target * self.mass.total - cw.vec() * self.mass.block;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        self.mass.validate().map_err(|e| e.to_string())?;
        self.geometry.validate().map_err(|e| e.to_string())?;
        self.hydro.validate()
    }
}
