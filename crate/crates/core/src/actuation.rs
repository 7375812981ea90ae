//! Tail gait and the barycentre mechanism.
//!
//! The weight block rides a slider (travel `Δd` from its neutral position)
//! mounted on a bracket that rotates by `ξ₂` about the output shaft of the
//! bracket motor. Moving the block moves the vehicle's centre of mass and
//! changes the inertia about `O_b`.
//!
//! The inertia tensor is kept diagonal: products of inertia introduced by an
//! off-axis block are not modelled.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use thiserror::Error;

use crate::frames::BodyVec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActuationError {
    #[error("slider travel {delta_d} m outside configured range [{min}, {max}] m")]
    SliderRange { delta_d: f64, min: f64, max: f64 },
    #[error("invalid tail gait: {0}")]
    InvalidGait(String),
    #[error("invalid block command: {0}")]
    InvalidBlock(String),
    #[error("invalid mass model: {0}")]
    InvalidMass(String),
    #[error("invalid actuator geometry: {0}")]
    InvalidGeometry(String),
}

/// `ξ₁(t) = ξ̄₁ + A₁ sin(2π f₁ t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TailGait {
    /// Offset `ξ̄₁`, rad.
    pub offset: f64,
    /// Amplitude `A₁`, rad.
    pub amplitude: f64,
    /// Frequency `f₁`, Hz.
    pub frequency: f64,
    /// Starts the beat toward negative angles: `ξ̄₁ − A₁ sin(2π f₁ t)`.
    pub inverted_stroke: bool,
}

impl TailGait {
    pub fn new(offset: f64, amplitude: f64, frequency: f64) -> Result<Self, ActuationError> {
        let gait = Self {
            offset,
            amplitude,
            frequency,
            inverted_stroke: false,
        };
        gait.validate()?;
        Ok(gait)
    }

    pub fn validate(&self) -> Result<(), ActuationError> {
        if !(self.offset.is_finite() && self.amplitude.is_finite() && self.frequency.is_finite()) {
            return Err(ActuationError::InvalidGait("non-finite parameter".into()));
        }
        if self.amplitude < 0.0 {
            return Err(ActuationError::InvalidGait(format!(
                "amplitude {} rad is negative",
                self.amplitude
            )));
        }
        if self.frequency < 0.0 {
            return Err(ActuationError::InvalidGait(format!(
                "frequency {} Hz is negative",
                self.frequency
            )));
        }
        if self.offset.abs() + self.amplitude >= FRAC_PI_2 {
            return Err(ActuationError::InvalidGait(format!(
                "|offset| + amplitude = {} rad reaches the body axis",
                self.offset.abs() + self.amplitude
            )));
        }
        Ok(())
    }

    /// Gait period in seconds, `None` for a held tail.
    pub fn period(&self) -> Option<f64> {
        (self.frequency > 0.0).then(|| 1.0 / self.frequency)
    }

    /// The reflected command `−ξ₁(t)`.
    pub fn mirrored(&self) -> Self {
        Self {
            offset: -self.offset,
            inverted_stroke: !self.inverted_stroke,
            ..*self
        }
    }

    fn stroke(&self) -> f64 {
        if self.inverted_stroke {
            -self.amplitude
        } else {
            self.amplitude
        }
    }
}

pub fn tail_angle(t: f64, gait: &TailGait) -> f64 {
    gait.offset + gait.stroke() * (2.0 * PI * gait.frequency * t).sin()
}

pub fn tail_rate(t: f64, gait: &TailGait) -> f64 {
    let w = 2.0 * PI * gait.frequency;
    w * gait.stroke() * (w * t).cos()
}

/// Weight-block command: slider travel `Δd` (m) and bracket angle `ξ₂` (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockCommand {
    pub delta_d: f64,
    pub bracket_angle: f64,
}

impl BlockCommand {
    pub const NEUTRAL: Self = Self {
        delta_d: 0.0,
        bracket_angle: 0.0,
    };

    pub fn new(delta_d: f64, bracket_angle: f64) -> Self {
        Self {
            delta_d,
            bracket_angle,
        }
    }

    pub fn validate(&self, geo: &ActuatorGeometry) -> Result<(), ActuationError> {
        if !(self.bracket_angle > -PI && self.bracket_angle <= PI) {
            return Err(ActuationError::InvalidBlock(format!(
                "bracket angle {} rad outside (-pi, pi]",
                self.bracket_angle
            )));
        }
        let (min, max) = geo.slider_range;
        if !(self.delta_d >= min && self.delta_d <= max) {
            return Err(ActuationError::SliderRange {
                delta_d: self.delta_d,
                min,
                max,
            });
        }
        Ok(())
    }
}

/// Mass distribution. "ew" denotes everything except the weight block.
#[derive(Debug, Clone, PartialEq)]
pub struct MassModel {
    pub total: f64,
    pub block: f64,
    /// Buoyancy mass `m_b` (displaced water mass), kg.
    pub buoyancy: f64,
    /// Static moments `M_ew` about the body axes, kg·m.
    pub static_moment: Vector3<f64>,
    /// Block inertia about its own centre of mass, kg·m².
    pub block_inertia: Vector3<f64>,
    /// Inertia of the rest of the vehicle about its own centre of mass, kg·m².
    pub body_inertia: Vector3<f64>,
}

impl MassModel {
    pub fn body_mass(&self) -> f64 {
        self.total - self.block
    }

    /// Centre of mass of the vehicle less the block.
    pub fn body_center(&self) -> Vector3<f64> {
        self.static_moment / self.body_mass()
    }

    pub fn validate(&self) -> Result<(), ActuationError> {
        let bad = |msg: String| Err(ActuationError::InvalidMass(msg));
        if !(self.total.is_finite() && self.block > 0.0 && self.block < self.total) {
            return bad(format!(
                "need 0 < block mass ({}) < total mass ({})",
                self.block, self.total
            ));
        }
        if !(self.buoyancy.is_finite() && self.buoyancy > 0.0) {
            return bad(format!("buoyancy mass {} must be positive", self.buoyancy));
        }
        if !self.static_moment.iter().all(|m| m.is_finite()) {
            return bad("non-finite static moment".into());
        }
        for (name, diag) in [("block", &self.block_inertia), ("body", &self.body_inertia)] {
            if !diag.iter().all(|j| j.is_finite() && *j > 0.0) {
                return bad(format!("{name} inertia diagonal must be positive"));
            }
        }
        Ok(())
    }
}

/// Mechanism and tail geometry, all in metres, body frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorGeometry {
    /// `O_rb = (a_rb, b_rb, c_rb)`, bracket pivot.
    pub bracket_origin: Vector3<f64>,
    /// `O_t = (a_t, b_t, c_t)`, tail hinge.
    pub tail_origin: Vector3<f64>,
    /// `d₁`: slider motor shaft to `O_rb`.
    pub d1: f64,
    /// `d₂`: bracket shaft to block centre of mass.
    pub d2: f64,
    /// `d₃`: block centre of mass to its link-rod joint.
    pub d3: f64,
    /// Neutral slider distance `s_w0`.
    pub slider_neutral: f64,
    /// Tail centre-of-pressure radius `r_c` from the hinge.
    pub tail_radius: f64,
    /// Admissible `Δd` interval.
    pub slider_range: (f64, f64),
}

impl ActuatorGeometry {
    pub fn validate(&self) -> Result<(), ActuationError> {
        for (name, v) in [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("slider_neutral", self.slider_neutral),
            ("tail_radius", self.tail_radius),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ActuationError::InvalidGeometry(format!(
                    "{name} = {v} must be a non-negative length"
                )));
            }
        }
        let (lo, hi) = self.slider_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= 0.0 && 0.0 <= hi) {
            return Err(ActuationError::InvalidGeometry(format!(
                "slider range [{lo}, {hi}] must contain 0"
            )));
        }
        Ok(())
    }
}

/// Block centre of mass `C_w` in the body frame.
pub fn block_position(
    cmd: &BlockCommand,
    geo: &ActuatorGeometry,
) -> Result<BodyVec, ActuationError> {
    cmd.validate(geo)?;
    Ok(block_position_unchecked(cmd, geo))
}

fn block_position_unchecked(cmd: &BlockCommand, geo: &ActuatorGeometry) -> BodyVec {
    let o = &geo.bracket_origin;
    let s_w = geo.slider_neutral + cmd.delta_d;
    let (s2, c2) = cmd.bracket_angle.sin_cos();
    BodyVec::new(
        o.x + geo.d1 - (s_w - geo.d3),
        o.y + geo.d2 * s2,
        o.z + geo.d2 * c2,
    )
}

/// Vehicle centre of mass `C_m`, `(M_ew + m_w·C_w) / m_total` per axis.
pub fn center_of_mass(
    cmd: &BlockCommand,
    mass: &MassModel,
    geo: &ActuatorGeometry,
) -> Result<BodyVec, ActuationError> {
    let cw = block_position(cmd, geo)?;
    Ok(BodyVec::from_vector(
        (mass.static_moment + cw.vec() * mass.block) / mass.total,
    ))
}

/// Diagonal of the inertia tensor about `O_b`: each part's own inertia plus
/// the parallel-axis term evaluated at its centre of mass.
pub fn inertia_about_origin(
    cmd: &BlockCommand,
    mass: &MassModel,
    geo: &ActuatorGeometry,
) -> Result<Vector3<f64>, ActuationError> {
    let cw = block_position(cmd, geo)?;
    let cew = mass.body_center();
    Ok(shifted(&mass.body_inertia, mass.body_mass(), &cew)
        + shifted(&mass.block_inertia, mass.block, cw.vec()))
}

fn shifted(own: &Vector3<f64>, m: f64, c: &Vector3<f64>) -> Vector3<f64> {
    let (x2, y2, z2) = (c.x * c.x, c.y * c.y, c.z * c.z);
    own + Vector3::new(y2 + z2, x2 + z2, x2 + y2) * m
}
