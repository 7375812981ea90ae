//! Quasi-steady fluid loads, damping, and gravity/buoyancy.
//!
//! All vectors are resolved in the body frame. Lift and drag on a surface
//! follow the same recipe for the tail and the two body planes: the attack
//! angle is `asin(n·v̂)`, drag opposes `v̂`, and lift lies in the plane of
//! `v̂` and `n`, perpendicular to `v̂`, pointing away from the side the flow
//! strikes.

use nalgebra::Vector3;

use crate::actuation::{ActuatorGeometry, MassModel};
use crate::frames::{rotation_body_to_inertial, Attitude, BodyState, BodyVec};
use crate::hydro::coefficients::{CoefficientFamily, CoefficientModel, CoefficientSet};

/// Standard gravity, m/s².
pub const G0: f64 = 9.81;
/// Below this speed the dynamic pressure is treated as zero.
pub const SPEED_EPS: f64 = 1e-12;
/// Below this norm the lift direction is undefined and lift is dropped.
pub const DIRECTION_EPS: f64 = 1e-9;

/// Gravity in the inertial frame (`z_I` points up).
pub fn gravity_inertial() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, -G0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydroParams {
    /// Water density, kg/m³.
    pub rho: f64,
    /// Tail plate area `S_t`, m².
    pub tail_area: f64,
    /// Maximum cross sections `(S_xx, S_yy, S_zz)`, m².
    pub area: Vector3<f64>,
    /// Damping diagonal `(C_ωb1, C_ωb2, C_ωb3)`, N·m·s/rad, each ≤ 0.
    pub damping: Vector3<f64>,
    pub coefficients: CoefficientSet,
}

impl HydroParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(format!("rho = {} must be positive", self.rho));
        }
        if !(self.tail_area.is_finite() && self.tail_area > 0.0) {
            return Err(format!("tail area {} must be positive", self.tail_area));
        }
        if !self.area.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err("cross-section areas must be positive".into());
        }
        if let Some(c) = self.damping.iter().find(|c| !(c.is_finite() && **c <= 0.0)) {
            return Err(format!(
                "damping coefficient {c} must be <= 0 (it opposes rotation)"
            ));
        }
        Ok(())
    }

    fn model(&self, family: CoefficientFamily) -> &CoefficientModel {
        self.coefficients.get(family)
    }
}

/// Force and torque about `O_b`, body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: BodyVec,
    pub torque: BodyVec,
}

impl Wrench {
    pub fn is_finite(&self) -> bool {
        self.force.is_finite() && self.torque.is_finite()
    }
}

/// Lift and drag on one surface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurfaceLoad {
    pub lift: BodyVec,
    pub drag: BodyVec,
    /// Attack angle, rad.
    pub alpha: f64,
}

impl SurfaceLoad {
    pub fn total(&self) -> BodyVec {
        self.lift + self.drag
    }
}

fn surface_load(
    velocity: &Vector3<f64>,
    normal: &Vector3<f64>,
    rho: f64,
    area: impl FnOnce(&Vector3<f64>) -> f64,
    drag_model: &CoefficientModel,
    lift_model: &CoefficientModel,
) -> SurfaceLoad {
    let speed = velocity.norm();
    if speed < SPEED_EPS {
        return SurfaceLoad::default();
    }
    let dir = velocity / speed;
    let incidence = normal.dot(&dir).clamp(-1.0, 1.0);
    let alpha = incidence.asin();
    let q = 0.5 * rho * speed * speed * area(&dir);

    let drag = -dir * (q * drag_model.eval(alpha));

    let s = alpha.abs().sin();
    let branch = if incidence > 0.0 {
        dir * s - normal
    } else {
        dir * s + normal
    };
    let branch_norm = branch.norm();
    let lift = if branch_norm < DIRECTION_EPS {
        Vector3::zeros()
    } else {
        branch * (q * lift_model.eval(alpha) / branch_norm)
    };

    SurfaceLoad {
        lift: BodyVec::from_vector(lift),
        drag: BodyVec::from_vector(drag),
        alpha,
    }
}

/// `O_b → C_pt`, the tail centre of pressure.
pub fn tail_cop_offset(tail_angle: f64, geo: &ActuatorGeometry) -> BodyVec {
    let (s, c) = tail_angle.sin_cos();
    let o = &geo.tail_origin;
    BodyVec::new(o.x - geo.tail_radius * c, o.y - geo.tail_radius * s, o.z)
}

/// `O_t → C_pt`.
pub fn tail_hinge_to_cop(tail_angle: f64, geo: &ActuatorGeometry) -> BodyVec {
    let (s, c) = tail_angle.sin_cos();
    BodyVec::new(-geo.tail_radius * c, -geo.tail_radius * s, 0.0)
}

/// Unit normal of the tail plate.
pub fn tail_normal(tail_angle: f64) -> BodyVec {
    let (s, c) = tail_angle.sin_cos();
    BodyVec::new(-s, c, 0.0)
}

/// Velocity of the tail centre of pressure, `V_b + ω_b × O_bC_pt + ω_t × O_tC_pt`.
pub fn tail_cop_velocity(
    state: &BodyState,
    tail_angle: f64,
    tail_rate: f64,
    geo: &ActuatorGeometry,
) -> BodyVec {
    let lever = tail_cop_offset(tail_angle, geo);
    let arm = tail_hinge_to_cop(tail_angle, geo);
    let tail_omega = Vector3::new(0.0, 0.0, tail_rate);
    BodyVec::from_vector(
        state.velocity.vec()
            + state.angular_velocity.vec().cross(lever.vec())
            + tail_omega.cross(arm.vec()),
    )
}

pub fn tail_forces(cop_velocity: &BodyVec, tail_angle: f64, params: &HydroParams) -> SurfaceLoad {
    surface_load(
        cop_velocity.vec(),
        tail_normal(tail_angle).vec(),
        params.rho,
        |_| params.tail_area,
        params.model(CoefficientFamily::TailDrag),
        params.model(CoefficientFamily::TailLift),
    )
}

pub fn tail_torque(cop_offset: &BodyVec, force: &BodyVec) -> BodyVec {
    BodyVec::from_vector(cop_offset.vec().cross(force.vec()))
}

/// Body plane: 1 is the `x_b–z_b` plane (normal `ẑ_b`), 2 the `x_b–y_b` plane (normal `ŷ_b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyPlane {
    Vertical,
    Lateral,
}

impl BodyPlane {
    /// In-plane projection `V_bi` of the body velocity.
    pub fn project(self, velocity: &BodyVec) -> Vector3<f64> {
        let v = velocity.vec();
        match self {
            Self::Vertical => Vector3::new(v.x, 0.0, v.z),
            Self::Lateral => Vector3::new(v.x, v.y, 0.0),
        }
    }

    pub fn normal(self) -> Vector3<f64> {
        match self {
            Self::Vertical => Vector3::z(),
            Self::Lateral => Vector3::y(),
        }
    }

    /// Reference area `V̂ᵀ A_i V̂` with a diagonal area tensor.
    pub fn area(self, unit: &Vector3<f64>, area: &Vector3<f64>) -> f64 {
        match self {
            Self::Vertical => area.x * unit.x * unit.x + area.z * unit.z * unit.z,
            Self::Lateral => area.x * unit.x * unit.x + area.y * unit.y * unit.y,
        }
    }

    fn families(self) -> (CoefficientFamily, CoefficientFamily, CoefficientFamily) {
        match self {
            Self::Vertical => (
                CoefficientFamily::BodyDragVertical,
                CoefficientFamily::BodyLiftVertical,
                CoefficientFamily::ImpactPitch,
            ),
            Self::Lateral => (
                CoefficientFamily::BodyDragLateral,
                CoefficientFamily::BodyLiftLateral,
                CoefficientFamily::ImpactYaw,
            ),
        }
    }
}

pub fn body_plane_forces(state: &BodyState, plane: BodyPlane, params: &HydroParams) -> SurfaceLoad {
    let (drag, lift, _) = plane.families();
    surface_load(
        &plane.project(&state.velocity),
        &plane.normal(),
        params.rho,
        |unit| plane.area(unit, &params.area),
        params.model(drag),
        params.model(lift),
    )
}

/// `diag(C_ω)·ω_b`.
pub fn damping_torque(angular_velocity: &BodyVec, params: &HydroParams) -> BodyVec {
    BodyVec::from_vector(params.damping.component_mul(angular_velocity.vec()))
}

/// Flow-impact torque. The x component is identically zero; the y and z
/// components use the signed attack angle of the vertical and lateral plane.
pub fn impact_torque(
    state: &BodyState,
    alpha_vertical: f64,
    alpha_lateral: f64,
    params: &HydroParams,
) -> BodyVec {
    let component = |plane: BodyPlane, alpha: f64| {
        let v = plane.project(&state.velocity);
        let speed = v.norm();
        if speed < SPEED_EPS {
            return 0.0;
        }
        let (_, _, family) = plane.families();
        0.5 * params.rho
            * speed
            * speed
            * plane.area(&(v / speed), &params.area)
            * params.model(family).eval_signed(alpha)
    };
    BodyVec::new(
        0.0,
        component(BodyPlane::Vertical, alpha_vertical),
        component(BodyPlane::Lateral, alpha_lateral),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityBuoyancy {
    pub gravity: BodyVec,
    pub buoyancy: BodyVec,
    /// `O_bC_m × F_g`.
    pub moment: BodyVec,
}

pub fn gravity_buoyancy(
    att: &Attitude,
    mass: &MassModel,
    center_of_mass: &BodyVec,
) -> GravityBuoyancy {
    let g_body = rotation_body_to_inertial(att).transpose() * gravity_inertial();
    let gravity = g_body * mass.total;
    let buoyancy = -g_body * mass.buoyancy;
    GravityBuoyancy {
        gravity: BodyVec::from_vector(gravity),
        buoyancy: BodyVec::from_vector(buoyancy),
        moment: BodyVec::from_vector(center_of_mass.vec().cross(&gravity)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::InertialVec;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn params() -> HydroParams {
        HydroParams {
            rho: 1000.0,
            tail_area: 0.005,
            area: Vector3::new(0.012, 0.023, 0.02),
            damping: Vector3::new(-0.01, -0.02, -0.01),
            coefficients: CoefficientSet::nominal(),
        }
    }

    fn geo() -> ActuatorGeometry {
        ActuatorGeometry {
            bracket_origin: Vector3::new(0.03, 0.0, -0.035),
            tail_origin: Vector3::new(-0.11, 0.0, 0.0),
            d1: 0.02,
            d2: 0.015,
            d3: 0.01,
            slider_neutral: 0.03,
            tail_radius: 0.04,
            slider_range: (-0.02, 0.02),
        }
    }

    fn moving(v: [f64; 3], w: [f64; 3]) -> BodyState {
        BodyState {
            position: InertialVec::zeros(),
            attitude: Attitude::default(),
            velocity: BodyVec::new(v[0], v[1], v[2]),
            angular_velocity: BodyVec::new(w[0], w[1], w[2]),
        }
    }

    #[test]
    fn stagnant_tail_has_no_velocity_or_load() {
        let v = tail_cop_velocity(&moving([0.0; 3], [0.0; 3]), 0.3, 0.0, &geo());
        assert_eq!(v, BodyVec::zeros());
        let load = tail_forces(&v, 0.3, &params());
        assert_eq!(load.total(), BodyVec::zeros());
        assert_eq!(load.alpha, 0.0);
    }

    #[test]
    fn pure_translation_moves_tail_with_body() {
        let v = tail_cop_velocity(&moving([1.0, 0.0, 0.0], [0.0; 3]), 0.3, 0.0, &geo());
        assert_eq!(v, BodyVec::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn flow_along_tail_plane_has_zero_attack() {
        let p = params();
        let xi: f64 = 0.2;
        let along = BodyVec::new(xi.cos(), xi.sin(), 0.0) * 0.4;
        let load = tail_forces(&along, xi, &p);
        assert_abs_diff_eq!(load.alpha, 0.0, epsilon = 1e-15);
        let q = 0.5 * p.rho * 0.16 * p.tail_area;
        assert_abs_diff_eq!(
            load.lift.norm(),
            q * p.coefficients.get(CoefficientFamily::TailLift).eval(0.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            load.drag.norm(),
            q * p.coefficients.get(CoefficientFamily::TailDrag).eval(0.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn normal_incidence_drops_lift() {
        let p = params();
        let xi: f64 = 0.2;
        let n = tail_normal(xi);
        let load = tail_forces(&n, xi, &p);
        assert_abs_diff_eq!(load.alpha, PI / 2.0, epsilon = 1e-7);
        assert_eq!(load.lift, BodyVec::zeros());
        let full = 0.5
            * p.rho
            * p.tail_area
            * p.coefficients
                .get(CoefficientFamily::TailDrag)
                .eval(PI / 2.0);
        assert_abs_diff_eq!(*load.drag.vec(), -n.vec() * full, epsilon = 1e-12);
    }

    #[test]
    fn lift_is_perpendicular_and_drag_dissipative() {
        let p = params();
        for (k, xi) in [(-0.4, 0.3), (0.7, -0.1), (0.05, 0.5)] {
            let v = BodyVec::new(0.3, k, 0.1);
            let load = tail_forces(&v, xi, &p);
            let dir = v.vec().normalize();
            assert_abs_diff_eq!(load.lift.vec().dot(&dir), 0.0, epsilon = 1e-12);
            assert!(load.drag.vec().dot(v.vec()) <= 0.0);
        }
    }

    #[test]
    fn lift_pushes_away_from_struck_side() {
        let p = params();
        // Tail along the body axis moving to port: flow strikes the port face.
        let load = tail_forces(&BodyVec::new(0.3, 0.1, 0.0), 0.0, &p);
        assert!(load.alpha > 0.0);
        assert!(load.lift.y() < 0.0);
        assert!(load.lift.x() > 0.0);
    }

    #[test]
    fn tail_torque_examples() {
        let r = BodyVec::new(-0.15, 0.01, 0.0);
        assert_eq!(tail_torque(&r, &BodyVec::zeros()), BodyVec::zeros());
        assert_eq!(tail_torque(&r, &(r * 3.0)), BodyVec::zeros());
        let f = BodyVec::new(0.0, 1.0, 0.0);
        assert_abs_diff_eq!(
            *tail_torque(&r, &f).vec(),
            Vector3::new(0.0, 0.0, -0.15),
            epsilon = 1e-15
        );
    }

    #[test]
    fn pure_surge_body_loads() {
        let p = params();
        let u = 0.25;
        let s = moving([u, 0.0, 0.0], [0.0; 3]);
        let q = 0.5 * p.rho * u * u * p.area.x;
        for (plane, drag) in [
            (BodyPlane::Vertical, CoefficientFamily::BodyDragVertical),
            (BodyPlane::Lateral, CoefficientFamily::BodyDragLateral),
        ] {
            let load = body_plane_forces(&s, plane, &p);
            assert_eq!(load.alpha, 0.0);
            assert_abs_diff_eq!(
                *load.drag.vec(),
                Vector3::new(-q * p.coefficients.get(drag).eval(0.0), 0.0, 0.0),
                epsilon = 1e-15
            );
            assert_eq!(load.lift, BodyVec::zeros());
        }
    }

    #[test]
    fn pure_heave_is_normal_incidence_on_vertical_plane() {
        let p = params();
        for w in [0.2, -0.2] {
            let s = moving([0.0, 0.0, w], [0.0; 3]);
            let load = body_plane_forces(&s, BodyPlane::Vertical, &p);
            assert_abs_diff_eq!(load.alpha, PI / 2.0 * f64::signum(w), epsilon = 1e-7);
            let unit = Vector3::new(0.0, 0.0, f64::signum(w));
            assert_eq!(BodyPlane::Vertical.area(&unit, &p.area), p.area.z);
            assert_eq!(load.lift, BodyVec::zeros());
            // Lateral plane sees no in-plane flow.
            assert_eq!(
                body_plane_forces(&s, BodyPlane::Lateral, &p),
                SurfaceLoad::default()
            );
        }
    }

    #[test]
    fn damping_examples() {
        let mut p = params();
        assert_eq!(damping_torque(&BodyVec::zeros(), &p), BodyVec::zeros());
        p.damping = Vector3::new(-0.02, -0.03, -0.01);
        assert_eq!(
            damping_torque(&BodyVec::new(0.0, 0.0, 1.0), &p),
            BodyVec::new(0.0, 0.0, -0.01)
        );
    }

    #[test]
    fn impact_torque_has_no_roll_component() {
        let p = params();
        assert_eq!(
            impact_torque(&moving([0.0; 3], [0.0; 3]), 0.0, 0.0, &p),
            BodyVec::zeros()
        );
        let s = moving([0.3, 0.1, -0.05], [0.0; 3]);
        let a1 = body_plane_forces(&s, BodyPlane::Vertical, &p).alpha;
        let a2 = body_plane_forces(&s, BodyPlane::Lateral, &p).alpha;
        let m = impact_torque(&s, a1, a2, &p);
        assert_eq!(m.x(), 0.0);
        assert!(m.y() != 0.0 && m.z() != 0.0);
    }

    #[test]
    fn gravity_examples() {
        let mut mass = MassModel {
            total: 1.8,
            block: 0.2,
            buoyancy: 1.8,
            static_moment: Vector3::zeros(),
            block_inertia: Vector3::repeat(1e-5),
            body_inertia: Vector3::repeat(1e-3),
        };
        let gb = gravity_buoyancy(&Attitude::default(), &mass, &BodyVec::zeros());
        assert_eq!(gb.gravity + gb.buoyancy, BodyVec::zeros());
        assert_eq!(gb.moment, BodyVec::zeros());

        mass.buoyancy = 1.7;
        let theta: f64 = 0.3;
        let gb = gravity_buoyancy(&Attitude::new(0.0, theta, 0.0), &mass, &BodyVec::zeros());
        // Nose-down pitch puts a forward component of weight along x_b.
        assert_abs_diff_eq!(
            gb.gravity.x(),
            mass.total * G0 * theta.sin(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            gb.gravity.z(),
            -mass.total * G0 * theta.cos(),
            epsilon = 1e-12
        );
    }
}
