//! Newton–Euler model and time integration.
//!
//! Translational and rotational balances are written about `O_b` in the
//! body frame and rearranged as a 6×6 linear system
//! `M(q)·[V̇_b; ω̇_b] = τ − b(q, ν)`, with `τ` the applied wrench and `b`
//! collecting the velocity-product terms. The system is solved numerically
//! at every right-hand-side evaluation.
//!
//! The block command is held fixed within a scenario. `C_m` and `J` are
//! still rederived from it at each evaluation.

pub mod integrator;
pub mod trajectory;

use nalgebra::{Matrix6, Vector3, Vector6};
use thiserror::Error;

use crate::actuation::{
    center_of_mass, inertia_about_origin, tail_angle, tail_rate, ActuationError, BlockCommand,
    TailGait,
};
use crate::frames::{
    body_rates_to_euler_rates, body_velocity_to_inertial, Attitude, BodyState, BodyVec, GimbalLock,
};
use crate::hydro::{
    body_plane_forces, damping_torque, gravity_buoyancy, impact_torque, tail_cop_offset,
    tail_cop_velocity, tail_forces, tail_torque, BodyPlane, Wrench,
};
use crate::vehicle::VehicleParams;

pub use integrator::Integrator;
pub use trajectory::{Sample, Trajectory};

/// Default integration step, s.
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    GimbalLock(#[from] GimbalLock),
    #[error("state became non-finite at t = {t} s (suspect term: {term})")]
    NonFinite { t: f64, term: String },
    #[error("singular 6x6 mass matrix")]
    SingularMass,
    #[error(transparent)]
    Actuation(#[from] ActuationError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl DynamicsError {
    /// Numeric breakdowns as opposed to bad inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Self::GimbalLock(_) | Self::NonFinite { .. } | Self::SingularMass
        )
    }
}

/// One simulation run: vehicle, commands, initial state and stepping.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub vehicle: VehicleParams,
    pub gait: TailGait,
    pub block: BlockCommand,
    pub initial: BodyState,
    pub duration: f64,
    pub dt: f64,
    pub integrator: Integrator,
}

impl Scenario {
    /// Default vehicle at rest with the given commands, `dt = 1 ms`, RK4.
    pub fn new(vehicle: VehicleParams, gait: TailGait, block: BlockCommand, duration: f64) -> Self {
        Self {
            vehicle,
            gait,
            block,
            initial: BodyState::default(),
            duration,
            dt: DEFAULT_DT,
            integrator: Integrator::Rk4,
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let invalid = |m: String| Err(DynamicsError::InvalidScenario(m));
        self.vehicle
            .validate()
            .map_err(DynamicsError::InvalidScenario)?;
        self.gait.validate()?;
        self.block.validate(&self.vehicle.geometry)?;
        if !self.initial.is_finite() {
            return invalid("initial state is not finite".into());
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return invalid(format!("duration {} s must be positive", self.duration));
        }
        if !(self.dt > 0.0 && self.dt <= self.duration) {
            return invalid(format!("dt {} s must lie in (0, duration]", self.dt));
        }
        let n = self.steps() as f64;
        if (n * self.dt - self.duration).abs() > 1e-9 * self.duration.max(1.0) {
            return invalid(format!(
                "duration {} s is not a whole number of {} s steps",
                self.duration, self.dt
            ));
        }
        if self.gait.frequency > 0.0 && self.dt > 1.0 / (20.0 * self.gait.frequency) * (1.0 + 1e-12)
        {
            return invalid(format!(
                "dt {} s does not resolve a {} Hz gait (need dt <= 1/(20 f))",
                self.dt, self.gait.frequency
            ));
        }
        Ok(())
    }
}

/// Every term entering the force and torque balances, body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WrenchBreakdown {
    pub gravity: BodyVec,
    pub buoyancy: BodyVec,
    pub body_lift_vertical: BodyVec,
    pub body_drag_vertical: BodyVec,
    pub body_lift_lateral: BodyVec,
    pub body_drag_lateral: BodyVec,
    pub tail_lift: BodyVec,
    pub tail_drag: BodyVec,
    pub gravity_moment: BodyVec,
    pub damping: BodyVec,
    pub tail_torque: BodyVec,
    pub impact: BodyVec,
    /// `−O_bC_m × F_total`.
    pub transfer: BodyVec,
    pub alpha_tail: f64,
    pub alpha_vertical: f64,
    pub alpha_lateral: f64,
    pub tail_angle: f64,
}

impl WrenchBreakdown {
    pub const TERM_NAMES: [&'static str; 13] = [
        "gravity",
        "buoyancy",
        "body_lift_vertical",
        "body_drag_vertical",
        "body_lift_lateral",
        "body_drag_lateral",
        "tail_lift",
        "tail_drag",
        "gravity_moment",
        "damping",
        "tail_torque",
        "impact",
        "transfer",
    ];

    pub fn terms(&self) -> [BodyVec; 13] {
        [
            self.gravity,
            self.buoyancy,
            self.body_lift_vertical,
            self.body_drag_vertical,
            self.body_lift_lateral,
            self.body_drag_lateral,
            self.tail_lift,
            self.tail_drag,
            self.gravity_moment,
            self.damping,
            self.tail_torque,
            self.impact,
            self.transfer,
        ]
    }

    pub fn total(&self) -> Wrench {
        let force = self.gravity
            + self.buoyancy
            + self.body_lift_vertical
            + self.body_drag_vertical
            + self.body_lift_lateral
            + self.body_drag_lateral
            + self.tail_lift
            + self.tail_drag;
        let torque =
            self.gravity_moment + self.damping + self.tail_torque + self.impact + self.transfer;
        Wrench { force, torque }
    }

    /// Name of the first non-finite term, else of the largest one.
    pub fn suspect_term(&self) -> &'static str {
        let terms = self.terms();
        if let Some(i) = terms.iter().position(|v| !v.is_finite()) {
            return Self::TERM_NAMES[i];
        }
        let i = terms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        Self::TERM_NAMES[i]
    }
}

/// Sum of all fluid, gravity and buoyancy loads at `(state, t)`.
pub fn applied_wrench(
    state: &BodyState,
    t: f64,
    scenario: &Scenario,
) -> Result<WrenchBreakdown, DynamicsError> {
    let v = &scenario.vehicle;
    let c_m = center_of_mass(&scenario.block, &v.mass, &v.geometry)?;
    Ok(wrench_terms(state, t, scenario, &c_m))
}

fn wrench_terms(state: &BodyState, t: f64, scenario: &Scenario, c_m: &BodyVec) -> WrenchBreakdown {
    let v = &scenario.vehicle;
    let xi = tail_angle(t, &scenario.gait);
    let xi_dot = tail_rate(t, &scenario.gait);

    let gb = gravity_buoyancy(&state.attitude, &v.mass, c_m);
    let vertical = body_plane_forces(state, BodyPlane::Vertical, &v.hydro);
    let lateral = body_plane_forces(state, BodyPlane::Lateral, &v.hydro);

    let lever = tail_cop_offset(xi, &v.geometry);
    let cop_velocity = tail_cop_velocity(state, xi, xi_dot, &v.geometry);
    let tail = tail_forces(&cop_velocity, xi, &v.hydro);

    let force_total = gb.gravity
        + gb.buoyancy
        + vertical.lift
        + vertical.drag
        + lateral.lift
        + lateral.drag
        + tail.lift
        + tail.drag;

    WrenchBreakdown {
        gravity: gb.gravity,
        buoyancy: gb.buoyancy,
        body_lift_vertical: vertical.lift,
        body_drag_vertical: vertical.drag,
        body_lift_lateral: lateral.lift,
        body_drag_lateral: lateral.drag,
        tail_lift: tail.lift,
        tail_drag: tail.drag,
        gravity_moment: gb.moment,
        damping: damping_torque(&state.angular_velocity, &v.hydro),
        tail_torque: tail_torque(&lever, &tail.total()),
        impact: impact_torque(state, vertical.alpha, lateral.alpha, &v.hydro),
        transfer: -BodyVec::from_vector(c_m.vec().cross(force_total.vec())),
        alpha_tail: tail.alpha,
        alpha_vertical: vertical.alpha,
        alpha_lateral: lateral.alpha,
        tail_angle: xi,
    }
}

/// `M(q)·a + b = τ` with `a = [V̇_b; ω̇_b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedSystem {
    pub mass: Matrix6<f64>,
    pub bias: Vector6<f64>,
}

impl GeneralizedSystem {
    pub fn solve(&self, applied: &Vector6<f64>) -> Result<Vector6<f64>, DynamicsError> {
        let rhs = applied - self.bias;
        self.mass
            .lu()
            .solve(&rhs)
            .ok_or(DynamicsError::SingularMass)
    }

    /// 2-norm condition number of `M`.
    pub fn condition_number(&self) -> f64 {
        let sv = self.mass.singular_values();
        sv.max() / sv.min()
    }
}

pub fn mass_matrix_and_bias(
    state: &BodyState,
    center_of_mass: &BodyVec,
    inertia: &Vector3<f64>,
    total_mass: f64,
) -> GeneralizedSystem {
    let m = total_mass;
    let c = center_of_mass.vec();
    let (xc, yc, zc) = (c.x, c.y, c.z);
    let v = state.velocity.vec();
    let w = state.angular_velocity.vec();
    let (vx, vy, vz) = (v.x, v.y, v.z);
    let (wx, wy, wz) = (w.x, w.y, w.z);
    let (jxx, jyy, jzz) = (inertia.x, inertia.y, inertia.z);

    #[rustfmt::skip]
    let mass = Matrix6::new(
        m,        0.0,      0.0,      0.0,      m * zc,   -m * yc,
        0.0,      m,        0.0,      -m * zc,  0.0,      m * xc,
        0.0,      0.0,      m,        m * yc,   -m * xc,  0.0,
        0.0,      -m * zc,  m * yc,   jxx,      0.0,      0.0,
        m * zc,   0.0,      -m * xc,  0.0,      jyy,      0.0,
        -m * yc,  m * xc,   0.0,      0.0,      0.0,      jzz,
    );

    let bias = Vector6::new(
        m * (-vy * wz + vz * wy - xc * (wz * wz + wy * wy) + yc * wx * wy + zc * wx * wz),
        m * (-vz * wx + vx * wz - yc * (wx * wx + wz * wz) + zc * wy * wz + xc * wx * wy),
        m * (-vx * wy + vy * wx - zc * (wy * wy + wx * wx) + xc * wz * wx + yc * wy * wz),
        (jzz - jyy) * wy * wz + m * (yc * (vy * wx - vx * wy) - zc * (vx * wz - vz * wx)),
        (jxx - jzz) * wz * wx + m * (zc * (vz * wy - vy * wz) - xc * (vy * wx - vx * wy)),
        (jyy - jxx) * wx * wy + m * (xc * (vx * wz - vz * wx) - yc * (vz * wy - vy * wz)),
    );

    GeneralizedSystem { mass, bias }
}

/// Body-frame linear and angular accelerations.
pub fn accelerations(
    state: &BodyState,
    t: f64,
    scenario: &Scenario,
) -> Result<(Vector3<f64>, Vector3<f64>), DynamicsError> {
    let model = Model::new(scenario)?;
    let (acc, _) = model.accelerations(state, t)?;
    Ok(split(&acc))
}

fn split(a: &Vector6<f64>) -> (Vector3<f64>, Vector3<f64>) {
    (
        Vector3::new(a[0], a[1], a[2]),
        Vector3::new(a[3], a[4], a[5]),
    )
}

/// Scenario bound to its (fixed) mass configuration.
struct Model<'a> {
    scenario: &'a Scenario,
}

impl<'a> Model<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self, DynamicsError> {
        scenario.block.validate(&scenario.vehicle.geometry)?;
        Ok(Self { scenario })
    }

    fn mass_configuration(&self) -> (BodyVec, Vector3<f64>) {
        let v = &self.scenario.vehicle;
        let block = &self.scenario.block;
        // Validated in `new`.
        let c_m = center_of_mass(block, &v.mass, &v.geometry).expect("validated block command");
        let inertia =
            inertia_about_origin(block, &v.mass, &v.geometry).expect("validated block command");
        (c_m, inertia)
    }

    fn accelerations(
        &self,
        state: &BodyState,
        t: f64,
    ) -> Result<(Vector6<f64>, WrenchBreakdown), DynamicsError> {
        let (c_m, inertia) = self.mass_configuration();
        let terms = wrench_terms(state, t, self.scenario, &c_m);
        let w = terms.total();
        let applied = Vector6::new(
            w.force.x(),
            w.force.y(),
            w.force.z(),
            w.torque.x(),
            w.torque.y(),
            w.torque.z(),
        );
        let system = mass_matrix_and_bias(state, &c_m, &inertia, self.scenario.vehicle.mass.total);
        let acc = system.solve(&applied)?;
        if !acc.iter().all(|x| x.is_finite()) {
            return Err(DynamicsError::NonFinite {
                t,
                term: terms.suspect_term().to_owned(),
            });
        }
        Ok((acc, terms))
    }

    /// Time derivative of the packed 12-state.
    fn derivative(
        &self,
        t: f64,
        y: &[f64; 12],
    ) -> Result<([f64; 12], WrenchBreakdown), DynamicsError> {
        let state = BodyState::from_array(y);
        let pos_rate = body_velocity_to_inertial(&state.attitude, &state.velocity);
        let att_rate = body_rates_to_euler_rates(&state.attitude, &state.angular_velocity)?;
        let (acc, terms) = self.accelerations(&state, t)?;
        let p = pos_rate.vec();
        Ok((
            [
                p.x, p.y, p.z, att_rate.x, att_rate.y, att_rate.z, acc[0], acc[1], acc[2], acc[3],
                acc[4], acc[5],
            ],
            terms,
        ))
    }

    fn non_finite(&self, state: &BodyState, t: f64) -> DynamicsError {
        let (c_m, _) = self.mass_configuration();
        let term = wrench_terms(state, t, self.scenario, &c_m).suspect_term();
        DynamicsError::NonFinite {
            t,
            term: term.to_owned(),
        }
    }

    fn advance(
        &self,
        state: &BodyState,
        t: f64,
        dt: f64,
        k1: &[f64; 12],
    ) -> Result<BodyState, DynamicsError> {
        let mut rhs = |t: f64, y: &[f64; 12]| self.derivative(t, y).map(|(d, _)| d);
        let y = integrator::step_with_slope(
            self.scenario.integrator,
            &mut rhs,
            t,
            &state.to_array(),
            dt,
            k1,
        )?;
        let next = BodyState::from_array(&y);
        if next.is_finite() {
            Ok(next)
        } else {
            Err(self.non_finite(state, t))
        }
    }
}

/// One integrator step of the full 12-state.
pub fn step(
    state: &BodyState,
    t: f64,
    dt: f64,
    scenario: &Scenario,
) -> Result<BodyState, DynamicsError> {
    if !(dt > 0.0) {
        return Err(DynamicsError::InvalidScenario(format!(
            "dt {dt} must be positive"
        )));
    }
    let model = Model::new(scenario)?;
    let (k1, _) = model.derivative(t, &state.to_array())?;
    model.advance(state, t, dt, &k1)
}

/// A run that stopped early. `partial` holds every sample reached.
#[derive(Debug, Clone, Error)]
#[error("simulation aborted after {} samples: {cause}", partial.len())]
pub struct SimulationFailure {
    pub partial: Trajectory,
    pub cause: DynamicsError,
}

/// Integrates the scenario from `t = 0` to `duration`, recording every step.
pub fn simulate(scenario: &Scenario) -> Result<Trajectory, SimulationFailure> {
    let fail = |partial: Trajectory, cause| SimulationFailure { partial, cause };
    let empty = || Trajectory::new(Some(scenario.gait), scenario.dt);
    if let Err(cause) = scenario.validate() {
        return Err(fail(empty(), cause));
    }
    let model = Model::new(scenario).map_err(|cause| fail(empty(), cause))?;

    let steps = scenario.steps();
    let mut traj = Trajectory::with_capacity(Some(scenario.gait), scenario.dt, steps + 1);
    let mut state = scenario.initial;
    for k in 0..=steps {
        let t = k as f64 * scenario.dt;
        let (k1, terms) = match model.derivative(t, &state.to_array()) {
            Ok(v) => v,
            Err(cause) => return Err(fail(traj, cause)),
        };
        let euler_rates = Vector3::new(k1[3], k1[4], k1[5]);
        traj.push(Sample::new(
            t,
            state,
            euler_rates,
            terms.tail_angle,
            Some(terms),
        ));
        if k == steps {
            break;
        }
        state = match model.advance(&state, t, scenario.dt, &k1) {
            Ok(next) => next,
            Err(cause) => return Err(fail(traj, cause)),
        };
    }
    Ok(traj)
}

/// `½ m |V_b + ω×c|² + ½ ωᵀ J_c ω`, written with the inertia about `O_b`.
pub fn kinetic_energy(
    state: &BodyState,
    center_of_mass: &BodyVec,
    inertia: &Vector3<f64>,
    total_mass: f64,
) -> f64 {
    let v = state.velocity.vec();
    let w = state.angular_velocity.vec();
    0.5 * total_mass * v.norm_squared()
        + total_mass * v.dot(&w.cross(center_of_mass.vec()))
        + 0.5 * w.dot(&inertia.component_mul(w))
}

/// Mass configuration `(C_m, J)` of a scenario.
pub fn mass_configuration(scenario: &Scenario) -> Result<(BodyVec, Vector3<f64>), DynamicsError> {
    let v = &scenario.vehicle;
    Ok((
        center_of_mass(&scenario.block, &v.mass, &v.geometry)?,
        inertia_about_origin(&scenario.block, &v.mass, &v.geometry)?,
    ))
}

/// Attitude helper for building initial states.
pub fn state_at_rest(attitude: Attitude) -> BodyState {
    BodyState {
        attitude,
        ..BodyState::default()
    }
}
