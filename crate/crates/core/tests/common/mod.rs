#![allow(dead_code)]

use fishsim::actuation::{BlockCommand, TailGait};
use fishsim::dynamics::{Sample, Scenario, Trajectory};
use fishsim::frames::{inertial_to_body, Attitude, BodyState, BodyVec, InertialVec};
use fishsim::VehicleParams;
use nalgebra::Vector3;
use rand::Rng;

pub fn deg(x: f64) -> f64 {
    x.to_radians()
}

/// Default vehicle with the given gait (degrees, Hz) and slider travel.
pub fn scenario(offset_deg: f64, amp_deg: f64, freq: f64, delta_d: f64, duration: f64) -> Scenario {
    let gait = TailGait::new(deg(offset_deg), deg(amp_deg), freq).unwrap();
    Scenario::new(
        VehicleParams::nominal(),
        gait,
        BlockCommand::new(delta_d, 0.0),
        duration,
    )
}

/// Same, starting at cruise speed rather than rest.
pub fn cruising(offset_deg: f64, amp_deg: f64, freq: f64, delta_d: f64, duration: f64) -> Scenario {
    let mut s = scenario(offset_deg, amp_deg, freq, delta_d, duration);
    s.initial.velocity = BodyVec::new(0.15, 0.0, 0.0);
    s
}

pub fn random_state<R: Rng>(rng: &mut R) -> BodyState {
    let mut u = |a: f64| rng.random_range(-a..a);
    BodyState {
        position: InertialVec::new(u(5.0), u(5.0), u(5.0)),
        attitude: Attitude::new(u(0.6), u(0.6), u(3.1)),
        velocity: BodyVec::new(u(0.4), u(0.2), u(0.2)),
        angular_velocity: BodyVec::new(u(1.0), u(1.0), u(1.0)),
    }
}

/// Largest residual of the six force and torque balance equations written
/// out component by component, with `acc = (V̇_b, ω̇_b)`.
#[allow(clippy::too_many_arguments)]
pub fn balance_residual(
    state: &BodyState,
    lin: &Vector3<f64>,
    ang: &Vector3<f64>,
    c_m: &Vector3<f64>,
    j: &Vector3<f64>,
    m: f64,
    force: &Vector3<f64>,
    torque: &Vector3<f64>,
) -> f64 {
    let (vx, vy, vz) = (state.velocity.x(), state.velocity.y(), state.velocity.z());
    let (wx, wy, wz) = (
        state.angular_velocity.x(),
        state.angular_velocity.y(),
        state.angular_velocity.z(),
    );
    let (dvx, dvy, dvz) = (lin.x, lin.y, lin.z);
    let (dwx, dwy, dwz) = (ang.x, ang.y, ang.z);
    let (x, y, z) = (c_m.x, c_m.y, c_m.z);
    let (jxx, jyy, jzz) = (j.x, j.y, j.z);

    let fx = m
        * (dvx - vy * wz + vz * wy - x * (wz * wz + wy * wy)
            + y * (wx * wy - dwz)
            + z * (wx * wz + dwy));
    let fy = m
        * (dvy - vz * wx + vx * wz - y * (wx * wx + wz * wz)
            + z * (wy * wz - dwx)
            + x * (wx * wy + dwz));
    let fz = m
        * (dvz - vx * wy + vy * wx - z * (wy * wy + wx * wx)
            + x * (wz * wx - dwy)
            + y * (wy * wz + dwx));
    let mx = jxx * dwx
        + (jzz - jyy) * wy * wz
        + m * (y * (dvz + vy * wx - vx * wy) - z * (dvy + vx * wz - vz * wx));
    let my = jyy * dwy
        + (jxx - jzz) * wz * wx
        + m * (z * (dvx + vz * wy - vy * wz) - x * (dvz + vy * wx - vx * wy));
    let mz = jzz * dwz
        + (jyy - jxx) * wx * wy
        + m * (x * (dvy + vx * wz - vz * wx) - y * (dvx + vz * wy - vy * wz));

    [
        fx - force.x,
        fy - force.y,
        fz - force.z,
        mx - torque.x,
        my - torque.y,
        mz - torque.z,
    ]
    .iter()
    .fold(0.0, |a, r| a.max(r.abs()))
}

/// Level vehicle moving along a horizontal circle (or helix when
/// `climb ≠ 0`) centred at `center`, heading tangent to the path.
pub fn helix(
    center: (f64, f64),
    radius: f64,
    yaw_rate: f64,
    climb: f64,
    duration: f64,
    dt: f64,
) -> Trajectory {
    let mut traj = Trajectory::new(None, dt);
    let n = (duration / dt).round() as usize;
    for k in 0..=n {
        let t = k as f64 * dt;
        let phase = yaw_rate * t;
        let pos = InertialVec::new(
            center.0 + radius * phase.cos(),
            center.1 + radius * phase.sin(),
            climb * t,
        );
        let v_inertial = InertialVec::new(
            -radius * yaw_rate * phase.sin(),
            radius * yaw_rate * phase.cos(),
            climb,
        );
        let yaw = phase + yaw_rate.signum() * std::f64::consts::FRAC_PI_2;
        let attitude = Attitude::new(0.0, 0.0, yaw);
        let state = BodyState {
            position: pos,
            attitude,
            velocity: inertial_to_body(&attitude, &v_inertial),
            angular_velocity: BodyVec::new(0.0, 0.0, yaw_rate),
        };
        traj.push(Sample::new(
            t,
            state,
            Vector3::new(0.0, 0.0, yaw_rate),
            0.0,
            None,
        ));
    }
    traj
}

/// Straight level path at constant inertial velocity.
pub fn straight(velocity: InertialVec, duration: f64, dt: f64) -> Trajectory {
    let mut traj = Trajectory::new(None, dt);
    let attitude = Attitude::default();
    let n = (duration / dt).round() as usize;
    for k in 0..=n {
        let t = k as f64 * dt;
        let state = BodyState {
            position: InertialVec::new(velocity.x() * t, velocity.y() * t, velocity.z() * t),
            attitude,
            velocity: inertial_to_body(&attitude, &velocity),
            angular_velocity: BodyVec::zeros(),
        };
        traj.push(Sample::new(t, state, Vector3::zeros(), 0.0, None));
    }
    traj
}

/// Relative difference `|a − b| / |b|`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
