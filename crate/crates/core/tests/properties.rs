//! Randomized properties of the kinematics, actuation and load models.

mod common;

use fishsim::actuation::{
    center_of_mass, inertia_about_origin, tail_angle, tail_rate, BlockCommand, TailGait,
};
use fishsim::dynamics::{applied_wrench, Scenario};
use fishsim::frames::{
    body_rates_to_euler_rates, body_to_inertial, inertial_to_body, rotation_body_to_inertial,
    Attitude, BodyState, BodyVec, InertialVec,
};
use fishsim::hydro::{body_plane_forces, tail_forces, BodyPlane};
use fishsim::VehicleParams;
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn attitude() -> impl Strategy<Value = Attitude> {
    (-3.1f64..3.1, -1.5f64..1.5, -10.0f64..10.0).prop_map(|(r, p, y)| Attitude::new(r, p, y))
}

fn vec3(scale: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn state() -> impl Strategy<Value = BodyState> {
    (attitude(), vec3(0.5), vec3(1.5)).prop_map(|(attitude, v, w)| BodyState {
        attitude: Attitude::new(attitude.roll, attitude.pitch.clamp(-1.2, 1.2), attitude.yaw),
        velocity: BodyVec::from_vector(v),
        angular_velocity: BodyVec::from_vector(w),
        ..BodyState::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rotation_is_orthonormal(att in attitude()) {
        let r = rotation_body_to_inertial(&att);
        let err = (r.transpose() * r - Matrix3::identity()).amax();
        prop_assert!(err < 1e-12, "{err}");
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_round_trips(att in attitude(), v in vec3(10.0)) {
        let back = body_to_inertial(&att, &inertial_to_body(&att, &InertialVec::from_vector(v)));
        prop_assert!((back.vec() - v).amax() < 1e-12);
        let back = inertial_to_body(&att, &body_to_inertial(&att, &BodyVec::from_vector(v)));
        prop_assert!((back.vec() - v).amax() < 1e-12);
    }

    #[test]
    fn euler_rates_follow_finite_differences(att in attitude(), w in vec3(1.0)) {
        prop_assume!(att.pitch.abs() < 1.2);
        // Advance R by the exact body-frame rotation and difference the angles.
        let h = 1e-6;
        let r0 = rotation_body_to_inertial(&att);
        let step = nalgebra::Rotation3::new(w * h).into_inner();
        let r1 = r0 * step;
        let roll = r1[(2, 1)].atan2(r1[(2, 2)]);
        let pitch = -r1[(2, 0)].asin();
        let yaw = r1[(1, 0)].atan2(r1[(0, 0)]);
        let wrap = |a: f64| (a + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
        let fd = Vector3::new(wrap(roll - att.roll), wrap(pitch - att.pitch), wrap(yaw - att.yaw)) / h;
        let rates = body_rates_to_euler_rates(&att, &BodyVec::from_vector(w)).unwrap();
        prop_assert!((fd - rates).amax() < 1e-4 * (1.0 + rates.amax()), "{fd} vs {rates}");
    }

    #[test]
    fn center_of_mass_is_affine_in_travel(d1 in -0.02f64..0.02, d2 in -0.02f64..0.02, a in 0.0f64..1.0, xi in -3.0f64..3.0) {
        let v = VehicleParams::nominal();
        let c = |d: f64| center_of_mass(&BlockCommand::new(d, xi), &v.mass, &v.geometry).unwrap().into_vector();
        let mix = c(a * d1 + (1.0 - a) * d2);
        let lin = c(d1) * a + c(d2) * (1.0 - a);
        prop_assert!((mix - lin).amax() < 1e-15);
    }

    #[test]
    fn center_of_mass_is_affine_in_bracket_trig(xi in -3.1f64..3.1, d in -0.02f64..0.02) {
        let v = VehicleParams::nominal();
        let c = |x: f64| center_of_mass(&BlockCommand::new(d, x), &v.mass, &v.geometry).unwrap().into_vector();
        // Fit A + B sin ξ + C cos ξ through three angles, then predict a fourth.
        let (c0, c1, c2) = (c(0.0), c(std::f64::consts::FRAC_PI_2), c(-std::f64::consts::FRAC_PI_2));
        let b = (c1 - c2) / 2.0;
        let a = (c1 + c2) / 2.0;
        let cc = c0 - a;
        let predicted = a + b * xi.sin() + cc * xi.cos();
        prop_assert!((c(xi) - predicted).amax() < 1e-15);
    }

    #[test]
    fn inertia_stays_positive(d in -0.02f64..0.02, xi in -3.1f64..3.1) {
        let v = VehicleParams::nominal();
        let j = inertia_about_origin(&BlockCommand::new(d, xi), &v.mass, &v.geometry).unwrap();
        prop_assert!(j.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn tail_rate_is_derivative_of_angle(off in -0.5f64..0.5, amp in 0.0f64..0.9, f in 0.0f64..4.0, t in 0.0f64..100.0) {
        prop_assume!(off.abs() + amp < 1.5);
        let g = TailGait::new(off, amp, f).unwrap();
        let h = 1e-6;
        let fd = (tail_angle(t + h, &g) - tail_angle(t - h, &g)) / (2.0 * h);
        prop_assert!((fd - tail_rate(t, &g)).abs() < 1e-6 * (1.0 + amp * f * 10.0));
    }

    #[test]
    fn loads_scale_with_speed_squared(s in state(), k in 0.1f64..5.0, xi in -1.0f64..1.0) {
        let p = VehicleParams::nominal().hydro;
        let scaled = BodyState { velocity: s.velocity * k, ..s };
        for plane in [BodyPlane::Vertical, BodyPlane::Lateral] {
            let a = body_plane_forces(&s, plane, &p);
            let b = body_plane_forces(&scaled, plane, &p);
            prop_assert!((b.total().vec() - a.total().vec() * k * k).amax() < 1e-12 * (1.0 + k * k));
        }
        let a = tail_forces(&s.velocity, xi, &p);
        let b = tail_forces(&(s.velocity * k), xi, &p);
        prop_assert!((b.total().vec() - a.total().vec() * k * k).amax() < 1e-12 * (1.0 + k * k));
    }

    #[test]
    fn lift_is_perpendicular_and_drag_dissipates(s in state(), xi in -1.0f64..1.0) {
        let p = VehicleParams::nominal().hydro;
        for plane in [BodyPlane::Vertical, BodyPlane::Lateral] {
            let flow = plane.project(&s.velocity);
            let load = body_plane_forces(&s, plane, &p);
            prop_assert!(load.drag.vec().dot(&flow) <= 0.0);
            if flow.norm() > 1e-6 {
                prop_assert!(load.lift.vec().dot(&flow.normalize()).abs() < 1e-9);
            }
        }
        let load = tail_forces(&s.velocity, xi, &p);
        prop_assert!(load.drag.vec().dot(s.velocity.vec()) <= 0.0);
        if s.velocity.norm() > 1e-6 {
            prop_assert!(load.lift.vec().dot(&s.velocity.vec().normalize()).abs() < 1e-9);
        }
    }

    #[test]
    fn wrench_mirrors_with_the_state(s in state(), t in 0.0f64..10.0, off in -0.4f64..0.4, amp in 0.0f64..0.6) {
        let gait = TailGait::new(off, amp, 1.7).unwrap();
        let sc = Scenario::new(VehicleParams::nominal(), gait, BlockCommand::NEUTRAL, 1.0);
        let mirrored_sc = Scenario { gait: gait.mirrored(), ..sc.clone() };
        let m = BodyState {
            position: InertialVec::new(s.position.x(), -s.position.y(), s.position.z()),
            attitude: Attitude::new(-s.attitude.roll, s.attitude.pitch, -s.attitude.yaw),
            velocity: BodyVec::new(s.velocity.x(), -s.velocity.y(), s.velocity.z()),
            angular_velocity: BodyVec::new(-s.angular_velocity.x(), s.angular_velocity.y(), -s.angular_velocity.z()),
        };
        let a = applied_wrench(&s, t, &sc).unwrap().total();
        let b = applied_wrench(&m, t, &mirrored_sc).unwrap().total();
        let flip = Vector3::new(1.0, -1.0, 1.0);
        prop_assert!((b.force.vec() - a.force.vec().component_mul(&flip)).amax() < 1e-12);
        prop_assert!((b.torque.vec() + a.torque.vec().component_mul(&flip)).amax() < 1e-12);
        prop_assert_eq!(applied_wrench(&s, t, &sc).unwrap().impact.x(), 0.0);
    }
}
