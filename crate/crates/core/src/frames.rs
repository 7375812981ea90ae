//! Reference frames and Euler-angle kinematics.
//!
//! The inertial frame `O_I x_I y_I z_I` coincides with the body frame at
//! `t = 0`. Body axes: `x_b` forward, `y_b` to port, `z_b` up. Attitude is the
//! Z-Y-X (yaw, pitch, roll) Euler sequence.

use std::f64::consts::PI;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Threshold on `|cos θ|` below which the Euler-rate map is refused.
pub const GIMBAL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("gimbal lock: |cos(pitch)| = {cos_pitch:.3e} at pitch {pitch:.9} rad")]
pub struct GimbalLock {
    pub pitch: f64,
    pub cos_pitch: f64,
}

/// Marker for vectors resolved in the body-fixed frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Body;

/// Marker for vectors resolved in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertial;

/// A 3-vector tagged with the frame it is resolved in. Arithmetic is only
/// defined between vectors of the same frame.
pub struct FrameVec<F> {
    v: Vector3<f64>,
    _frame: PhantomData<F>,
}

pub type BodyVec = FrameVec<Body>;
pub type InertialVec = FrameVec<Inertial>;

impl<F> FrameVec<F> {
    pub const fn from_vector(v: Vector3<f64>) -> Self {
        Self {
            v,
            _frame: PhantomData,
        }
    }

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn zeros() -> Self {
        Self::from_vector(Vector3::zeros())
    }

    #[inline]
    pub fn vec(&self) -> &Vector3<f64> {
        &self.v
    }

    #[inline]
    pub fn into_vector(self) -> Vector3<f64> {
        self.v
    }

    pub fn x(&self) -> f64 {
        self.v.x
    }

    pub fn y(&self) -> f64 {
        self.v.y
    }

    pub fn z(&self) -> f64 {
        self.v.z
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().all(|c| c.is_finite())
    }
}

// Manual impls: derives would put bounds on the marker type.
impl<F> Clone for FrameVec<F> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<F> Copy for FrameVec<F> {}

impl<F> PartialEq for FrameVec<F> {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
    }
}

impl<F> Default for FrameVec<F> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl fmt::Debug for FrameVec<Body> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Body[{}, {}, {}]", self.v.x, self.v.y, self.v.z)
    }
}

impl fmt::Debug for FrameVec<Inertial> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Inertial[{}, {}, {}]", self.v.x, self.v.y, self.v.z)
    }
}

impl<F> Add for FrameVec<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_vector(self.v + rhs.v)
    }
}

impl<F> AddAssign for FrameVec<F> {
    fn add_assign(&mut self, rhs: Self) {
        self.v += rhs.v;
    }
}

impl<F> Sub for FrameVec<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_vector(self.v - rhs.v)
    }
}

impl<F> Neg for FrameVec<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_vector(-self.v)
    }
}

impl<F> Mul<f64> for FrameVec<F> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::from_vector(self.v * k)
    }
}

/// Roll `φ`, pitch `θ`, yaw `ψ` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Attitude {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Attitude {
    pub const fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn is_finite(&self) -> bool {
        self.roll.is_finite() && self.pitch.is_finite() && self.yaw.is_finite()
    }

    /// Roll and pitch wrapped to `(-π, π]`; yaw left unwrapped.
    pub fn reported(&self) -> Self {
        Self {
            roll: wrap_pi(self.roll),
            pitch: wrap_pi(self.pitch),
            yaw: self.yaw,
        }
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let two_pi = 2.0 * PI;
    let mut a = angle.rem_euclid(two_pi);
    if a > PI {
        a -= two_pi;
    }
    a
}

/// Integrated rigid-body state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState {
    /// Position of `O_b` in the inertial frame, metres.
    pub position: InertialVec,
    pub attitude: Attitude,
    /// Linear velocity of `O_b`, body frame, m/s.
    pub velocity: BodyVec,
    /// Angular velocity, body frame, rad/s.
    pub angular_velocity: BodyVec,
}

impl BodyState {
    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.attitude.is_finite()
            && self.velocity.is_finite()
            && self.angular_velocity.is_finite()
    }

    /// Packs the state as `[x, y, z, φ, θ, ψ, u, v, w, p, q, r]`.
    pub fn to_array(&self) -> [f64; 12] {
        let p = self.position.vec();
        let a = self.attitude;
        let v = self.velocity.vec();
        let w = self.angular_velocity.vec();
        [
            p.x, p.y, p.z, a.roll, a.pitch, a.yaw, v.x, v.y, v.z, w.x, w.y, w.z,
        ]
    }

    pub fn from_array(s: &[f64; 12]) -> Self {
        Self {
            position: InertialVec::new(s[0], s[1], s[2]),
            attitude: Attitude::new(s[3], s[4], s[5]),
            velocity: BodyVec::new(s[6], s[7], s[8]),
            angular_velocity: BodyVec::new(s[9], s[10], s[11]),
        }
    }
}

/// Rotation `R_bI` taking body-frame components to inertial-frame components.
pub fn rotation_body_to_inertial(att: &Attitude) -> Matrix3<f64> {
    let (sf, cf) = att.roll.sin_cos();
    let (st, ct) = att.pitch.sin_cos();
    let (sp, cp) = att.yaw.sin_cos();
    Matrix3::new(
        cp * ct,
        -sp * cf + cp * st * sf,
        sp * sf + cp * st * cf,
        sp * ct,
        cp * cf + sp * st * sf,
        -cp * sf + sp * st * cf,
        -st,
        ct * sf,
        ct * cf,
    )
}

pub fn body_to_inertial(att: &Attitude, v: &BodyVec) -> InertialVec {
    InertialVec::from_vector(rotation_body_to_inertial(att) * v.vec())
}

pub fn inertial_to_body(att: &Attitude, v: &InertialVec) -> BodyVec {
    BodyVec::from_vector(rotation_body_to_inertial(att).transpose() * v.vec())
}

/// `V_I = R_bI · V_b`.
pub fn body_velocity_to_inertial(att: &Attitude, velocity: &BodyVec) -> InertialVec {
    body_to_inertial(att, velocity)
}

/// Maps body angular velocity to Euler-angle rates `(φ̇, θ̇, ψ̇)`.
pub fn body_rates_to_euler_rates(
    att: &Attitude,
    angular_velocity: &BodyVec,
) -> Result<Vector3<f64>, GimbalLock> {
    let (sf, cf) = att.roll.sin_cos();
    let ct = att.pitch.cos();
    if ct.abs() <= GIMBAL_EPS {
        return Err(GimbalLock {
            pitch: att.pitch,
            cos_pitch: ct,
        });
    }
    let tt = att.pitch.tan();
    let w = angular_velocity.vec();
    Ok(Vector3::new(
        w.x + sf * tt * w.y + cf * tt * w.z,
        cf * w.y - sf * w.z,
        (sf * w.y + cf * w.z) / ct,
    ))
}
