//! Vectors, unit quaternions, quaternion kinematics, and a fixed-step
//! 4th-order Runge-Kutta integrator.
//!
//! Conventions: quaternions are scalar-first `(w, x, y, z)`, Hamilton
//! product, and rotate body-frame vectors into the world frame. Body-rate
//! kinematics use the right-multiplication form `q̇ = ½ q ⊗ (0, ω)`.

use crate::{QuadError, Result};
use std::ops::{Add, Mul, Neg, Sub};

/// A 3-component vector of `f64` (meters, m/s, or rad/s by context).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A raw (not necessarily unit) quaternion, scalar-first.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn scale(self, s: f64) -> Quat {
        Quat::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn add(self, o: Quat) -> Quat {
        Quat::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }

    /// Hamilton product `self ⊗ other`.
    pub fn hamilton(self, o: Quat) -> Quat {
        Quat::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A quaternion with unit 2-norm, representing a body-to-world rotation.
///
/// Construction goes through [`UnitQuaternion::normalize`], which is the
/// only fallible path; every other operation preserves the invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quat);

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    });

    /// Normalizes an arbitrary quaternion onto the unit sphere.
    ///
    /// Fails on zero-norm or non-finite input.
    pub fn normalize(q: Quat) -> Result<UnitQuaternion> {
        let n = q.norm();
        if !n.is_finite() || n <= 0.0 {
            return Err(QuadError::DegenerateQuaternion);
        }
        Ok(UnitQuaternion(q.scale(1.0 / n)))
    }

    /// Rotation of `angle` radians about a (not necessarily unit) axis.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<UnitQuaternion> {
        let n = axis.norm();
        if n <= 0.0 {
            return Err(QuadError::DegenerateQuaternion);
        }
        let (s, c) = (angle * 0.5).sin_cos();
        let u = axis * (1.0 / n);
        UnitQuaternion::normalize(Quat::new(c, s * u.x, s * u.y, s * u.z))
    }

    pub fn as_quat(self) -> Quat {
        self.0
    }

    /// Hamilton product of two unit quaternions (renormalized).
    pub fn compose(self, other: UnitQuaternion) -> UnitQuaternion {
        // Product of unit quaternions is unit up to roundoff; renormalize
        // to hold the 1e-9 invariant over long compositions.
        let p = self.0.hamilton(other.0);
        UnitQuaternion::normalize(p).expect("product of unit quaternions is non-degenerate")
    }

    /// Rotates a body-frame vector into the world frame: `q v q⁻¹`.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let q = self.0;
        // Expanded q ⊗ (0, v) ⊗ q* with |q| = 1.
        let t = Vec3::new(
            2.0 * (q.y * v.z - q.z * v.y),
            2.0 * (q.z * v.x - q.x * v.z),
            2.0 * (q.x * v.y - q.y * v.x),
        );
        let cross_qt = Vec3::new(
            q.y * t.z - q.z * t.y,
            q.z * t.x - q.x * t.z,
            q.x * t.y - q.y * t.x,
        );
        v + t * q.w + cross_qt
    }

    /// Body-rate kinematics `q̇ = ½ q ⊗ (0, ω)`; the result is generally
    /// not unit and is orthogonal to `q`.
    pub fn deriv(self, omega: Vec3) -> Quat {
        self.0
            .hamilton(Quat::new(0.0, omega.x, omega.y, omega.z))
            .scale(0.5)
    }
}

/// State vector usable by the RK4 integrator: a linear combination and a
/// finiteness check are all the stepper needs.
pub trait RkState: Clone {
    /// `self + other * s`
    fn add_scaled(&self, other: &Self, s: f64) -> Self;
    fn is_finite(&self) -> bool;
}

impl RkState for f64 {
    fn add_scaled(&self, other: &Self, s: f64) -> Self {
        self + other * s
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl<const N: usize> RkState for [f64; N] {
    fn add_scaled(&self, other: &Self, s: f64) -> Self {
        let mut out = *self;
        for i in 0..N {
            out[i] += other[i] * s;
        }
        out
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// One classical 4th-order Runge-Kutta step of size `dt` for the
/// autonomous system `ẋ = f(x)`.
pub fn rk4_step<S, F>(f: F, x: &S, dt: f64) -> Result<S>
where
    S: RkState,
    F: Fn(&S) -> S,
{
    let check = |k: S, which: &str| -> Result<S> {
        if k.is_finite() {
            Ok(k)
        } else {
            Err(QuadError::NonFiniteDerivative {
                context: format!("rk4 stage {which} (dt = {dt})"),
            })
        }
    };
    let k1 = check(f(x), "k1")?;
    let k2 = check(f(&x.add_scaled(&k1, dt * 0.5)), "k2")?;
    let k3 = check(f(&x.add_scaled(&k2, dt * 0.5)), "k3")?;
    let k4 = check(f(&x.add_scaled(&k3, dt)), "k4")?;

    let mut sum = k1;
    sum = sum.add_scaled(&k2, 2.0).add_scaled(&k3, 2.0).add_scaled(&k4, 1.0);
    // the accumulator started at k1 with weight 1
    Ok(x.add_scaled(&sum, dt / 6.0))
}
