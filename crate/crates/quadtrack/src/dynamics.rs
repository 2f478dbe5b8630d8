//! Rigid-body quadrotor model with collective-thrust / body-rate actuation.
//!
//! The translational dynamics are
//!
//! ```text
//! ṗ = v
//! v̇ = R(q) · (0, 0, f_c / m) − (0, 0, g_z)
//! q̇ = ½ q ⊗ (0, ω)
//! ```
//!
//! The commanded body rates are applied directly (no torque-level inner
//! loop); inputs are clamped to the configured box before use.

use crate::math::{rk4_step, Quat, RkState, UnitQuaternion, Vec3};
use crate::{QuadError, Result};
use serde::{Deserialize, Serialize};

/// Full rigid-body state: world-frame position/velocity, attitude, and
/// body-frame angular rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadState {
    pub p: Vec3,
    pub v: Vec3,
    pub q: UnitQuaternion,
    pub omega: Vec3,
}

impl QuadState {
    /// At rest at `p` with identity attitude.
    pub fn at_rest(p: Vec3) -> Self {
        QuadState {
            p,
            v: Vec3::ZERO,
            q: UnitQuaternion::IDENTITY,
            omega: Vec3::ZERO,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.v.is_finite() && self.q.as_quat().is_finite() && self.omega.is_finite()
    }
}

/// Physical parameters and actuation limits of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadParams {
    /// Mass [kg].
    pub m: f64,
    /// Gravity magnitude [m/s²].
    pub g_z: f64,
    /// Collective-thrust bounds [N].
    pub f_min: f64,
    pub f_max: f64,
    /// Body-rate bounds [rad/s], applied per component.
    pub omega_min: f64,
    pub omega_max: f64,
    /// Integration / control step [s].
    pub dt: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            m: 1.5,
            g_z: 9.81,
            f_min: 0.0,
            f_max: 20.0,
            omega_min: -6.0,
            omega_max: 6.0,
            dt: 0.001,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(QuadError::InvalidConfig("quad.m must be > 0".into()));
        }
        if !(self.f_min < self.f_max) {
            return Err(QuadError::InvalidConfig("quad.f_min must be < quad.f_max".into()));
        }
        if !(self.omega_min < self.omega_max) {
            return Err(QuadError::InvalidConfig(
                "quad.omega_min must be < quad.omega_max".into(),
            ));
        }
        if !(self.dt > 0.0) {
            return Err(QuadError::InvalidConfig("quad.dt must be > 0".into()));
        }
        Ok(())
    }

    /// Thrust that exactly cancels gravity at identity attitude.
    pub fn hover_thrust(&self) -> f64 {
        self.m * self.g_z
    }
}

/// Control input: collective thrust plus commanded body rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    /// Collective thrust [N].
    pub f_c: f64,
    /// Commanded body rates [rad/s].
    pub omega_cmd: Vec3,
}

impl ControlInput {
    pub fn new(f_c: f64, omega_cmd: Vec3) -> Self {
        ControlInput { f_c, omega_cmd }
    }
}

/// Clamps each input component to its configured interval.
pub fn clamp_input(u: ControlInput, params: &QuadParams) -> ControlInput {
    ControlInput {
        f_c: u.f_c.clamp(params.f_min, params.f_max),
        omega_cmd: Vec3::new(
            u.omega_cmd.x.clamp(params.omega_min, params.omega_max),
            u.omega_cmd.y.clamp(params.omega_min, params.omega_max),
            u.omega_cmd.z.clamp(params.omega_min, params.omega_max),
        ),
    }
}

/// Flat integration state: p, v, q (4 raw components).
/// ω is excluded: rates follow the clamped command directly.
type FlatState = [f64; 10];

fn flatten(s: &QuadState) -> FlatState {
    let q = s.q.as_quat();
    [s.p.x, s.p.y, s.p.z, s.v.x, s.v.y, s.v.z, q.w, q.x, q.y, q.z]
}

/// State derivative under an (already clamped) input.
///
/// Returns `(ṗ, v̇, q̇)`; angular acceleration is not modeled.
pub fn derivative(s: &QuadState, u: &ControlInput, params: &QuadParams) -> (Vec3, Vec3, Quat) {
    let thrust_body = Vec3::new(0.0, 0.0, u.f_c / params.m);
    let v_dot = s.q.rotate(thrust_body) - Vec3::new(0.0, 0.0, params.g_z);
    let q_dot = s.q.deriv(u.omega_cmd);
    (s.v, v_dot, q_dot)
}

fn flat_derivative(x: &FlatState, u: &ControlInput, params: &QuadParams) -> FlatState {
    let q = Quat::new(x[6], x[7], x[8], x[9]);
    // The RK4 stages leave the unit sphere by O(dt); evaluate the rotation
    // on the renormalized quaternion.
    let qn = match UnitQuaternion::normalize(q) {
        Ok(qn) => qn,
        Err(_) => return [f64::NAN; 10],
    };
    let thrust_body = Vec3::new(0.0, 0.0, u.f_c / params.m);
    let v_dot = qn.rotate(thrust_body) - Vec3::new(0.0, 0.0, params.g_z);
    let q_dot = qn.deriv(u.omega_cmd);
    // q̇ is scaled back to the raw quaternion's norm so the integration is
    // consistent for slightly off-unit stage states.
    let scale = q.norm();
    [
        x[3],
        x[4],
        x[5],
        v_dot.x,
        v_dot.y,
        v_dot.z,
        q_dot.w * scale,
        q_dot.x * scale,
        q_dot.y * scale,
        q_dot.z * scale,
    ]
}

/// Advances the state by one control step `params.dt`: clamps the input,
/// integrates the rigid-body equations with RK4, renormalizes the
/// quaternion, and sets ω to the clamped command.
pub fn step(s: &QuadState, u: ControlInput, params: &QuadParams) -> Result<QuadState> {
    let u = clamp_input(u, params);
    let x0 = flatten(s);
    let x1 = rk4_step(|x| flat_derivative(x, &u, params), &x0, params.dt)?;
    if !x1.is_finite() {
        return Err(QuadError::DivergedSimulation { step: 0 });
    }
    let q = UnitQuaternion::normalize(Quat::new(x1[6], x1[7], x1[8], x1[9]))?;
    Ok(QuadState {
        p: Vec3::new(x1[0], x1[1], x1[2]),
        v: Vec3::new(x1[3], x1[4], x1[5]),
        q,
        omega: u.omega_cmd,
    })
}
