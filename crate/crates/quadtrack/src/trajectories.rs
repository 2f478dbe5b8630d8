//! Reference-trajectory generators.
//!
//! Three families: a deterministic spiral, a line-of-sight random walk
//! (LOS-RT) with piecewise-constant heading and stride, and randomized
//! LOS-family references used for training diversity.
//!
//! All stochastic generation is seeded ChaCha8; the same seed always
//! yields the same trajectory on every platform.

use crate::math::Vec3;
use crate::{QuadError, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// A reference path sampled once per control step.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    points: Vec<Vec3>,
    dt: f64,
}

impl ReferenceTrajectory {
    pub fn new(points: Vec<Vec3>, dt: f64) -> Self {
        ReferenceTrajectory { points, dt }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn point(&self, i: usize) -> Result<Vec3> {
        self.points.get(i).copied().ok_or(QuadError::EpisodeBounds {
            index: i,
            len: self.points.len(),
        })
    }

    /// Point at index `i`, holding the final point past the end.
    pub fn point_clamped(&self, i: usize) -> Vec3 {
        self.points[i.min(self.points.len() - 1)]
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Writes `step,t,x_d,y_d,z_d` rows at full `f64` round-trip precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,t,x_d,y_d,z_d")?;
        for (i, p) in self.points.iter().enumerate() {
            writeln!(w, "{},{},{},{},{}", i, i as f64 * self.dt, p.x, p.y, p.z)?;
        }
        Ok(())
    }
}

/// Spiral reference position at time `t` seconds:
/// `(0.1 t cos(πt/20), 0.1 t sin(πt/20), 0.1 t)`.
pub fn spiral_rt(t: f64) -> Vec3 {
    let phase = std::f64::consts::PI * t / 20.0;
    Vec3::new(0.1 * t * phase.cos(), 0.1 * t * phase.sin(), 0.1 * t)
}

/// Samples the spiral at `n_steps` control steps of length `dt`.
pub fn spiral_trajectory(n_steps: usize, dt: f64) -> ReferenceTrajectory {
    let points = (0..n_steps).map(|i| spiral_rt(i as f64 * dt)).collect();
    ReferenceTrajectory::new(points, dt)
}

/// LOS-RT generator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LosRtConfig {
    /// Deflection-angle bounds [rad].
    pub theta_min: f64,
    pub theta_max: f64,
    /// Sailing-distance bounds [m] before scaling.
    pub p_min: f64,
    pub p_max: f64,
    /// Steps each (θ, p) draw is held.
    pub hold_steps: usize,
    /// Multiplier applied to the drawn distance per step.
    pub step_scale: f64,
    pub seed: u64,
}

impl Default for LosRtConfig {
    fn default() -> Self {
        LosRtConfig {
            theta_min: -std::f64::consts::PI / 120.0,
            theta_max: std::f64::consts::PI / 120.0,
            p_min: 1.5,
            p_max: 2.5,
            hold_steps: 100,
            step_scale: 0.001,
            seed: 0,
        }
    }
}

impl LosRtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_min < self.theta_max) {
            return Err(QuadError::InvalidConfig(
                "losrt.theta_min must be < losrt.theta_max".into(),
            ));
        }
        if !(0.0 < self.p_min && self.p_min < self.p_max) {
            return Err(QuadError::InvalidConfig(
                "losrt requires 0 < p_min < p_max".into(),
            ));
        }
        if self.hold_steps < 1 {
            return Err(QuadError::InvalidConfig("losrt.hold_steps must be >= 1".into()));
        }
        if !(self.step_scale > 0.0) {
            return Err(QuadError::InvalidConfig("losrt.step_scale must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-step vertical increment of the LOS recursion [m].
pub const LOSRT_Z_INCREMENT: f64 = 0.0001;

/// The two fixed initial LOS-RT points.
pub const LOSRT_INITIAL: [Vec3; 2] = [
    Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    },
    Vec3 {
        x: 0.1,
        y: 0.1,
        z: 0.1,
    },
];

/// Generates a LOS-RT reference of `n_steps` points at step `dt`.
///
/// From index 1 onward the recursion is
/// `x(t+1) = x(t) + cos(θ)·p̃`, `y(t+1) = y(t) + sin(θ)·p̃`,
/// `z(t+1) = z(t) + 0.0001`, with `p̃ = p · step_scale` and (θ, p)
/// redrawn uniformly at indices that are multiples of `hold_steps`.
pub fn los_rt(config: &LosRtConfig, n_steps: usize, dt: f64) -> Result<ReferenceTrajectory> {
    config.validate()?;
    if n_steps < 2 {
        return Err(QuadError::InvalidConfig("los_rt needs n_steps >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(n_steps);
    points.extend_from_slice(&LOSRT_INITIAL);

    let mut theta = rng.gen_range(config.theta_min..config.theta_max);
    let mut stride = rng.gen_range(config.p_min..config.p_max);
    for t in 1..n_steps - 1 {
        if t % config.hold_steps == 0 {
            theta = rng.gen_range(config.theta_min..config.theta_max);
            stride = rng.gen_range(config.p_min..config.p_max);
        }
        let prev = points[t];
        let d = stride * config.step_scale;
        points.push(Vec3::new(
            prev.x + theta.cos() * d,
            prev.y + theta.sin() * d,
            prev.z + LOSRT_Z_INCREMENT,
        ));
    }
    Ok(ReferenceTrajectory::new(points, dt))
}

/// Workspace bound applied to randomized training references [m].
pub const TRAINING_WORKSPACE_RADIUS: f64 = 5.0;

/// A LOS-family trajectory with per-episode randomized deflection and
/// stride bounds plus a random base heading, bounded to the training
/// workspace. Used to diversify the training data.
pub fn random_training_reference(seed: u64, n_steps: usize, dt: f64) -> Result<ReferenceTrajectory> {
    if n_steps < 2 {
        return Err(QuadError::InvalidConfig(
            "random_training_reference needs n_steps >= 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    let mut heading = rng.gen_range(-pi..pi);
    let theta_half = rng.gen_range(pi / 240.0..pi / 40.0);
    let p_lo = rng.gen_range(1.0..2.0);
    let p_hi = p_lo + rng.gen_range(0.5..1.5);
    let step_scale = 0.001;
    let hold_steps = 100;

    let mut points = Vec::with_capacity(n_steps);
    points.extend_from_slice(&LOSRT_INITIAL);

    let mut theta = rng.gen_range(-theta_half..theta_half);
    let mut stride = rng.gen_range(p_lo..p_hi);
    for t in 1..n_steps - 1 {
        if t % hold_steps == 0 {
            theta = rng.gen_range(-theta_half..theta_half);
            stride = rng.gen_range(p_lo..p_hi);
        }
        let prev = points[t];
        let d = stride * step_scale;
        let dir = heading + theta;
        let mut next = Vec3::new(
            prev.x + dir.cos() * d,
            prev.y + dir.sin() * d,
            prev.z + LOSRT_Z_INCREMENT,
        );
        if next.norm() > TRAINING_WORKSPACE_RADIUS {
            // Turn the base heading back toward the origin and retry the step.
            heading = (-prev.y).atan2(-prev.x);
            let dir = heading + theta;
            next = Vec3::new(
                prev.x + dir.cos() * d,
                prev.y + dir.sin() * d,
                prev.z + LOSRT_Z_INCREMENT,
            );
        }
        points.push(next);
    }
    Ok(ReferenceTrajectory::new(points, dt))
}
