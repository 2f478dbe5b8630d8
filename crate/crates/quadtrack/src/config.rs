//! Run configuration: one TOML file describing the task, the vehicle, the
//! reward, the reference generator, and the trainer, plus dotted-path
//! command-line overrides (`--set trainer.seed=7`).

use crate::dynamics::QuadParams;
use crate::env::{Environment, EnvMode, PointMassEnv, RewardConfig, TrackingEnv};
use crate::math::Vec3;
use crate::trajectories::{los_rt, spiral_trajectory, LosRtConfig};
use crate::ttd3::EnvFactory;
use crate::{QuadError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Which tracking task to train on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// The full quadrotor rigid-body model.
    Quadrotor,
    /// The cheap double-integrator testbed.
    Pointmass,
}

/// Which fixed reference the evaluation episodes track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalReference {
    Spiral,
    Losrt,
    /// Straight line along +x (the point-mass default).
    Line,
}

/// Environment-level settings shared by both tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub task: Task,
    /// Steps per episode.
    pub episode_steps: usize,
    /// Radius of the initial-position randomization ball [m].
    pub spawn_radius: f64,
    pub eval_reference: EvalReference,
    /// Control period of the point-mass testbed [s] (the quadrotor takes
    /// its dt from `[quad]`).
    pub pointmass_dt: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            task: Task::Quadrotor,
            episode_steps: 3000,
            spawn_radius: 0.5,
            eval_reference: EvalReference::Spiral,
            pointmass_dt: 0.05,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episode_steps < 2 {
            return Err(QuadError::InvalidConfig("env.episode_steps must be >= 2".into()));
        }
        if !(self.spawn_radius >= 0.0 && self.spawn_radius.is_finite()) {
            return Err(QuadError::InvalidConfig("env.spawn_radius must be finite and >= 0".into()));
        }
        if !(self.pointmass_dt > 0.0) {
            return Err(QuadError::InvalidConfig("env.pointmass_dt must be > 0".into()));
        }
        Ok(())
    }
}

/// The complete, self-contained description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub quad: QuadParams,
    pub reward: RewardConfig,
    pub trainer: crate::ttd3::TrainerConfig,
    pub losrt: LosRtConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.quad.validate()?;
        self.reward.validate()?;
        self.trainer.validate()?;
        self.losrt.validate()?;
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            toml::from_str(s).map_err(|e| QuadError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| QuadError::InvalidConfig(e.to_string()))
    }

    /// Writes the fully resolved configuration (defaults plus file plus
    /// overrides) so a run directory is self-describing.
    pub fn freeze(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    /// Applies one `section.key=value` override. The value is parsed as a
    /// TOML literal, falling back to a bare string, and unknown keys are
    /// rejected when the patched document is re-deserialized.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (path, raw_value) = spec.split_once('=').ok_or_else(|| {
            QuadError::InvalidConfig(format!("override '{spec}' is not of the form key=value"))
        })?;
        let path = path.trim();
        if path.is_empty() {
            return Err(QuadError::InvalidConfig(format!("override '{spec}' has an empty key")));
        }
        let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw_value}"))
            .map(|mut t| t.remove("v").unwrap())
            .unwrap_or_else(|_| toml::Value::String(raw_value.trim().to_string()));

        let mut doc = toml::Value::try_from(&*self)
            .map_err(|e| QuadError::InvalidConfig(e.to_string()))?;
        let mut node = &mut doc;
        let segments: Vec<&str> = path.split('.').collect();
        for (i, seg) in segments.iter().enumerate() {
            let table = node.as_table_mut().ok_or_else(|| {
                QuadError::InvalidConfig(format!("'{path}': '{seg}' is not inside a table"))
            })?;
            if i == segments.len() - 1 {
                if !table.contains_key(*seg) {
                    return Err(QuadError::InvalidConfig(format!(
                        "unknown configuration key '{path}'"
                    )));
                }
                table.insert(seg.to_string(), value);
                break;
            }
            node = table.get_mut(*seg).ok_or_else(|| {
                QuadError::InvalidConfig(format!("unknown configuration section '{seg}' in '{path}'"))
            })?;
        }
        *self = doc
            .try_into()
            .map_err(|e| QuadError::InvalidConfig(format!("override '{spec}': {e}")))?;
        Ok(())
    }

    /// The dt of the configured task's control loop.
    pub fn control_dt(&self) -> f64 {
        match self.env.task {
            Task::Quadrotor => self.quad.dt,
            Task::Pointmass => self.env.pointmass_dt,
        }
    }

    /// Builds the evaluation reference for the configured task.
    pub fn eval_reference(&self) -> Result<crate::trajectories::ReferenceTrajectory> {
        let n = self.env.episode_steps;
        match (self.env.task, self.env.eval_reference) {
            (Task::Quadrotor, EvalReference::Spiral) => Ok(spiral_trajectory(n, self.quad.dt)),
            (Task::Quadrotor, EvalReference::Losrt) => los_rt(&self.losrt, n, self.quad.dt),
            (Task::Pointmass, EvalReference::Spiral) => {
                Ok(spiral_trajectory(n, self.env.pointmass_dt))
            }
            (Task::Pointmass, EvalReference::Losrt) => {
                los_rt(&self.losrt, n, self.env.pointmass_dt)
            }
            (_, EvalReference::Line) => Ok(PointMassEnv::line_reference(
                Vec3::ZERO,
                Vec3::new(1.0, 0.0, 0.0),
                0.05,
                n,
                self.control_dt(),
            )),
        }
    }

    /// Environment constructors for the trainer: per-worker training
    /// environments plus the fixed evaluation environment.
    pub fn env_factory(&self) -> Result<EnvFactory> {
        self.validate()?;
        let reference = self.eval_reference()?;
        let env = self.env;
        let quad = self.quad;
        let reward = self.reward;
        match self.env.task {
            Task::Quadrotor => Ok(EnvFactory {
                train: Box::new(move |_| {
                    Ok(Box::new(TrackingEnv::new(
                        quad,
                        reward,
                        EnvMode::Train {
                            n_steps: env.episode_steps,
                            spawn_radius: env.spawn_radius,
                        },
                    )?) as Box<dyn Environment>)
                }),
                eval: Box::new(move || {
                    Ok(Box::new(TrackingEnv::new(
                        quad,
                        reward,
                        EnvMode::Eval {
                            reference: reference.clone(),
                        },
                    )?) as Box<dyn Environment>)
                }),
            }),
            Task::Pointmass => Ok(EnvFactory {
                train: Box::new(move |_| {
                    Ok(Box::new(PointMassEnv::train(
                        env.pointmass_dt,
                        env.episode_steps,
                        env.spawn_radius,
                        reward,
                    )?) as Box<dyn Environment>)
                }),
                eval: Box::new(move || {
                    Ok(Box::new(PointMassEnv::eval(reference.clone(), reward)?)
                        as Box<dyn Environment>)
                }),
            }),
        }
    }
}
