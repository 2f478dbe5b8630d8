//! # quadtrack
//!
//! A self-contained quadrotor trajectory-tracking laboratory:
//!
//! - [`math`]: vectors, unit quaternions, quaternion kinematics, and a
//!   fixed-step 4th-order Runge-Kutta integrator
//! - [`dynamics`]: rigid-body quadrotor model with collective-thrust /
//!   body-rate actuation and input saturation
//! - [`trajectories`]: reference-trajectory generators (spiral, LOS-based
//!   random walks, randomized training references)
//! - [`env`]: the trajectory-tracking MDP (observations, rewards, episode
//!   lifecycle) plus a point-mass testbed with the same interface
//! - [`nets`]: 2-hidden-layer MLP policy/critic family with explicit
//!   backpropagation and an Adam optimizer
//! - [`ttd3`]: the T-TD3 trainer — TD3 with a time-attenuating,
//!   reward-modulated exploration-noise schedule — and a vanilla TD3 mode
//! - [`eval`]: tracking-error / energy / timing metrics and the
//!   multi-seed comparison harness
//! - [`config`] / [`cli`]: run configuration files and the command-line
//!   entry points (`train`, `eval`, `gen-traj`, `compare`)
//!
//! All randomness is derived from a single run seed through ChaCha8
//! streams; single-threaded runs are bit-reproducible.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod env;
pub mod eval;
pub mod math;
pub mod nets;
pub mod trajectories;
pub mod ttd3;

mod error;

pub use error::QuadError;

/// Convenience result alias used across the crate.
pub type Result<T> = std::result::Result<T, QuadError>;
