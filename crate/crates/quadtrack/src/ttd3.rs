//! The T-TD3 trainer: twin delayed deterministic policy gradient with a
//! time-attenuating, reward-modulated exploration-noise schedule
//!
//! ```text
//! σ = β·u_max·e^{−λt} + (1−β)·u_max·e^{−δ},
//! δ = Σ_{i ∈ minibatch} (r_i − r_min) / (r_max − r_min)
//! ```
//!
//! plus a vanilla-TD3 baseline mode that holds σ constant and skips the
//! schedule update. One learner owns all mutable training state; rollout
//! workers own their environments and exchange only actor snapshots and
//! transitions. Single-threaded runs (`n_envs = 1`) are bit-reproducible.

use crate::checkpoint::Checkpoint;
use crate::env::Environment;
use crate::nets::{
    mlp_init, HiddenActivation, MlpParams, OptState, OutputActivation,
};
use crate::{QuadError, Result};
use ndarray::{Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::mpsc;
use std::sync::Arc;

/// One stored interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring buffer with FIFO eviction and uniform sampling
/// with replacement.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer {
            data: Vec::with_capacity(capacity.min(1 << 20)),
            capacity,
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, tr: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(tr);
        } else {
            self.data[self.cursor] = tr;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.data[i]
    }

    /// `n` independent uniform index draws with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        if self.data.is_empty() || self.data.len() < 1 {
            return Err(QuadError::InsufficientData { have: 0, need: n });
        }
        Ok((0..n).map(|_| rng.gen_range(0..self.data.len())).collect())
    }
}

/// Which per-step algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ttd3,
    Td3,
}

/// How the minibatch normalized rewards aggregate into δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaAggregator {
    Sum,
    Mean,
}

/// All trainer hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    pub gamma: f64,
    pub batch_size: usize,
    /// Actor/target update period d.
    pub policy_delay: u64,
    /// Target-smoothing noise clip c.
    pub target_noise_clip: f64,
    pub u_max: f64,
    pub beta: f64,
    pub lambda: f64,
    pub tau: f64,
    pub buffer_capacity: usize,
    /// Total environment steps across all workers.
    pub total_steps: u64,
    /// Random-action steps before learning starts.
    pub warmup_steps: u64,
    pub n_envs: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Constant exploration std in `td3` mode.
    pub td3_sigma: f64,
    pub delta_aggregator: DeltaAggregator,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Per-episode multiplicative step-size decay.
    pub lr_decay: f64,
    pub hidden_dims: Vec<usize>,
    /// Environment steps between deterministic evaluations.
    pub eval_interval: u64,
    /// Environment steps between checkpoint callbacks.
    pub checkpoint_interval: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            gamma: 0.99,
            batch_size: 256,
            policy_delay: 2,
            target_noise_clip: 0.1,
            u_max: 1.0,
            beta: 0.08,
            lambda: 0.01,
            tau: 0.005,
            buffer_capacity: 1_000_000,
            total_steps: 300_000,
            warmup_steps: 10_000,
            n_envs: 20,
            seed: 0,
            algorithm: Algorithm::Ttd3,
            td3_sigma: 0.1,
            delta_aggregator: DeltaAggregator::Sum,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            lr_decay: 0.9995,
            hidden_dims: vec![256, 256],
            eval_interval: 5_000,
            checkpoint_interval: 50_000,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(QuadError::InvalidConfig(msg.into()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("trainer.gamma must be in (0, 1]");
        }
        if self.batch_size < 1 {
            return bad("trainer.batch_size must be >= 1");
        }
        if self.policy_delay < 1 {
            return bad("trainer.policy_delay must be >= 1");
        }
        if !(self.target_noise_clip > 0.0) {
            return bad("trainer.target_noise_clip must be > 0");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("trainer.tau must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad("trainer.beta must be in [0, 1]");
        }
        if !(self.u_max > 0.0) {
            return bad("trainer.u_max must be > 0");
        }
        if self.n_envs < 1 {
            return bad("trainer.n_envs must be >= 1");
        }
        if self.hidden_dims.is_empty() {
            return bad("trainer.hidden_dims must not be empty");
        }
        if self.eval_interval == 0 || self.checkpoint_interval == 0 {
            return bad("trainer intervals must be > 0");
        }
        Ok(())
    }
}

/// The exploration-noise schedule state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSchedule {
    pub sigma: f64,
    pub t: u64,
    pub beta: f64,
    pub lambda: f64,
    pub u_max: f64,
    pub aggregator: DeltaAggregator,
}

impl NoiseSchedule {
    pub fn new(beta: f64, lambda: f64, u_max: f64, aggregator: DeltaAggregator) -> Self {
        // t = 0, δ = 0 gives σ = u_max
        NoiseSchedule {
            sigma: u_max,
            t: 0,
            beta,
            lambda,
            u_max,
            aggregator,
        }
    }

    /// Normalized-reward spread of a minibatch; zero when all rewards are
    /// (numerically) equal.
    pub fn delta(rewards: &[f64], aggregator: DeltaAggregator) -> f64 {
        debug_assert!(!rewards.is_empty());
        let r_min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
        let r_max = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if r_max - r_min < 1e-12 {
            return 0.0;
        }
        let sum: f64 = rewards.iter().map(|r| (r - r_min) / (r_max - r_min)).sum();
        match aggregator {
            DeltaAggregator::Sum => sum,
            DeltaAggregator::Mean => sum / rewards.len() as f64,
        }
    }

    /// Recomputes σ from the global step count `t` and a minibatch of
    /// rewards; returns the new σ.
    pub fn update(&mut self, t: u64, rewards: &[f64]) -> f64 {
        let delta = Self::delta(rewards, self.aggregator);
        self.t = t;
        self.sigma = self.beta * self.u_max * (-self.lambda * t as f64).exp()
            + (1.0 - self.beta) * self.u_max * (-delta).exp();
        self.sigma
    }
}

/// Deterministic stream-seed derivation (SplitMix64 over base ⊕ stream).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        ^ stream.wrapping_mul(0xA24B_AED4_963E_E407)
        ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// π(s) plus per-component Gaussian noise of std σ, clamped to [-1, 1].
pub fn select_action(
    actor: &MlpParams,
    s: &[f64],
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let mut a = actor.forward(s)?;
    for v in &mut a {
        let eps: f64 = rng.sample(StandardNormal);
        *v = (*v + sigma * eps).clamp(-1.0, 1.0);
    }
    Ok(a)
}

/// Adds clipped Gaussian smoothing noise to a batch of target actions in
/// place and returns the largest |ε| drawn.
pub fn apply_target_noise(
    actions: &mut Array2<f64>,
    sigma: f64,
    clip: f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut max_eps: f64 = 0.0;
    for v in actions.iter_mut() {
        let eps = (sigma * rng.sample::<f64, _>(StandardNormal)).clamp(-clip, clip);
        max_eps = max_eps.max(eps.abs());
        *v = (*v + eps).clamp(-1.0, 1.0);
    }
    max_eps
}

/// Min-twin bootstrap target `y = r + γ·min(q1, q2)`.
pub fn td_target(r: f64, q1: f64, q2: f64, gamma: f64) -> f64 {
    r + gamma * q1.min(q2)
}

/// Elementwise convex blend `target ← τ·online + (1−τ)·target`.
pub fn soft_update(target: &mut MlpParams, online: &MlpParams, tau: f64) {
    assert_eq!(target.dims, online.dims, "soft_update shape mismatch");
    for (tl, ol) in target.layers.iter_mut().zip(&online.layers) {
        ndarray::Zip::from(&mut tl.w)
            .and(&ol.w)
            .for_each(|t, o| *t = tau * o + (1.0 - tau) * *t);
        ndarray::Zip::from(&mut tl.b)
            .and(&ol.b)
            .for_each(|t, o| *t = tau * o + (1.0 - tau) * *t);
    }
}

/// The learner: all mutable training state and the per-step update rule.
pub struct Learner {
    pub config: TrainerConfig,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub actor: MlpParams,
    pub critic1: MlpParams,
    pub critic2: MlpParams,
    pub target_actor: MlpParams,
    pub target_critic1: MlpParams,
    pub target_critic2: MlpParams,
    pub opt_actor: OptState,
    pub opt_critic1: OptState,
    pub opt_critic2: OptState,
    pub buffer: ReplayBuffer,
    pub schedule: NoiseSchedule,
    pub critic_updates: u64,
    pub actor_updates: u64,
    pub last_critic1_loss: f64,
    pub last_critic2_loss: f64,
    pub last_actor_loss: f64,
    pub max_target_noise_seen: f64,
    sample_rng: ChaCha8Rng,
    target_noise_rng: ChaCha8Rng,
}

impl Learner {
    pub fn new(config: TrainerConfig, obs_dim: usize, act_dim: usize) -> Result<Self> {
        config.validate()?;
        let mut actor_dims = vec![obs_dim];
        actor_dims.extend_from_slice(&config.hidden_dims);
        actor_dims.push(act_dim);
        let mut critic_dims = vec![obs_dim + act_dim];
        critic_dims.extend_from_slice(&config.hidden_dims);
        critic_dims.push(1);

        let actor = mlp_init(
            &actor_dims,
            HiddenActivation::Relu,
            OutputActivation::Bounded,
            derive_seed(config.seed, 1, 0),
        );
        let critic1 = mlp_init(
            &critic_dims,
            HiddenActivation::Relu,
            OutputActivation::Linear,
            derive_seed(config.seed, 2, 0),
        );
        let critic2 = mlp_init(
            &critic_dims,
            HiddenActivation::Relu,
            OutputActivation::Linear,
            derive_seed(config.seed, 3, 0),
        );
        let schedule = NoiseSchedule::new(
            config.beta,
            config.lambda,
            config.u_max,
            config.delta_aggregator,
        );
        Ok(Learner {
            obs_dim,
            act_dim,
            opt_actor: OptState::new(&actor, config.actor_lr),
            opt_critic1: OptState::new(&critic1, config.critic_lr),
            opt_critic2: OptState::new(&critic2, config.critic_lr),
            target_actor: actor.clone(),
            target_critic1: critic1.clone(),
            target_critic2: critic2.clone(),
            actor,
            critic1,
            critic2,
            buffer: ReplayBuffer::new(config.buffer_capacity),
            schedule,
            critic_updates: 0,
            actor_updates: 0,
            last_critic1_loss: f64::NAN,
            last_critic2_loss: f64::NAN,
            last_actor_loss: f64::NAN,
            max_target_noise_seen: 0.0,
            sample_rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 4, 0)),
            target_noise_rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 5, 0)),
            config,
        })
    }

    /// The exploration std currently in force.
    pub fn current_sigma(&self) -> f64 {
        match self.config.algorithm {
            Algorithm::Ttd3 => self.schedule.sigma,
            Algorithm::Td3 => self.config.td3_sigma,
        }
    }

    /// Applies the per-episode step-size decay to all three optimizers.
    pub fn decay_lr(&mut self) {
        self.opt_actor.decay(self.config.lr_decay);
        self.opt_critic1.decay(self.config.lr_decay);
        self.opt_critic2.decay(self.config.lr_decay);
    }

    fn batch_matrices(
        &self,
        idx: &[usize],
    ) -> (Array2<f64>, Array2<f64>, Vec<f64>, Array2<f64>) {
        let n = idx.len();
        let mut s = Array2::zeros((n, self.obs_dim));
        let mut a = Array2::zeros((n, self.act_dim));
        let mut r = Vec::with_capacity(n);
        let mut s_next = Array2::zeros((n, self.obs_dim));
        for (row, &i) in idx.iter().enumerate() {
            let tr = self.buffer.get(i);
            for (j, v) in tr.s.iter().enumerate() {
                s[[row, j]] = *v;
            }
            for (j, v) in tr.a.iter().enumerate() {
                a[[row, j]] = *v;
            }
            r.push(tr.r);
            for (j, v) in tr.s_next.iter().enumerate() {
                s_next[[row, j]] = *v;
            }
        }
        (s, a, r, s_next)
    }

    fn concat_cols(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
        ndarray::concatenate(Axis(1), &[a.view(), b.view()]).expect("row counts match")
    }

    /// One learner step: minibatch sample, twin-critic regression to the
    /// min-twin target, σ-schedule update, and (every d-th call) the
    /// delayed actor update plus soft target updates.
    pub fn update(&mut self) -> Result<()> {
        let n = self.config.batch_size;
        let idx = self.buffer.sample_indices(n, &mut self.sample_rng)?;
        let (s, a, r, s_next) = self.batch_matrices(&idx);

        // target action with clipped smoothing noise
        let sigma = self.current_sigma();
        let cache = self.target_actor.forward_batch(&s_next)?;
        let mut a_tilde = cache.output().clone();
        let max_eps = apply_target_noise(
            &mut a_tilde,
            sigma,
            self.config.target_noise_clip,
            &mut self.target_noise_rng,
        );
        self.max_target_noise_seen = self.max_target_noise_seen.max(max_eps);

        // y = r + γ min(Q1', Q2')
        let sa_next = Self::concat_cols(&s_next, &a_tilde);
        let q1t = self.target_critic1.forward_batch(&sa_next)?;
        let q2t = self.target_critic2.forward_batch(&sa_next)?;
        let q1t = q1t.output();
        let q2t = q2t.output();
        // episodes end only by time limit (truncation), so targets
        // bootstrap regardless of the done flag
        let y: Vec<f64> = (0..n)
            .map(|i| td_target(r[i], q1t[[i, 0]], q2t[[i, 0]], self.config.gamma))
            .collect();

        // twin critic regression against the shared target
        let sa = Self::concat_cols(&s, &a);
        let inv_n = 1.0 / n as f64;
        for which in 0..2 {
            let (critic, opt) = if which == 0 {
                (&mut self.critic1, &mut self.opt_critic1)
            } else {
                (&mut self.critic2, &mut self.opt_critic2)
            };
            let cache = critic.forward_batch(&sa)?;
            let q = cache.output();
            let mut loss = 0.0;
            let mut upstream = Array2::zeros((n, 1));
            for i in 0..n {
                let diff = q[[i, 0]] - y[i];
                loss += diff * diff * inv_n;
                upstream[[i, 0]] = 2.0 * diff * inv_n;
            }
            if !loss.is_finite() {
                return Err(QuadError::TrainingDiverged(format!(
                    "critic{} loss non-finite at update {}",
                    which + 1,
                    self.critic_updates
                )));
            }
            let (grads, _) = critic.backward(&cache, &upstream);
            opt.step(critic, &grads);
            if which == 0 {
                self.last_critic1_loss = loss;
            } else {
                self.last_critic2_loss = loss;
            }
        }
        self.critic_updates += 1;

        // σ schedule (skipped entirely in td3 mode)
        if self.config.algorithm == Algorithm::Ttd3 {
            self.schedule.update(self.critic_updates, &r);
        }

        // delayed actor + target updates
        if self.critic_updates % self.config.policy_delay == 0 {
            let cache_actor = self.actor.forward_batch(&s)?;
            let a_pi = cache_actor.output().clone();
            let sa_pi = Self::concat_cols(&s, &a_pi);
            let cache_q = self.critic1.forward_batch(&sa_pi)?;
            let q_mean = cache_q.output().mean().unwrap();
            if !q_mean.is_finite() {
                return Err(QuadError::TrainingDiverged(format!(
                    "actor objective non-finite at update {}",
                    self.critic_updates
                )));
            }
            self.last_actor_loss = -q_mean;
            let upstream_q = Array2::from_elem((n, 1), inv_n);
            let (_, input_grad) = self.critic1.backward(&cache_q, &upstream_q);
            // ascent on mean Q = descent on its negation
            let dq_da = input_grad.slice(ndarray::s![.., self.obs_dim..]).to_owned();
            let (actor_grads, _) = self.actor.backward(&cache_actor, &dq_da.mapv(|v| -v));
            self.opt_actor.step(&mut self.actor, &actor_grads);
            self.actor_updates += 1;

            soft_update(&mut self.target_critic1, &self.critic1, self.config.tau);
            soft_update(&mut self.target_critic2, &self.critic2, self.config.tau);
            soft_update(&mut self.target_actor, &self.actor, self.config.tau);
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            step: self.critic_updates,
            actor: self.actor.clone(),
            critic1: self.critic1.clone(),
            critic2: self.critic2.clone(),
            target_actor: self.target_actor.clone(),
            target_critic1: self.target_critic1.clone(),
            target_critic2: self.target_critic2.clone(),
            opt_actor: self.opt_actor.clone(),
            opt_critic1: self.opt_critic1.clone(),
            opt_critic2: self.opt_critic2.clone(),
        }
    }
}

/// One row of the learning curve, written at each evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub step: u64,
    pub episodes: u64,
    pub sigma: f64,
    pub critic1_loss: f64,
    pub critic2_loss: f64,
    pub actor_loss: f64,
    pub eval_return: f64,
    pub eval_tracking_error: f64,
}

/// Learning curve sampled at fixed environment-step intervals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "step,episodes,sigma,critic1_loss,critic2_loss,actor_loss,eval_return,eval_tracking_error"
        )?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                p.step,
                p.episodes,
                p.sigma,
                p.critic1_loss,
                p.critic2_loss,
                p.actor_loss,
                p.eval_return,
                p.eval_tracking_error
            )?;
        }
        Ok(())
    }
}

/// Environment constructors handed to the trainer: one training instance
/// per worker plus an evaluation instance.
pub struct EnvFactory {
    pub train: Box<dyn Fn(usize) -> Result<Box<dyn Environment>> + Send + Sync>,
    pub eval: Box<dyn Fn() -> Result<Box<dyn Environment>> + Send + Sync>,
}

/// Optional callbacks invoked during training.
#[derive(Default)]
pub struct TrainHooks<'a> {
    /// Called every `checkpoint_interval` environment steps and at the end.
    pub on_checkpoint: Option<Box<dyn FnMut(&Checkpoint, u64) -> Result<()> + 'a>>,
    /// Called at every evaluation point with the freshly appended row.
    pub on_eval: Option<Box<dyn FnMut(&CurvePoint) + 'a>>,
    /// Early-stop predicate checked at every evaluation point; returning
    /// `true` ends training after that point.
    pub stop: Option<Box<dyn FnMut(&CurvePoint) -> bool + 'a>>,
}

/// Final training artifacts.
pub struct TrainOutput {
    pub checkpoint: Checkpoint,
    pub curve: LearningCurve,
    pub env_steps: u64,
    pub episodes: u64,
}

/// A rollout worker: owns one environment and its private RNG streams.
struct Worker {
    id: usize,
    env: Box<dyn Environment>,
    rng: ChaCha8Rng,
    seed: u64,
    obs: Vec<f64>,
    episodes: u64,
    needs_reset: bool,
}

impl Worker {
    fn new(factory: &EnvFactory, id: usize, run_seed: u64) -> Result<Self> {
        let env = (factory.train)(id)?;
        Ok(Worker {
            id,
            env,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(run_seed, 100 + id as u64, 0)),
            seed: run_seed,
            obs: Vec::new(),
            episodes: 0,
            needs_reset: true,
        })
    }

    /// Collects one transition; returns it plus whether the episode ended.
    fn step_once(
        &mut self,
        actor: &MlpParams,
        sigma: f64,
        random: bool,
    ) -> Result<(Transition, bool)> {
        if self.needs_reset {
            let seed = derive_seed(self.seed, 1000 + self.id as u64, self.episodes);
            self.obs = self.env.reset(seed)?;
            self.needs_reset = false;
        }
        let action: Vec<f64> = if random {
            (0..self.env.action_dim())
                .map(|_| self.rng.gen_range(-1.0..1.0))
                .collect()
        } else {
            select_action(actor, &self.obs, sigma, &mut self.rng)?
        };
        let out = self.env.step(&action)?;
        let tr = Transition {
            s: std::mem::take(&mut self.obs),
            a: action,
            r: out.reward,
            s_next: out.observation.clone(),
            done: out.done,
        };
        self.obs = out.observation;
        if out.done {
            self.episodes += 1;
            self.needs_reset = true;
        }
        Ok((tr, out.done))
    }
}

/// Runs one deterministic (σ = 0) evaluation episode; returns the episode
/// return and the mean per-step tracking error.
pub fn run_eval_episode(actor: &MlpParams, env: &mut dyn Environment) -> Result<(f64, f64)> {
    let mut obs = env.reset(0)?;
    let mut ret = 0.0;
    let mut err_sum = 0.0;
    let mut steps = 0usize;
    loop {
        let a = actor.forward(&obs)?;
        let out = env.step(&a)?;
        ret += out.reward;
        err_sum += out.info.tracking_error;
        steps += 1;
        obs = out.observation;
        if out.done {
            break;
        }
    }
    Ok((ret, err_sum / steps as f64))
}

enum WorkerCmd {
    Step {
        actor: Arc<MlpParams>,
        sigma: f64,
        random: bool,
    },
    Stop,
}

struct WorkerMsg {
    result: Result<(Transition, bool)>,
}

/// Runs Algorithm-style training to `config.total_steps` environment
/// steps and returns the final checkpoint plus the learning curve.
pub fn train(config: &TrainerConfig, factory: &EnvFactory, mut hooks: TrainHooks) -> Result<TrainOutput> {
    config.validate()?;
    let probe = (factory.train)(0)?;
    let (obs_dim, act_dim) = (probe.obs_dim(), probe.action_dim());
    drop(probe);
    let mut learner = Learner::new(config.clone(), obs_dim, act_dim)?;
    let mut eval_env = (factory.eval)()?;
    let mut curve = LearningCurve::default();

    let mut env_steps: u64 = 0;
    let mut episodes: u64 = 0;
    let mut next_eval = config.eval_interval;
    let mut next_ckpt = config.checkpoint_interval;

    let handle_round = |learner: &mut Learner,
                            curve: &mut LearningCurve,
                            eval_env: &mut Box<dyn Environment>,
                            hooks: &mut TrainHooks,
                            env_steps: u64,
                            episodes: u64,
                            next_eval: &mut u64,
                            next_ckpt: &mut u64|
     -> Result<bool> {
        let mut stop = false;
        if env_steps >= *next_eval {
            let (eval_return, eval_err) = run_eval_episode(&learner.actor, eval_env.as_mut())?;
            let point = CurvePoint {
                step: env_steps,
                episodes,
                sigma: learner.current_sigma(),
                critic1_loss: learner.last_critic1_loss,
                critic2_loss: learner.last_critic2_loss,
                actor_loss: learner.last_actor_loss,
                eval_return,
                eval_tracking_error: eval_err,
            };
            curve.points.push(point);
            if let Some(f) = hooks.on_eval.as_mut() {
                f(&point);
            }
            if let Some(f) = hooks.stop.as_mut() {
                stop = f(&point);
            }
            while *next_eval <= env_steps {
                *next_eval += learner.config.eval_interval;
            }
        }
        if env_steps >= *next_ckpt {
            if let Some(f) = hooks.on_checkpoint.as_mut() {
                f(&learner.checkpoint(), env_steps)?;
            }
            while *next_ckpt <= env_steps {
                *next_ckpt += learner.config.checkpoint_interval;
            }
        }
        Ok(stop)
    };

    if config.n_envs == 1 {
        // bit-reproducible single-threaded path
        let mut worker = Worker::new(factory, 0, config.seed)?;
        while env_steps < config.total_steps {
            let random = env_steps < config.warmup_steps;
            let sigma = learner.current_sigma();
            let (tr, ep_done) = worker.step_once(&learner.actor, sigma, random)?;
            learner.buffer.push(tr);
            env_steps += 1;
            if ep_done {
                episodes += 1;
                learner.decay_lr();
            }
            if !random && learner.buffer.len() >= config.batch_size {
                learner.update()?;
            }
            if handle_round(
                &mut learner,
                &mut curve,
                &mut eval_env,
                &mut hooks,
                env_steps,
                episodes,
                &mut next_eval,
                &mut next_ckpt,
            )? {
                break;
            }
        }
    } else {
        let n = config.n_envs;
        std::thread::scope(|scope| -> Result<()> {
            let mut cmd_txs = Vec::with_capacity(n);
            let mut msg_rxs = Vec::with_capacity(n);
            for w in 0..n {
                let (cmd_tx, cmd_rx) = mpsc::channel::<WorkerCmd>();
                let (msg_tx, msg_rx) = mpsc::channel::<WorkerMsg>();
                cmd_txs.push(cmd_tx);
                msg_rxs.push(msg_rx);
                let seed = config.seed;
                scope.spawn(move || {
                    let mut worker = match Worker::new(factory, w, seed) {
                        Ok(w) => w,
                        Err(e) => {
                            let _ = msg_tx.send(WorkerMsg { result: Err(e) });
                            return;
                        }
                    };
                    while let Ok(cmd) = cmd_rx.recv() {
                        match cmd {
                            WorkerCmd::Step {
                                actor,
                                sigma,
                                random,
                            } => {
                                let result = worker.step_once(&actor, sigma, random);
                                if msg_tx.send(WorkerMsg { result }).is_err() {
                                    return;
                                }
                            }
                            WorkerCmd::Stop => return,
                        }
                    }
                });
            }

            while env_steps < config.total_steps {
                let random = env_steps < config.warmup_steps;
                let sigma = learner.current_sigma();
                let snapshot = Arc::new(learner.actor.clone());
                for tx in &cmd_txs {
                    tx.send(WorkerCmd::Step {
                        actor: snapshot.clone(),
                        sigma,
                        random,
                    })
                    .map_err(|_| QuadError::TrainingDiverged("worker channel closed".into()))?;
                }
                // drain in worker order
                for (w, rx) in msg_rxs.iter().enumerate() {
                    let msg = rx
                        .recv()
                        .map_err(|_| QuadError::TrainingDiverged("worker died".into()))?;
                    let (tr, ep_done) = msg.result?;
                    learner.buffer.push(tr);
                    if ep_done {
                        episodes += 1;
                        if w == 0 {
                            learner.decay_lr();
                        }
                    }
                }
                env_steps += n as u64;
                if !random && learner.buffer.len() >= config.batch_size {
                    // one update per collected environment step
                    for _ in 0..n {
                        learner.update()?;
                    }
                }
                if handle_round(
                    &mut learner,
                    &mut curve,
                    &mut eval_env,
                    &mut hooks,
                    env_steps,
                    episodes,
                    &mut next_eval,
                    &mut next_ckpt,
                )? {
                    break;
                }
            }
            for tx in &cmd_txs {
                let _ = tx.send(WorkerCmd::Stop);
            }
            Ok(())
        })?;
    }

    let checkpoint = learner.checkpoint();
    if let Some(f) = hooks.on_checkpoint.as_mut() {
        f(&checkpoint, env_steps)?;
    }
    Ok(TrainOutput {
        checkpoint,
        curve,
        env_steps,
        episodes,
    })
}
