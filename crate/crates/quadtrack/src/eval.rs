//! Evaluation: deterministic policy rollouts with full per-step traces,
//! tracking-error / control-energy / timing metrics, and a multi-seed
//! comparison harness between the scheduled-noise trainer and the
//! constant-noise baseline.

use crate::env::Environment;
use crate::math::Vec3;
use crate::nets::MlpParams;
use crate::ttd3::{train, Algorithm, EnvFactory, LearningCurve, TrainHooks, TrainerConfig};
use crate::{QuadError, Result};
use std::io::{BufRead, Write};
use std::time::Instant;

/// One row of an episode trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    pub p: Vec3,
    pub p_d: Vec3,
    pub action: Vec<f64>,
    pub reward: f64,
    pub err: f64,
}

/// A full deterministic rollout plus its summary metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub rows: Vec<TraceRow>,
    pub metrics: EpisodeMetrics,
}

/// Summary metrics of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub steps: usize,
    pub total_reward: f64,
    /// Σ_t ‖p_t − p_d(t)‖
    pub tracking_error: f64,
    /// Σ_t ‖p_t − p_d(t)‖²
    pub tracking_error_squared: f64,
    /// Σ_t √(u_tᵀ u_t) over applied normalized actions
    pub energy: f64,
}

impl EpisodeMetrics {
    /// Mean per-step Euclidean tracking error.
    pub fn mean_tracking_error(&self) -> f64 {
        self.tracking_error / self.steps as f64
    }
}

fn metrics_from_rows(rows: &[TraceRow]) -> EpisodeMetrics {
    let mut m = EpisodeMetrics {
        steps: rows.len(),
        total_reward: 0.0,
        tracking_error: 0.0,
        tracking_error_squared: 0.0,
        energy: 0.0,
    };
    for r in rows {
        m.total_reward += r.reward;
        m.tracking_error += r.err;
        m.tracking_error_squared += r.err * r.err;
        m.energy += r.action.iter().map(|a| a * a).sum::<f64>().sqrt();
    }
    m
}

/// Rolls the deterministic policy (no exploration noise) through one full
/// episode, recording every step.
pub fn run_policy_episode(
    actor: &MlpParams,
    env: &mut dyn Environment,
    reset_seed: u64,
) -> Result<EpisodeRecord> {
    let mut obs = env.reset(reset_seed)?;
    let dt_guess = env.episode_len();
    let mut rows = Vec::with_capacity(dt_guess);
    let mut step = 0usize;
    loop {
        let a = actor.forward(&obs)?;
        let out = env.step(&a)?;
        let (p, p_d) = env.trace_point();
        rows.push(TraceRow {
            step,
            t: 0.0, // filled below once the step count is known
            p,
            p_d,
            action: out.info.applied[..env.action_dim()].to_vec(),
            reward: out.reward,
            err: out.info.tracking_error,
        });
        obs = out.observation;
        step += 1;
        if out.done {
            break;
        }
    }
    let metrics = metrics_from_rows(&rows);
    Ok(EpisodeRecord { rows, metrics })
}

/// Same as [`run_policy_episode`] but stamps wall-clock-free simulation
/// time `t = step · dt` on each row.
pub fn run_policy_episode_timed(
    actor: &MlpParams,
    env: &mut dyn Environment,
    reset_seed: u64,
    dt: f64,
) -> Result<EpisodeRecord> {
    let mut rec = run_policy_episode(actor, env, reset_seed)?;
    for row in &mut rec.rows {
        row.t = row.step as f64 * dt;
    }
    Ok(rec)
}

/// Writes a trace as CSV:
/// `step,t,x,y,z,x_d,y_d,z_d,a0,…,reward,err`.
pub fn write_trace_csv<W: Write>(rec: &EpisodeRecord, mut w: W) -> Result<()> {
    let n_act = rec.rows.first().map_or(0, |r| r.action.len());
    let act_cols: Vec<String> = (0..n_act).map(|i| format!("a{i}")).collect();
    writeln!(w, "step,t,x,y,z,x_d,y_d,z_d,{},reward,err", act_cols.join(","))?;
    for r in &rec.rows {
        let acts: Vec<String> = r.action.iter().map(|a| a.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            r.p.x,
            r.p.y,
            r.p.z,
            r.p_d.x,
            r.p_d.y,
            r.p_d.z,
            acts.join(","),
            r.reward,
            r.err
        )?;
    }
    Ok(())
}

/// Parses a trace CSV written by [`write_trace_csv`] and recomputes the
/// summary metrics from the raw rows — an independent path for
/// cross-checking in-memory metrics.
pub fn read_trace_csv<R: BufRead>(r: R) -> Result<EpisodeRecord> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| QuadError::CheckpointFormat("empty trace file".into()))??;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 11 || cols[0] != "step" || cols[1] != "t" {
        return Err(QuadError::CheckpointFormat(format!(
            "unexpected trace header: {header}"
        )));
    }
    let n_act = cols.len() - 10;
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(QuadError::CheckpointFormat(format!(
                "trace row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                cols.len()
            )));
        }
        let f = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|e| QuadError::CheckpointFormat(format!("row {}: {e}", lineno + 2)))
        };
        rows.push(TraceRow {
            step: fields[0]
                .parse()
                .map_err(|e| QuadError::CheckpointFormat(format!("row {}: {e}", lineno + 2)))?,
            t: f(1)?,
            p: Vec3::new(f(2)?, f(3)?, f(4)?),
            p_d: Vec3::new(f(5)?, f(6)?, f(7)?),
            action: (0..n_act).map(|i| f(8 + i)).collect::<Result<_>>()?,
            reward: f(8 + n_act)?,
            err: f(9 + n_act)?,
        });
    }
    let metrics = metrics_from_rows(&rows);
    Ok(EpisodeRecord { rows, metrics })
}

/// Wall-clock timing of inference-only episode rollouts.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    /// Seconds per full episode, one entry per repeat.
    pub episode_seconds: Vec<f64>,
    pub mean_episode_seconds: f64,
    /// Mean seconds per control step.
    pub mean_step_seconds: f64,
}

/// Times `repeats` deterministic rollouts (forward passes plus simulator
/// steps only; no learning, no allocation-heavy tracing).
pub fn run_timing(
    actor: &MlpParams,
    env: &mut dyn Environment,
    repeats: usize,
) -> Result<TimingReport> {
    let mut episode_seconds = Vec::with_capacity(repeats);
    let mut total_steps = 0usize;
    for rep in 0..repeats {
        let mut obs = env.reset(rep as u64)?;
        let start = Instant::now();
        loop {
            let a = actor.forward(&obs)?;
            let out = env.step(&a)?;
            obs = out.observation;
            total_steps += 1;
            if out.done {
                break;
            }
        }
        episode_seconds.push(start.elapsed().as_secs_f64());
    }
    let mean = episode_seconds.iter().sum::<f64>() / repeats as f64;
    Ok(TimingReport {
        mean_episode_seconds: mean,
        mean_step_seconds: episode_seconds.iter().sum::<f64>() / total_steps as f64,
        episode_seconds,
    })
}

/// Mean and sample standard deviation.
pub fn mean_std(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-algorithm summary over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    pub curves: Vec<LearningCurve>,
    /// Mean eval return over the whole curve (area under the curve,
    /// normalized by the number of eval points), per seed.
    pub auc: Vec<f64>,
    pub final_return: Vec<f64>,
    pub final_tracking_error: Vec<f64>,
}

impl AlgorithmSummary {
    pub fn auc_stats(&self) -> (f64, f64) {
        mean_std(&self.auc)
    }
    pub fn final_return_stats(&self) -> (f64, f64) {
        mean_std(&self.final_return)
    }
    pub fn final_error_stats(&self) -> (f64, f64) {
        mean_std(&self.final_tracking_error)
    }
}

/// Result of a head-to-head comparison run.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scheduled: AlgorithmSummary,
    pub baseline: AlgorithmSummary,
}

fn summarize(algorithm: Algorithm, seeds: &[u64], curves: Vec<LearningCurve>) -> AlgorithmSummary {
    let auc = curves
        .iter()
        .map(|c| {
            let n = c.points.len().max(1) as f64;
            c.points.iter().map(|p| p.eval_return).sum::<f64>() / n
        })
        .collect();
    let final_return = curves
        .iter()
        .map(|c| c.points.last().map_or(f64::NAN, |p| p.eval_return))
        .collect();
    let final_tracking_error = curves
        .iter()
        .map(|c| c.points.last().map_or(f64::NAN, |p| p.eval_tracking_error))
        .collect();
    AlgorithmSummary {
        algorithm,
        seeds: seeds.to_vec(),
        curves,
        auc,
        final_return,
        final_tracking_error,
    }
}

/// Trains the scheduled-noise algorithm and the constant-noise baseline on
/// the same environments over the same seeds, one full run per
/// (algorithm, seed) pair.
pub fn run_comparison(
    base: &TrainerConfig,
    factory: &EnvFactory,
    seeds: &[u64],
    mut progress: Option<&mut dyn FnMut(Algorithm, u64, u64)>,
) -> Result<Comparison> {
    if seeds.is_empty() {
        return Err(QuadError::InvalidConfig("compare needs at least one seed".into()));
    }
    let run_all = |algorithm: Algorithm,
                       progress: &mut Option<&mut dyn FnMut(Algorithm, u64, u64)>|
     -> Result<Vec<LearningCurve>> {
        let mut curves = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let cfg = TrainerConfig {
                algorithm,
                seed,
                ..base.clone()
            };
            let out = train(&cfg, factory, TrainHooks::default())?;
            if let Some(f) = progress.as_mut() {
                f(algorithm, seed, out.env_steps);
            }
            curves.push(out.curve);
        }
        Ok(curves)
    };
    let scheduled = run_all(Algorithm::Ttd3, &mut progress)?;
    let baseline = run_all(Algorithm::Td3, &mut progress)?;
    Ok(Comparison {
        scheduled: summarize(Algorithm::Ttd3, seeds, scheduled),
        baseline: summarize(Algorithm::Td3, seeds, baseline),
    })
}

impl Comparison {
    /// Long-format per-point CSV:
    /// `algorithm,seed,step,eval_return,eval_tracking_error,sigma`.
    pub fn write_curves_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "algorithm,seed,step,eval_return,eval_tracking_error,sigma")?;
        for summary in [&self.scheduled, &self.baseline] {
            let name = match summary.algorithm {
                Algorithm::Ttd3 => "ttd3",
                Algorithm::Td3 => "td3",
            };
            for (seed, curve) in summary.seeds.iter().zip(&summary.curves) {
                for p in &curve.points {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        name, seed, p.step, p.eval_return, p.eval_tracking_error, p.sigma
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Summary CSV with mean ± std per algorithm:
    /// `algorithm,n_seeds,auc_mean,auc_std,final_return_mean,final_return_std,final_error_mean,final_error_std`.
    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "algorithm,n_seeds,auc_mean,auc_std,final_return_mean,final_return_std,final_error_mean,final_error_std"
        )?;
        for summary in [&self.scheduled, &self.baseline] {
            let name = match summary.algorithm {
                Algorithm::Ttd3 => "ttd3",
                Algorithm::Td3 => "td3",
            };
            let (am, asd) = summary.auc_stats();
            let (rm, rsd) = summary.final_return_stats();
            let (em, esd) = summary.final_error_stats();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                name,
                summary.seeds.len(),
                am,
                asd,
                rm,
                rsd,
                em,
                esd
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{PointMassEnv, RewardConfig};
    use crate::nets::{mlp_init, HiddenActivation, OutputActivation};

    fn test_env() -> PointMassEnv {
        let reference = PointMassEnv::line_reference(
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            0.05,
            50,
            0.05,
        );
        PointMassEnv::eval(reference, RewardConfig::default()).unwrap()
    }

    fn test_actor() -> MlpParams {
        mlp_init(
            &[13, 8, 8, 3],
            HiddenActivation::Relu,
            OutputActivation::Bounded,
            7,
        )
    }

    #[test]
    fn episode_record_covers_full_episode() {
        let actor = test_actor();
        let mut env = test_env();
        let rec = run_policy_episode(&actor, &mut env, 0).unwrap();
        assert_eq!(rec.rows.len(), 50);
        assert_eq!(rec.metrics.steps, 50);
        assert!(rec.metrics.tracking_error >= 0.0);
        assert!(rec.metrics.tracking_error_squared <= rec.metrics.tracking_error.powi(2));
        // energy bounded by steps·√(action_dim) for normalized actions
        assert!(rec.metrics.energy <= 50.0 * 3f64.sqrt() + 1e-12);
    }

    #[test]
    fn metrics_match_hand_computation() {
        let rows = vec![
            TraceRow {
                step: 0,
                t: 0.0,
                p: Vec3::new(1.0, 0.0, 0.0),
                p_d: Vec3::ZERO,
                action: vec![0.6, -0.8],
                reward: -1.0,
                err: 1.0,
            },
            TraceRow {
                step: 1,
                t: 0.05,
                p: Vec3::new(0.0, 2.0, 0.0),
                p_d: Vec3::ZERO,
                action: vec![0.0, 0.0],
                reward: -4.0,
                err: 2.0,
            },
        ];
        let m = metrics_from_rows(&rows);
        assert_eq!(m.steps, 2);
        assert!((m.total_reward - -5.0).abs() < 1e-15);
        assert!((m.tracking_error - 3.0).abs() < 1e-15);
        assert!((m.tracking_error_squared - 5.0).abs() < 1e-15);
        assert!((m.energy - 1.0).abs() < 1e-15); // √(0.36+0.64) + 0
    }

    #[test]
    fn trace_csv_round_trip_recomputes_identical_metrics() {
        let actor = test_actor();
        let mut env = test_env();
        let rec = run_policy_episode_timed(&actor, &mut env, 0, 0.05).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&rec, &mut buf).unwrap();
        let back = read_trace_csv(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back.rows.len(), rec.rows.len());
        // f64::to_string round-trips exactly, so recomputed metrics match bitwise
        assert_eq!(back.metrics, rec.metrics);
        assert_eq!(back.rows, rec.rows);
    }

    #[test]
    fn trace_csv_header_layout() {
        let actor = test_actor();
        let mut env = test_env();
        let rec = run_policy_episode(&actor, &mut env, 0).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&rec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, "step,t,x,y,z,x_d,y_d,z_d,a0,a1,a2,reward,err");
    }

    #[test]
    fn malformed_trace_rejected() {
        let bad = "foo,bar\n1,2\n";
        assert!(read_trace_csv(std::io::BufReader::new(bad.as_bytes())).is_err());
        let short_row = "step,t,x,y,z,x_d,y_d,z_d,a0,reward,err\n0,0,0,0,0\n";
        assert!(read_trace_csv(std::io::BufReader::new(short_row.as_bytes())).is_err());
    }

    #[test]
    fn timing_report_is_positive_and_averaged() {
        let actor = test_actor();
        let mut env = test_env();
        let rep = run_timing(&actor, &mut env, 3).unwrap();
        assert_eq!(rep.episode_seconds.len(), 3);
        assert!(rep.mean_episode_seconds > 0.0);
        assert!(rep.mean_step_seconds > 0.0);
        assert!(rep.mean_step_seconds < rep.mean_episode_seconds);
        let mean = rep.episode_seconds.iter().sum::<f64>() / 3.0;
        assert!((rep.mean_episode_seconds - mean).abs() < 1e-15);
    }

    #[test]
    fn mean_std_basics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((s - 1.0).abs() < 1e-15);
        let (m1, s1) = mean_std(&[5.0]);
        assert_eq!((m1, s1), (5.0, 0.0));
    }

    #[test]
    fn comparison_harness_smoke() {
        use crate::ttd3::EnvFactory;
        let reward = RewardConfig::default();
        let factory = EnvFactory {
            train: Box::new(move |_| {
                Ok(Box::new(PointMassEnv::train(0.05, 50, 0.5, reward)?) as _)
            }),
            eval: Box::new(move || {
                let reference = PointMassEnv::line_reference(
                    Vec3::ZERO,
                    Vec3::new(1.0, 0.0, 0.0),
                    0.05,
                    50,
                    0.05,
                );
                Ok(Box::new(PointMassEnv::eval(reference, reward)?) as _)
            }),
        };
        let base = TrainerConfig {
            total_steps: 400,
            warmup_steps: 100,
            batch_size: 16,
            hidden_dims: vec![8, 8],
            n_envs: 1,
            eval_interval: 200,
            buffer_capacity: 1000,
            ..Default::default()
        };
        let cmp = run_comparison(&base, &factory, &[1, 2], None).unwrap();
        assert_eq!(cmp.scheduled.curves.len(), 2);
        assert_eq!(cmp.baseline.curves.len(), 2);
        assert!(cmp.scheduled.auc.iter().all(|v| v.is_finite()));

        let mut curves_csv = Vec::new();
        cmp.write_curves_csv(&mut curves_csv).unwrap();
        let text = String::from_utf8(curves_csv).unwrap();
        assert!(text.starts_with("algorithm,seed,step,"));
        // 2 algorithms × 2 seeds × 2 eval points + header
        assert_eq!(text.lines().count(), 9);

        let mut summary_csv = Vec::new();
        cmp.write_summary_csv(&mut summary_csv).unwrap();
        let text = String::from_utf8(summary_csv).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("ttd3") && text.contains("td3"));
    }
}
