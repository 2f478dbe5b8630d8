//! Command-line entry points: `train`, `eval`, `gen-traj`, `compare`.
//!
//! Every command takes an optional TOML configuration file plus repeated
//! `--set section.key=value` overrides; `train` and `compare` write their
//! artifacts into a run directory under `--out` (default `$QUADTRACK_RUNS`
//! or `./runs`).
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical divergence,
//! 4 I/O or file-format error.

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::eval::{run_comparison, run_policy_episode_timed, run_timing, write_trace_csv};
use crate::trajectories::{los_rt, spiral_trajectory, LosRtConfig};
use crate::ttd3::{train, TrainHooks};
use crate::{QuadError, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

/// Environment variable naming the default run-directory root.
pub const RUNS_DIR_VAR: &str = "QUADTRACK_RUNS";

#[derive(Debug, Parser)]
#[command(name = "quadtrack", version, about = "Quadrotor trajectory-tracking laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a tracking policy and write checkpoint + learning curve.
    Train(TrainArgs),
    /// Roll a trained policy through one evaluation episode and report
    /// tracking error, control energy, and (optionally) timing.
    Eval(EvalArgs),
    /// Generate a reference trajectory as CSV.
    GenTraj(GenTrajArgs),
    /// Train the scheduled-noise algorithm and the constant-noise baseline
    /// over several seeds and summarize both.
    Compare(CompareArgs),
}

/// Shared configuration flags.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML configuration file; defaults apply for everything omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration value, e.g. `--set trainer.seed=7`.
    /// Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for spec in &self.set {
            cfg.apply_override(spec)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Run directory (created if missing). Defaults to
    /// `<root>/<task>-<algorithm>-seed<seed>` under `$QUADTRACK_RUNS` or
    /// `./runs`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Suppress per-evaluation progress lines.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Checkpoint file to evaluate.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Optional per-step trace CSV output path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also time inference-only rollouts, averaged over this many repeats.
    #[arg(long, value_name = "REPEATS")]
    pub timing: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajKind {
    Spiral,
    Losrt,
}

#[derive(Debug, Args)]
pub struct GenTrajArgs {
    /// Trajectory family.
    #[arg(long, value_enum)]
    pub kind: TrajKind,
    /// Number of points.
    #[arg(long, default_value_t = 3000)]
    pub steps: usize,
    /// Sampling period [s].
    #[arg(long, default_value_t = 0.001)]
    pub dt: f64,
    /// Seed for the randomized families.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Seeds to train each algorithm on.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub seeds: Vec<u64>,
    /// Output directory for `curves.csv` and `summary.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Maps an error to the documented process exit code.
pub fn exit_code(err: &QuadError) -> i32 {
    match err {
        QuadError::InvalidConfig(_)
        | QuadError::DimensionMismatch { .. }
        | QuadError::EpisodeBounds { .. }
        | QuadError::InsufficientData { .. } => 2,
        QuadError::TrainingDiverged(_)
        | QuadError::DivergedSimulation { .. }
        | QuadError::NonFiniteDerivative { .. }
        | QuadError::DegenerateQuaternion
        | QuadError::EpisodeFinished => 3,
        QuadError::Io(_) | QuadError::CheckpointFormat(_) => 4,
    }
}

fn runs_root() -> PathBuf {
    std::env::var_os(RUNS_DIR_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn default_run_dir(cfg: &RunConfig) -> PathBuf {
    let task = match cfg.env.task {
        crate::config::Task::Quadrotor => "quadrotor",
        crate::config::Task::Pointmass => "pointmass",
    };
    let algo = match cfg.trainer.algorithm {
        crate::ttd3::Algorithm::Ttd3 => "ttd3",
        crate::ttd3::Algorithm::Td3 => "td3",
    };
    runs_root().join(format!("{task}-{algo}-seed{}", cfg.trainer.seed))
}

fn cmd_train(args: &TrainArgs, out: &mut impl Write) -> Result<()> {
    let cfg = args.config.resolve()?;
    let run_dir = args.out.clone().unwrap_or_else(|| default_run_dir(&cfg));
    std::fs::create_dir_all(&run_dir)?;
    cfg.freeze(&run_dir.join("config.toml"))?;

    let factory = cfg.env_factory()?;
    let ckpt_path = run_dir.join("checkpoint.bin");
    let quiet = args.quiet;
    let progress_out = &mut *out;
    let hooks = TrainHooks {
        on_checkpoint: Some(Box::new(|ck: &Checkpoint, _step| ck.save(&ckpt_path))),
        on_eval: Some(Box::new(move |p| {
            if !quiet {
                let _ = writeln!(
                    progress_out,
                    "step {:>8}  episodes {:>5}  sigma {:.4}  eval_return {:>12.3}  eval_err {:.4}",
                    p.step, p.episodes, p.sigma, p.eval_return, p.eval_tracking_error
                );
            }
        })),
        stop: None,
    };
    let result = train(&cfg.trainer, &factory, hooks)?;
    result
        .curve
        .write_csv(BufWriter::new(File::create(run_dir.join("curve.csv"))?))?;
    writeln!(
        out,
        "trained {} env steps ({} episodes); artifacts in {}",
        result.env_steps,
        result.episodes,
        run_dir.display()
    )?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs, out: &mut impl Write) -> Result<()> {
    let cfg = args.config.resolve()?;
    let ck = Checkpoint::load(&args.checkpoint)?;
    let factory = cfg.env_factory()?;
    let mut env = (factory.eval)()?;
    if ck.actor.dims[0] != env.obs_dim() {
        return Err(QuadError::DimensionMismatch {
            expected: env.obs_dim().to_string(),
            found: ck.actor.dims[0].to_string(),
            context: "checkpoint actor input width vs environment observation".into(),
        });
    }
    let rec = run_policy_episode_timed(&ck.actor, env.as_mut(), 0, cfg.control_dt())?;
    let m = &rec.metrics;
    writeln!(out, "steps:                  {}", m.steps)?;
    writeln!(out, "total reward:           {:.6}", m.total_reward)?;
    writeln!(out, "tracking error (sum):   {:.6}", m.tracking_error)?;
    writeln!(out, "tracking error (sq):    {:.6}", m.tracking_error_squared)?;
    writeln!(out, "tracking error (mean):  {:.6}", m.mean_tracking_error())?;
    writeln!(out, "control energy:         {:.6}", m.energy)?;
    if let Some(path) = &args.trace {
        write_trace_csv(&rec, BufWriter::new(File::create(path)?))?;
        writeln!(out, "trace written to {}", path.display())?;
    }
    if let Some(repeats) = args.timing {
        let rep = run_timing(&ck.actor, env.as_mut(), repeats.max(1))?;
        writeln!(
            out,
            "timing over {} runs:    {:.6} s/episode ({:.3} µs/step)",
            rep.episode_seconds.len(),
            rep.mean_episode_seconds,
            rep.mean_step_seconds * 1e6
        )?;
    }
    Ok(())
}

fn cmd_gen_traj(args: &GenTrajArgs, out: &mut impl Write) -> Result<()> {
    if args.steps < 2 {
        return Err(QuadError::InvalidConfig("--steps must be >= 2".into()));
    }
    if !(args.dt > 0.0) {
        return Err(QuadError::InvalidConfig("--dt must be > 0".into()));
    }
    let traj = match args.kind {
        TrajKind::Spiral => spiral_trajectory(args.steps, args.dt),
        TrajKind::Losrt => los_rt(
            &LosRtConfig {
                seed: args.seed,
                ..Default::default()
            },
            args.steps,
            args.dt,
        )?,
    };
    traj.write_csv(BufWriter::new(File::create(&args.out)?))?;
    writeln!(out, "{} points written to {}", traj.len(), args.out.display())?;
    Ok(())
}

fn cmd_compare(args: &CompareArgs, out: &mut impl Write) -> Result<()> {
    let cfg = args.config.resolve()?;
    let factory = cfg.env_factory()?;
    let out_dir = args.out.clone().unwrap_or_else(|| runs_root().join("compare"));
    std::fs::create_dir_all(&out_dir)?;
    cfg.freeze(&out_dir.join("config.toml"))?;

    let mut progress = |algo: crate::ttd3::Algorithm, seed: u64, steps: u64| {
        let name = match algo {
            crate::ttd3::Algorithm::Ttd3 => "ttd3",
            crate::ttd3::Algorithm::Td3 => "td3",
        };
        eprintln!("{name} seed {seed}: {steps} env steps done");
    };
    let cmp = run_comparison(&cfg.trainer, &factory, &args.seeds, Some(&mut progress))?;
    cmp.write_curves_csv(BufWriter::new(File::create(out_dir.join("curves.csv"))?))?;
    cmp.write_summary_csv(BufWriter::new(File::create(out_dir.join("summary.csv"))?))?;

    for s in [&cmp.scheduled, &cmp.baseline] {
        let name = match s.algorithm {
            crate::ttd3::Algorithm::Ttd3 => "ttd3",
            crate::ttd3::Algorithm::Td3 => "td3",
        };
        let (am, asd) = s.auc_stats();
        let (rm, rsd) = s.final_return_stats();
        let (em, esd) = s.final_error_stats();
        writeln!(
            out,
            "{name:>5}: auc {am:.3} ± {asd:.3}  final_return {rm:.3} ± {rsd:.3}  final_err {em:.4} ± {esd:.4}"
        )?;
    }
    writeln!(out, "artifacts in {}", out_dir.display())?;
    Ok(())
}

/// Runs one parsed command, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut impl Write) -> Result<()> {
    match &cli.command {
        Command::Train(args) => cmd_train(args, out),
        Command::Eval(args) => cmd_eval(args, out),
        Command::GenTraj(args) => cmd_gen_traj(args, out),
        Command::Compare(args) => cmd_compare(args, out),
    }
}

/// Parses `argv`, runs it, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I, out: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version itself with code 0
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
