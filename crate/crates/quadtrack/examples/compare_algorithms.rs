//! Head-to-head comparison of the scheduled-noise trainer against the
//! constant-noise baseline on the point-mass testbed, two seeds each,
//! printing the summary table and writing `compare_curves.csv`.
//!
//! ```bash
//! cargo run --release --example compare_algorithms
//! ```

use quadtrack::config::RunConfig;
use quadtrack::eval::run_comparison;
use quadtrack::ttd3::Algorithm;
use std::fs::File;
use std::io::BufWriter;

fn main() -> quadtrack::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.apply_override("env.task=pointmass")?;
    cfg.apply_override("env.eval_reference=line")?;
    cfg.apply_override("env.episode_steps=50")?;
    cfg.apply_override("trainer.total_steps=20000")?;
    cfg.apply_override("trainer.warmup_steps=2000")?;
    cfg.apply_override("trainer.hidden_dims=[32,32]")?;
    cfg.apply_override("trainer.n_envs=1")?;
    cfg.apply_override("trainer.eval_interval=2000")?;
    cfg.apply_override("trainer.buffer_capacity=50000")?;
    let factory = cfg.env_factory()?;

    let mut progress = |algo: Algorithm, seed: u64, _steps: u64| {
        println!("finished {algo:?} seed {seed}");
    };
    let cmp = run_comparison(&cfg.trainer, &factory, &[0, 1], Some(&mut progress))?;
    cmp.write_curves_csv(BufWriter::new(File::create("compare_curves.csv")?))?;

    for s in [&cmp.scheduled, &cmp.baseline] {
        let (auc_m, auc_s) = s.auc_stats();
        let (fr_m, fr_s) = s.final_return_stats();
        let (fe_m, fe_s) = s.final_error_stats();
        println!(
            "{:?}: auc {auc_m:.2} ± {auc_s:.2}, final return {fr_m:.2} ± {fr_s:.2}, final error {fe_m:.4} ± {fe_s:.4}",
            s.algorithm
        );
    }
    println!("per-point curves in compare_curves.csv");
    Ok(())
}
