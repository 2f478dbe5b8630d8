//! Steps the quadrotor tracking environment with a naive constant action
//! and prints the observation layout plus the reward decomposition for
//! the first few steps.
//!
//! ```bash
//! cargo run --release --example env_rollout
//! ```

use quadtrack::config::RunConfig;

fn main() -> quadtrack::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.env.episode_steps = 200;
    let factory = cfg.env_factory()?;
    let mut env = (factory.eval)()?;

    let obs = env.reset(0)?;
    println!("observation ({} wide):", obs.len());
    println!("  p          = {:?}", &obs[0..3]);
    println!("  v          = {:?}", &obs[3..6]);
    println!("  q (wxyz)   = {:?}", &obs[6..10]);
    println!("  p_d(t+1)   = {:?}", &obs[10..13]);
    println!("  p_d - p    = {:?}", &obs[13..16]);
    println!("  |e|        = {:?}", obs[16]);

    // slightly above hover, no rotation
    let action = [0.6, 0.0, 0.0, 0.0];
    let mut total = 0.0;
    for i in 0.. {
        let out = env.step(&action)?;
        total += out.reward;
        if i < 5 {
            println!(
                "step {i}: reward {:+.5}  tracking error {:.5} m  applied {:?}",
                out.reward, out.info.tracking_error, out.info.applied
            );
        }
        if out.done {
            println!("episode finished after {} steps, return {total:.3}", i + 1);
            break;
        }
    }
    Ok(())
}
