//! Generates the two benchmark reference trajectories (the deterministic
//! spiral and a seeded LOS random walk) and writes them as CSV next to the
//! current working directory.
//!
//! ```bash
//! cargo run --release --example gen_trajectories
//! ```

use quadtrack::trajectories::{los_rt, spiral_trajectory, LosRtConfig};
use std::fs::File;
use std::io::BufWriter;

fn main() -> quadtrack::Result<()> {
    let spiral = spiral_trajectory(3000, 0.001);
    spiral.write_csv(BufWriter::new(File::create("spiral.csv")?))?;
    println!(
        "spiral.csv: {} points, ends at {:?}",
        spiral.len(),
        spiral.point(spiral.len() - 1)?
    );

    for seed in 0..3 {
        let cfg = LosRtConfig { seed, ..Default::default() };
        let traj = los_rt(&cfg, 3000, 0.001)?;
        let path = format!("losrt_seed{seed}.csv");
        traj.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("{path}: ends at {:?}", traj.point(traj.len() - 1)?);
    }
    Ok(())
}
