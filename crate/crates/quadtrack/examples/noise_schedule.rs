//! Plots (textually) the exploration-noise schedule
//! σ = β·u_max·e^{−λt} + (1−β)·u_max·e^{−δ} for two reward regimes:
//! a flat minibatch (δ = 0, pure time decay dominates the mixed term) and
//! a spread-out minibatch where the reward term collapses immediately.
//!
//! ```bash
//! cargo run --release --example noise_schedule
//! ```

use quadtrack::ttd3::{DeltaAggregator, NoiseSchedule};

fn main() {
    let flat = vec![-1.0; 256];
    let spread: Vec<f64> = (0..256).map(|i| -(i as f64) / 255.0).collect();

    for (name, rewards) in [("flat rewards (δ=0)", &flat), ("spread rewards", &spread)] {
        let mut sched = NoiseSchedule::new(0.08, 0.01, 1.0, DeltaAggregator::Sum);
        println!("{name}:");
        for t in [0u64, 1, 10, 100, 500, 1000, 5000, 10000] {
            let sigma = sched.update(t, rewards);
            let bar = "#".repeat((sigma * 60.0).round() as usize);
            println!("  t = {t:>5}: σ = {sigma:.5} {bar}");
        }
    }
    println!("\nwith the mean aggregator the reward term decays gently instead:");
    let mut sched = NoiseSchedule::new(0.08, 0.01, 1.0, DeltaAggregator::Mean);
    for t in [0u64, 100, 1000, 10000] {
        let sigma = sched.update(t, &spread);
        println!("  t = {t:>5}: σ = {sigma:.5}");
    }
}
