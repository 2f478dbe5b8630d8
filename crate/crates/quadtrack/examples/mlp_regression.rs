//! Fits a small MLP to a 1-D sine wave with the built-in explicit
//! backpropagation and Adam optimizer, printing the loss every few
//! hundred steps. A minimal tour of the `nets` module.
//!
//! ```bash
//! cargo run --release --example mlp_regression
//! ```

use ndarray::Array2;
use quadtrack::nets::{mlp_init, HiddenActivation, OptState, OutputActivation};

fn main() -> quadtrack::Result<()> {
    let n = 128;
    let xs: Vec<f64> = (0..n).map(|i| -3.0 + 6.0 * i as f64 / (n - 1) as f64).collect();
    let x = Array2::from_shape_vec((n, 1), xs.clone()).unwrap();
    let y: Vec<f64> = xs.iter().map(|v| v.sin()).collect();

    let mut net = mlp_init(&[1, 32, 32, 1], HiddenActivation::Tanh, OutputActivation::Linear, 0);
    let mut opt = OptState::new(&net, 1e-2);

    for step in 0..=2000 {
        let cache = net.forward_batch(&x)?;
        let out = cache.output();
        let mut loss = 0.0;
        let mut upstream = Array2::zeros((n, 1));
        for i in 0..n {
            let d = out[[i, 0]] - y[i];
            loss += d * d / n as f64;
            upstream[[i, 0]] = 2.0 * d / n as f64;
        }
        if step % 400 == 0 {
            println!("step {step:>4}: mse {loss:.6}");
        }
        let (grads, _) = net.backward(&cache, &upstream);
        opt.step(&mut net, &grads);
    }
    println!("sin(1.0) ≈ {:.4} (net: {:.4})", 1.0f64.sin(), net.forward(&[1.0])?[0]);
    Ok(())
}
