//! 2-hidden-layer MLP policy/critic family with explicit layer-by-layer
//! backpropagation and an Adam optimizer.
//!
//! The architecture is fixed and small, so gradients are computed by hand
//! rather than through an autodiff engine; the finite-difference test
//! suite checks them directly.

use crate::{QuadError, Result};
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Relu,
    Tanh,
}

/// Output-layer nonlinearity: `Bounded` (tanh onto [-1, 1], used by the
/// actor) or `Linear` (used by the critics).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Bounded,
    Linear,
}

/// One dense layer: `z = x Wᵀ + b` with `W` of shape `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Weights and biases of a multilayer perceptron.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub dims: Vec<usize>,
    pub hidden: HiddenActivation,
    pub output: OutputActivation,
}

/// Parameter-shaped gradient container.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub layers: Vec<Layer>,
}

impl MlpGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        MlpGrads {
            layers: params
                .layers
                .iter()
                .map(|l| Layer {
                    w: Array2::zeros(l.w.raw_dim()),
                    b: Array1::zeros(l.b.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.w.mapv_inplace(|v| v * s);
            l.b.mapv_inplace(|v| v * s);
        }
    }
}

/// Initializes an MLP with fan-in-scaled uniform weights
/// (`U(-√(6/fan_in), √(6/fan_in))`) and zero biases, deterministically
/// from `seed`.
pub fn mlp_init(
    dims: &[usize],
    hidden: HiddenActivation,
    output: OutputActivation,
    seed: u64,
) -> MlpParams {
    assert!(dims.len() >= 2, "need at least input and output dims");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = dims
        .windows(2)
        .map(|pair| {
            let (n_in, n_out) = (pair[0], pair[1]);
            let bound = (6.0 / n_in as f64).sqrt();
            let w = Array2::from_shape_fn((n_out, n_in), |_| rng.gen_range(-bound..bound));
            Layer {
                w,
                b: Array1::zeros(n_out),
            }
        })
        .collect();
    MlpParams {
        layers,
        dims: dims.to_vec(),
        hidden,
        output,
    }
}

fn apply_hidden(h: HiddenActivation, z: &mut Array2<f64>) {
    match h {
        HiddenActivation::Relu => z.mapv_inplace(|v| v.max(0.0)),
        HiddenActivation::Tanh => z.mapv_inplace(f64::tanh),
    }
}

fn apply_output(o: OutputActivation, z: &mut Array2<f64>) {
    match o {
        OutputActivation::Bounded => z.mapv_inplace(f64::tanh),
        OutputActivation::Linear => {}
    }
}

/// Post-activation values of every layer; `activations[0]` is the input.
pub struct ForwardCache {
    pub activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("cache is never empty")
    }
}

impl MlpParams {
    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    fn check_input(&self, found: usize, context: &str) -> Result<()> {
        if found != self.input_dim() {
            return Err(QuadError::DimensionMismatch {
                expected: self.input_dim().to_string(),
                found: found.to_string(),
                context: context.into(),
            });
        }
        Ok(())
    }

    /// Batched forward pass retaining per-layer activations for backward.
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<ForwardCache> {
        self.check_input(x.ncols(), "forward_batch")?;
        let n_layers = self.layers.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        activations.push(x.clone());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = activations[i].dot(&layer.w.t()) + &layer.b;
            if i + 1 < n_layers {
                apply_hidden(self.hidden, &mut z);
            } else {
                apply_output(self.output, &mut z);
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len(), "forward")?;
        let x = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("shape");
        let cache = self.forward_batch(&x)?;
        Ok(cache.output().row(0).to_vec())
    }

    /// Backpropagates `upstream` (shape `N×out`, the gradient of some
    /// scalar objective with respect to the network output) through the
    /// cached forward pass. Returns parameter gradients and the gradient
    /// with respect to the input batch.
    pub fn backward(&self, cache: &ForwardCache, upstream: &Array2<f64>) -> (MlpGrads, Array2<f64>) {
        let n_layers = self.layers.len();
        assert_eq!(upstream.ncols(), self.output_dim(), "upstream width");

        let mut grads = MlpGrads::zeros_like(self);
        // delta = dL/dz for the current layer
        let mut delta = match self.output {
            OutputActivation::Linear => upstream.clone(),
            OutputActivation::Bounded => {
                let y = cache.output();
                upstream * &y.mapv(|v| 1.0 - v * v)
            }
        };
        for i in (0..n_layers).rev() {
            let a_prev = &cache.activations[i];
            grads.layers[i].w = delta.t().dot(a_prev);
            grads.layers[i].b = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut d_prev = delta.dot(&self.layers[i].w);
                match self.hidden {
                    HiddenActivation::Relu => {
                        let mask = cache.activations[i].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
                        d_prev = d_prev * &mask;
                    }
                    HiddenActivation::Tanh => {
                        let dact = cache.activations[i].mapv(|v| 1.0 - v * v);
                        d_prev = d_prev * &dact;
                    }
                }
                delta = d_prev;
            } else {
                // gradient with respect to the input
                return (grads, delta.dot(&self.layers[0].w));
            }
        }
        unreachable!("loop always returns at i == 0")
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flattens all parameters (weights row-major, then bias, per layer).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    /// Overwrites all parameters from a flat slice (inverse of [`flatten`]).
    ///
    /// [`flatten`]: MlpParams::flatten
    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let mut it = flat.iter();
        for l in &mut self.layers {
            for v in l.w.iter_mut() {
                *v = *it.next().unwrap();
            }
            for v in l.b.iter_mut() {
                *v = *it.next().unwrap();
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().all(|v| v.is_finite()) && l.b.iter().all(|v| v.is_finite()))
    }
}

/// Gradient of a scalar-output critic with respect to the action slice of
/// its `[state | action]` input, evaluated at a single `(s, a)` pair.
pub fn critic_action_grad(critic: &MlpParams, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
    let mut input = Vec::with_capacity(state.len() + action.len());
    input.extend_from_slice(state);
    input.extend_from_slice(action);
    critic.check_input(input.len(), "critic_action_grad")?;
    let x = Array2::from_shape_vec((1, input.len()), input).expect("shape");
    let cache = critic.forward_batch(&x)?;
    let upstream = Array2::ones((1, critic.output_dim()));
    let (_, input_grad) = critic.backward(&cache, &upstream);
    Ok(input_grad.row(0).to_vec()[state.len()..].to_vec())
}

/// Adam optimizer state for one network: first/second moment accumulators,
/// step count, base step size, and a multiplicative decay applied once per
/// episode.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub m: Vec<Layer>,
    pub v: Vec<Layer>,
    pub t: u64,
    pub base_lr: f64,
    pub lr_mult: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl OptState {
    pub fn new(params: &MlpParams, base_lr: f64) -> Self {
        let zeros = || {
            params
                .layers
                .iter()
                .map(|l| Layer {
                    w: Array2::zeros(l.w.raw_dim()),
                    b: Array1::zeros(l.b.raw_dim()),
                })
                .collect::<Vec<_>>()
        };
        OptState {
            m: zeros(),
            v: zeros(),
            t: 0,
            base_lr,
            lr_mult: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// Effective step size after decay.
    pub fn lr(&self) -> f64 {
        self.base_lr * self.lr_mult
    }

    /// Multiplies the effective step size; called once per episode.
    pub fn decay(&mut self, factor: f64) {
        self.lr_mult *= factor;
    }

    /// One bias-corrected adaptive-moment descent step in place.
    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpGrads) {
        self.t += 1;
        let lr = self.lr();
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let b1t = 1.0 - b1.powi(self.t as i32);
        let b2t = 1.0 - b2.powi(self.t as i32);
        for (i, layer) in params.layers.iter_mut().enumerate() {
            let g = &grads.layers[i];
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            azip(&mut m.w, &g.w, |m, g| *m = b1 * *m + (1.0 - b1) * g);
            azip(&mut m.b, &g.b, |m, g| *m = b1 * *m + (1.0 - b1) * g);
            azip(&mut v.w, &g.w, |v, g| *v = b2 * *v + (1.0 - b2) * g * g);
            azip(&mut v.b, &g.b, |v, g| *v = b2 * *v + (1.0 - b2) * g * g);
            update(&mut layer.w, &m.w, &v.w, lr, b1t, b2t, eps);
            update(&mut layer.b, &m.b, &v.b, lr, b1t, b2t, eps);
        }
    }
}

fn azip<D: ndarray::Dimension>(
    dst: &mut ndarray::Array<f64, D>,
    src: &ndarray::Array<f64, D>,
    f: impl Fn(&mut f64, f64),
) {
    ndarray::Zip::from(dst).and(src).for_each(|d, s| f(d, *s));
}

fn update<D: ndarray::Dimension>(
    p: &mut ndarray::Array<f64, D>,
    m: &ndarray::Array<f64, D>,
    v: &ndarray::Array<f64, D>,
    lr: f64,
    b1t: f64,
    b2t: f64,
    eps: f64,
) {
    ndarray::Zip::from(p).and(m).and(v).for_each(|p, m, v| {
        let m_hat = m / b1t;
        let v_hat = v / b2t;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_input(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, dim), |_| rng.gen_range(-1.0..1.0))
    }

    /// Central finite differences of the scalar objective
    /// `sum(upstream ∘ forward(x))` over every parameter.
    fn fd_param_grads(params: &MlpParams, x: &Array2<f64>, upstream: &Array2<f64>, h: f64) -> Vec<f64> {
        let objective = |p: &MlpParams| -> f64 {
            let cache = p.forward_batch(x).unwrap();
            (cache.output() * upstream).sum()
        };
        let flat = params.flatten();
        let mut grads = Vec::with_capacity(flat.len());
        let mut work = params.clone();
        for i in 0..flat.len() {
            let mut plus = flat.clone();
            plus[i] += h;
            work.assign_from_flat(&plus);
            let f_plus = objective(&work);
            let mut minus = flat.clone();
            minus[i] -= h;
            work.assign_from_flat(&minus);
            let f_minus = objective(&work);
            grads.push((f_plus - f_minus) / (2.0 * h));
        }
        grads
    }

    fn flatten_grads(g: &MlpGrads) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &g.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-3))
            .fold(0.0, f64::max)
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = mlp_init(&[5, 8, 8, 2], HiddenActivation::Relu, OutputActivation::Bounded, 3);
        let b = mlp_init(&[5, 8, 8, 2], HiddenActivation::Relu, OutputActivation::Bounded, 3);
        assert_eq!(a, b);
        for (li, l) in a.layers.iter().enumerate() {
            let bound = (6.0 / a.dims[li] as f64).sqrt();
            assert!(l.w.iter().all(|v| v.abs() <= bound));
            assert!(l.b.iter().all(|v| *v == 0.0));
        }
        let c = mlp_init(&[5, 8, 8, 2], HiddenActivation::Relu, OutputActivation::Bounded, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn forward_hand_evaluation() {
        // 1-1-1-1 net, all weights 1, biases 0, input 1, linear output
        let mut p = mlp_init(&[1, 1, 1, 1], HiddenActivation::Relu, OutputActivation::Linear, 0);
        let flat = vec![1.0; p.param_count()];
        p.assign_from_flat(&flat);
        // biases back to zero
        for l in &mut p.layers {
            l.b.fill(0.0);
        }
        let y = p.forward(&[1.0]).unwrap();
        assert_eq!(y, vec![1.0]);
    }

    #[test]
    fn zero_params_bounded_output_is_zero() {
        let mut p = mlp_init(&[3, 4, 4, 2], HiddenActivation::Relu, OutputActivation::Bounded, 0);
        p.assign_from_flat(&vec![0.0; p.param_count()]);
        assert_eq!(p.forward(&[0.3, -0.7, 0.9]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn actor_output_stays_in_unit_box() {
        let p = mlp_init(&[17, 32, 32, 4], HiddenActivation::Relu, OutputActivation::Bounded, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..17).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let y = p.forward(&x).unwrap();
            assert!(y.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    /// Smallest |pre-activation| over all hidden units; finite differences
    /// are invalid when a ReLU kink sits within the probe step.
    fn min_hidden_preact_margin(p: &MlpParams, x: &Array2<f64>) -> f64 {
        let mut a = x.clone();
        let mut margin = f64::INFINITY;
        for (i, layer) in p.layers.iter().enumerate() {
            let z = a.dot(&layer.w.t()) + &layer.b;
            if i + 1 < p.layers.len() {
                margin = margin.min(z.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())));
                let mut act = z;
                apply_hidden(p.hidden, &mut act);
                a = act;
            }
        }
        margin
    }

    #[test]
    fn backward_matches_finite_differences_over_many_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for trial in 0..200 {
            let (hidden, output) = match trial % 4 {
                0 => (HiddenActivation::Relu, OutputActivation::Linear),
                1 => (HiddenActivation::Relu, OutputActivation::Bounded),
                2 => (HiddenActivation::Tanh, OutputActivation::Linear),
                _ => (HiddenActivation::Tanh, OutputActivation::Bounded),
            };
            let dims = [
                rng.gen_range(2..6),
                rng.gen_range(3..8),
                rng.gen_range(3..8),
                rng.gen_range(1..4),
            ];
            let p = mlp_init(&dims, hidden, output, trial as u64);
            let x = random_input(&mut rng, 4, dims[0]);
            let upstream = random_input(&mut rng, 4, dims[3]);
            if hidden == HiddenActivation::Relu && min_hidden_preact_margin(&p, &x) < 1e-3 {
                // a kink within the FD probe step makes the oracle invalid
                continue;
            }
            let cache = p.forward_batch(&x).unwrap();
            let (grads, _) = p.backward(&cache, &upstream);
            let got = flatten_grads(&grads);
            let want = fd_param_grads(&p, &x, &upstream, 1e-5);
            let err = max_rel_err(&got, &want);
            assert!(err < 1e-4, "trial {trial}: max rel err {err}");
            checked += 1;
        }
        assert!(checked >= 100, "only {checked} configurations checked");
    }

    #[test]
    fn backward_is_linear_in_upstream() {
        let p = mlp_init(&[4, 6, 6, 3], HiddenActivation::Relu, OutputActivation::Linear, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_input(&mut rng, 3, 4);
        let g = random_input(&mut rng, 3, 3);
        let cache = p.forward_batch(&x).unwrap();
        let (g1, _) = p.backward(&cache, &g);
        let (g2, _) = p.backward(&cache, &(&g * 2.5));
        let f1 = flatten_grads(&g1);
        let f2 = flatten_grads(&g2);
        for (a, b) in f1.iter().zip(&f2) {
            assert!((a * 2.5 - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let p = mlp_init(&[4, 6, 6, 3], HiddenActivation::Relu, OutputActivation::Bounded, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_input(&mut rng, 3, 4);
        let cache = p.forward_batch(&x).unwrap();
        let (g, gi) = p.backward(&cache, &Array2::zeros((3, 3)));
        assert!(flatten_grads(&g).iter().all(|v| *v == 0.0));
        assert!(gi.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn critic_action_grad_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..20 {
            let (s_dim, a_dim) = (5, 4);
            let critic = mlp_init(
                &[s_dim + a_dim, 8, 8, 1],
                HiddenActivation::Tanh,
                OutputActivation::Linear,
                100 + trial,
            );
            let s: Vec<f64> = (0..s_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: Vec<f64> = (0..a_dim).map(|_| rng.gen_range(-0.9..0.9)).collect();
            let got = critic_action_grad(&critic, &s, &a).unwrap();
            assert_eq!(got.len(), 4);
            let h = 1e-5;
            for j in 0..a_dim {
                let mut ap = a.clone();
                ap[j] += h;
                let mut am = a.clone();
                am[j] -= h;
                let q = |act: &[f64]| {
                    let mut input = s.clone();
                    input.extend_from_slice(act);
                    critic.forward(&input).unwrap()[0]
                };
                let fd = (q(&ap) - q(&am)) / (2.0 * h);
                let rel = (got[j] - fd).abs() / got[j].abs().max(fd.abs()).max(1e-3);
                assert!(rel < 1e-4, "trial {trial} comp {j}: {} vs {fd}", got[j]);
            }
        }
    }

    #[test]
    fn critic_action_grad_zero_weights() {
        let mut critic = mlp_init(&[9, 8, 8, 1], HiddenActivation::Relu, OutputActivation::Linear, 0);
        critic.assign_from_flat(&vec![0.0; critic.param_count()]);
        let g = critic_action_grad(&critic, &[0.0; 5], &[0.1; 4]).unwrap();
        assert_eq!(g, vec![0.0; 4]);
    }

    #[test]
    fn adam_zero_gradient_leaves_params_unchanged() {
        let mut p = mlp_init(&[3, 4, 4, 1], HiddenActivation::Relu, OutputActivation::Linear, 1);
        let before = p.flatten();
        let mut opt = OptState::new(&p, 1e-3);
        let zero = MlpGrads::zeros_like(&p);
        for _ in 0..10 {
            opt.step(&mut p, &zero);
        }
        assert_eq!(p.flatten(), before);
    }

    #[test]
    fn adam_first_step_magnitude_near_lr() {
        let mut p = mlp_init(&[2, 3, 3, 1], HiddenActivation::Relu, OutputActivation::Linear, 1);
        let before = p.flatten();
        let mut opt = OptState::new(&p, 1e-3);
        let mut g = MlpGrads::zeros_like(&p);
        // arbitrary nonzero gradient of widely varying scale
        for (i, l) in g.layers.iter_mut().enumerate() {
            l.w.fill(10f64.powi(i as i32 * 2 - 2));
            l.b.fill(1e-3);
        }
        opt.step(&mut p, &g);
        let after = p.flatten();
        for (a, b) in before.iter().zip(&after) {
            let step = (a - b).abs();
            // |Δ| = lr · m̂/(√v̂ + ε) ≈ lr for any gradient scale on step 1
            assert!((step - 1e-3).abs() < 1e-5, "step {step}");
        }
    }

    #[test]
    fn adam_decay_compounds_per_episode() {
        let p = mlp_init(&[2, 3, 3, 1], HiddenActivation::Relu, OutputActivation::Linear, 1);
        let mut opt = OptState::new(&p, 3e-4);
        for _ in 0..10 {
            opt.decay(0.9995);
        }
        let expected = 3e-4 * 0.9995f64.powi(10);
        assert!((opt.lr() - expected).abs() < 1e-18);
    }

    #[test]
    fn adam_descent_sanity_on_regression() {
        // 200 steps on a fixed random batch shrink MSE by >= 90%.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = random_input(&mut rng, 64, 4);
        let target = random_input(&mut rng, 64, 1);
        let mut p = mlp_init(&[4, 32, 32, 1], HiddenActivation::Relu, OutputActivation::Linear, 7);
        let mut opt = OptState::new(&p, 1e-2);
        let mse = |p: &MlpParams| {
            let out = p.forward_batch(&x).unwrap();
            let diff = out.output() - &target;
            diff.mapv(|v| v * v).mean().unwrap()
        };
        let initial = mse(&p);
        for _ in 0..200 {
            let cache = p.forward_batch(&x).unwrap();
            let diff = cache.output() - &target;
            let upstream = diff.mapv(|v| 2.0 * v / (64.0));
            let (grads, _) = p.backward(&cache, &upstream);
            opt.step(&mut p, &grads);
        }
        let fin = mse(&p);
        assert!(fin < 0.1 * initial, "mse {initial} -> {fin}");
    }

    #[test]
    fn forward_dimension_mismatch_errors() {
        let p = mlp_init(&[4, 6, 6, 2], HiddenActivation::Relu, OutputActivation::Linear, 0);
        assert!(matches!(
            p.forward(&[1.0, 2.0]),
            Err(QuadError::DimensionMismatch { .. })
        ));
    }
}
