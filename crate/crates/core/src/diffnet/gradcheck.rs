//! Central finite-difference gradient checks.
//!
//! These only evaluate functions forward, so they serve as an oracle for the
//! analytic backward passes.

use rand::Rng;

use super::{Activation, DiffNet, NetSpec};

/// `|a - b| / max(|a|, |b|, floor)`. The floor keeps near-zero components from
/// dominating the comparison.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Largest relative error between two gradient vectors.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n, floor))
        .fold(0.0, f64::max)
}

/// Central differences of `f` at `x`, one coordinate at a time.
pub fn central_difference<F>(x: &[f64], h: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct NetCheck {
    pub spec: NetSpec,
    pub param_error: f64,
    pub input_error: f64,
}

/// Compares [`DiffNet::backward`] with finite differences for one random
/// net, input, and output weighting.
pub fn check_random_net<R: Rng + ?Sized>(rng: &mut R, h: f64) -> NetCheck {
    let input_dim = rng.random_range(1..=5);
    let depth = rng.random_range(1..=3);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=8)).collect();
    let output_dim = rng.random_range(1..=4);
    let activation = if rng.random_bool(0.5) {
        Activation::Tanh
    } else {
        Activation::Relu
    };
    let spec = NetSpec::new(input_dim, hidden, output_dim, activation).expect("valid spec");
    let mut net = DiffNet::<f64>::new(spec.clone(), rng).expect("valid net");
    // nonzero biases keep relu pre-activations off the kink
    for p in net.params_mut() {
        *p += rng.random_range(-0.2..0.2);
    }
    let x: Vec<f64> = (0..input_dim).map(|_| rng.random_range(-1.5..1.5)).collect();
    let w: Vec<f64> = (0..output_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let analytic = net.backward(&x, &w).expect("dims match");

    let weighted = |n: &DiffNet<f64>, x: &[f64]| -> f64 {
        n.forward(x)
            .expect("dims match")
            .iter()
            .zip(&w)
            .map(|(y, wi)| y * wi)
            .sum()
    };
    let mut probe = net.clone();
    let numeric_params = central_difference(net.params(), h, |p| {
        probe.params_mut().copy_from_slice(p);
        weighted(&probe, &x)
    });
    let numeric_input = central_difference(&x, h, |xi| weighted(&net, xi));
    NetCheck {
        spec,
        param_error: max_relative_error(&analytic.params, &numeric_params, 1e-6),
        input_error: max_relative_error(&analytic.input, &numeric_input, 1e-6),
    }
}
