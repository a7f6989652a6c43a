//! Small fully connected networks with hand-written reverse-mode gradients.
//!
//! A [`DiffNet`] stores every weight and bias in one flat parameter vector
//! together with a same-shape gradient accumulator. Each layer is a dense
//! affine map; hidden layers apply the configured nonlinearity and the output
//! layer is linear. Backpropagation is a per-layer sequence of
//! Jacobian-vector products, returning gradients with respect to both the
//! parameters and the input. The input gradient is what lets an actor
//! differentiate a critic with respect to the action it proposes.

pub mod gradcheck;
pub mod io;
pub mod optim;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

pub use optim::Adam;

/// Hidden-layer nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(T::zero()),
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn derivative_from_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Tanh => T::one() - y * y,
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Shape of a fully connected network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
}

impl NetSpec {
    pub fn new(
        input_dim: usize,
        hidden: Vec<usize>,
        output_dim: usize,
        activation: Activation,
    ) -> Result<Self> {
        let spec = Self {
            input_dim,
            hidden,
            output_dim,
            activation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::InvalidSpec(format!(
                "all layer widths must be >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` for every affine layer, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 1);
        let mut prev = self.input_dim;
        for &h in &self.hidden {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.output_dim));
        dims
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| i * o + o).sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct Layer {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    biases: usize,
}

fn layout(spec: &NetSpec) -> Vec<Layer> {
    let mut offset = 0;
    spec.layer_dims()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let layer = Layer {
                fan_in,
                fan_out,
                weights: offset,
                biases: offset + fan_in * fan_out,
            };
            offset += fan_in * fan_out + fan_out;
            layer
        })
        .collect()
}

/// Activations recorded by a forward pass, reused across calls.
#[derive(Clone, Debug, Default)]
pub struct Tape<T> {
    acts: Vec<Vec<T>>,
    delta: Vec<T>,
    next_delta: Vec<T>,
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self {
            acts: Vec::new(),
            delta: Vec::new(),
            next_delta: Vec::new(),
        }
    }

    pub fn output(&self) -> &[T] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Result of [`DiffNet::backward`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub params: Vec<T>,
    pub input: Vec<T>,
}

/// A differentiable multilayer perceptron.
#[derive(Clone, Debug)]
pub struct DiffNet<T> {
    spec: NetSpec,
    layers: Vec<Layer>,
    params: Vec<T>,
    grads: Vec<T>,
}

impl<T: Real> DiffNet<T> {
    /// All parameters zero.
    pub fn zeros(spec: NetSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.param_count();
        Ok(Self {
            layers: layout(&spec),
            spec,
            params: vec![T::zero(); n],
            grads: vec![T::zero(); n],
        })
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn new<R: Rng + ?Sized>(spec: NetSpec, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        for layer in net.layers.clone() {
            let bound = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
            for w in &mut net.params[layer.weights..layer.biases] {
                *w = T::lit(rng.random_range(-bound..bound));
            }
        }
        Ok(net)
    }

    pub fn from_params(spec: NetSpec, params: Vec<T>) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        check_dim("DiffNet::from_params", net.params.len(), params.len())?;
        net.params = params;
        Ok(net)
    }

    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn grads(&self) -> &[T] {
        &self.grads
    }

    pub fn grads_mut(&mut self) -> &mut [T] {
        &mut self.grads
    }

    pub fn zero_grad(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = T::zero());
    }

    /// Index range of layer `l`'s weights (row-major, `fan_out × fan_in`) in the
    /// flat parameter vector, followed by its biases.
    pub fn layer_ranges(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let layer = self.layers[l];
        (
            layer.weights..layer.biases,
            layer.biases..layer.biases + layer.fan_out,
        )
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let mut tape = Tape::new();
        self.forward_with(x, &mut tape)?;
        Ok(tape.acts.pop().unwrap_or_default())
    }

    /// Forward pass that records activations for a later backward pass.
    pub fn forward_with<'a>(&self, x: &[T], tape: &'a mut Tape<T>) -> Result<&'a [T]> {
        check_dim("DiffNet::forward", self.spec.input_dim, x.len())?;
        let n_layers = self.layers.len();
        tape.acts.resize_with(n_layers + 1, Vec::new);
        tape.acts[0].clear();
        tape.acts[0].extend_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = tape.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            out.clear();
            let w = &self.params[layer.weights..layer.biases];
            let b = &self.params[layer.biases..layer.biases + layer.fan_out];
            let hidden = l + 1 < n_layers;
            for (row, &bias) in w.chunks_exact(layer.fan_in).zip(b) {
                let z = row
                    .iter()
                    .zip(input)
                    .fold(bias, |acc, (&wi, &xi)| acc + wi * xi);
                out.push(if hidden { self.spec.activation.apply(z) } else { z });
            }
        }
        Ok(tape.output())
    }

    fn backward_impl(
        &self,
        tape: &mut Tape<T>,
        out_grad: &[T],
        mut param_grads: Option<&mut [T]>,
        input_grads: &mut Vec<T>,
    ) -> Result<()> {
        check_dim("DiffNet::backward", self.spec.output_dim, out_grad.len())?;
        if tape.acts.len() != self.layers.len() + 1 {
            return Err(Error::InvalidSpec(
                "backward called without a matching forward pass".into(),
            ));
        }
        let Tape {
            acts,
            delta,
            next_delta,
        } = tape;
        delta.clear();
        delta.extend_from_slice(out_grad);
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let input = &acts[l];
            let w = &self.params[layer.weights..layer.biases];
            if let Some(g) = param_grads.as_deref_mut() {
                let (gw, gb) = g[layer.weights..layer.biases + layer.fan_out]
                    .split_at_mut(layer.fan_in * layer.fan_out);
                for ((grow, gbias), &dj) in gw.chunks_exact_mut(layer.fan_in).zip(gb).zip(delta.iter()) {
                    *gbias += dj;
                    for (gwi, &xi) in grow.iter_mut().zip(input) {
                        *gwi += dj * xi;
                    }
                }
            }
            next_delta.clear();
            next_delta.resize(layer.fan_in, T::zero());
            for (row, &dj) in w.chunks_exact(layer.fan_in).zip(delta.iter()) {
                for (ni, &wi) in next_delta.iter_mut().zip(row) {
                    *ni += wi * dj;
                }
            }
            if l > 0 {
                let act = self.spec.activation;
                for (ni, &yi) in next_delta.iter_mut().zip(input) {
                    *ni *= act.derivative_from_output(yi);
                }
            }
            std::mem::swap(delta, next_delta);
        }
        input_grads.clear();
        input_grads.extend_from_slice(delta);
        Ok(())
    }

    /// Gradients of `out_grad · forward(x)` with respect to parameters and input.
    pub fn backward(&self, x: &[T], out_grad: &[T]) -> Result<Gradients<T>> {
        let mut tape = Tape::new();
        self.forward_with(x, &mut tape)?;
        let mut params = vec![T::zero(); self.params.len()];
        let mut input = Vec::new();
        self.backward_impl(&mut tape, out_grad, Some(&mut params), &mut input)?;
        Ok(Gradients { params, input })
    }

    /// Adds the parameter gradient into the accumulator and writes the input
    /// gradient into `input_grads`. `tape` must hold this net's latest forward pass.
    pub fn accumulate(
        &mut self,
        tape: &mut Tape<T>,
        out_grad: &[T],
        input_grads: &mut Vec<T>,
    ) -> Result<()> {
        let mut grads = std::mem::take(&mut self.grads);
        let res = self.backward_impl(tape, out_grad, Some(&mut grads), input_grads);
        self.grads = grads;
        res
    }

    /// Input gradient only; parameters and accumulator are untouched.
    pub fn input_gradient(
        &self,
        tape: &mut Tape<T>,
        out_grad: &[T],
        input_grads: &mut Vec<T>,
    ) -> Result<()> {
        self.backward_impl(tape, out_grad, None, input_grads)
    }

    /// `self = (1 - alpha) * self + alpha * source`, elementwise.
    pub fn soft_update(&mut self, source: &DiffNet<T>, alpha: T) -> Result<()> {
        if self.spec != source.spec {
            return Err(Error::SpecMismatch);
        }
        let keep = T::one() - alpha;
        for (t, &s) in self.params.iter_mut().zip(&source.params) {
            *t = keep * *t + alpha * s;
        }
        Ok(())
    }

    pub fn copy_params_from(&mut self, source: &DiffNet<T>) -> Result<()> {
        if self.spec != source.spec {
            return Err(Error::SpecMismatch);
        }
        self.params.copy_from_slice(&source.params);
        Ok(())
    }
}
