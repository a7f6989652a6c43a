use crate::scalar::Real;

use super::DiffNet;

/// Adaptive-moment optimizer.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    m: Vec<T>,
    v: Vec<T>,
    steps: i32,
}

impl<T: Real> Adam<T> {
    pub fn new(learning_rate: T) -> Self {
        Self {
            learning_rate,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
            m: Vec::new(),
            v: Vec::new(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.steps
    }

    /// Applies one update from the net's accumulated gradients, then clears them.
    pub fn step(&mut self, net: &mut DiffNet<T>) {
        let n = net.params.len();
        if self.m.len() != n {
            self.m = vec![T::zero(); n];
            self.v = vec![T::zero(); n];
            self.steps = 0;
        }
        self.steps += 1;
        let bias1 = T::one() - self.beta1.powi(self.steps);
        let bias2 = T::one() - self.beta2.powi(self.steps);
        let step_size = self.learning_rate / bias1;
        for (((p, g), m), v) in net
            .params
            .iter_mut()
            .zip(net.grads.iter_mut())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = self.beta1 * *m + (T::one() - self.beta1) * *g;
            *v = self.beta2 * *v + (T::one() - self.beta2) * *g * *g;
            *p -= step_size * *m / ((*v / bias2).sqrt() + self.epsilon);
            *g = T::zero();
        }
    }
}
