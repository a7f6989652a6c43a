//! Classic fourth-order Runge-Kutta step.

use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct Scratch<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Real> Scratch<T> {
    pub fn new(n: usize) -> Self {
        Self {
            k1: vec![T::zero(); n],
            k2: vec![T::zero(); n],
            k3: vec![T::zero(); n],
            k4: vec![T::zero(); n],
            tmp: vec![T::zero(); n],
        }
    }
}

/// Advances the autonomous system `ẋ = f(x)` by `h` in place.
pub fn step<T: Real, F>(mut f: F, x: &mut [T], h: T, sc: &mut Scratch<T>)
where
    F: FnMut(&[T], &mut [T]),
{
    let half = h / T::lit(2.0);
    f(x, &mut sc.k1);
    for i in 0..x.len() {
        sc.tmp[i] = x[i] + half * sc.k1[i];
    }
    f(&sc.tmp, &mut sc.k2);
    for i in 0..x.len() {
        sc.tmp[i] = x[i] + half * sc.k2[i];
    }
    f(&sc.tmp, &mut sc.k3);
    for i in 0..x.len() {
        sc.tmp[i] = x[i] + h * sc.k3[i];
    }
    f(&sc.tmp, &mut sc.k4);
    let sixth = h / T::lit(6.0);
    for i in 0..x.len() {
        x[i] += sixth * (sc.k1[i] + T::lit(2.0) * (sc.k2[i] + sc.k3[i]) + sc.k4[i]);
    }
}
