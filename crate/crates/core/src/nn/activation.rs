//! Elementwise activations with explicit backward passes.

use super::real::Real;
use super::tensor::Tensor;

/// ReLU. The cache is the input sign pattern.
pub fn relu_forward<R: Real>(x: &Tensor<R>) -> (Tensor<R>, Vec<bool>) {
    let mask: Vec<bool> = x.data().iter().map(|&v| v > R::zero()).collect();
    let mut y = x.clone();
    for (v, &m) in y.data_mut().iter_mut().zip(mask.iter()) {
        if !m {
            *v = R::zero();
        }
    }
    (y, mask)
}

pub fn relu_backward<R: Real>(dy: &Tensor<R>, mask: &[bool]) -> Tensor<R> {
    let mut dx = dy.clone();
    for (v, &m) in dx.data_mut().iter_mut().zip(mask.iter()) {
        if !m {
            *v = R::zero();
        }
    }
    dx
}

/// ELU with slope `alpha`: x for x > 0, alpha*(e^x - 1) otherwise.
/// The cache is the output (the negative-branch derivative is y + alpha).
pub fn elu_forward<R: Real>(x: &Tensor<R>, alpha: f64) -> (Tensor<R>, Tensor<R>) {
    let a = R::from_f64(alpha);
    let mut y = x.clone();
    for v in y.data_mut().iter_mut() {
        if *v <= R::zero() {
            *v = a * (v.exp() - R::one());
        }
    }
    (y.clone(), y)
}

pub fn elu_backward<R: Real>(dy: &Tensor<R>, y_cache: &Tensor<R>, alpha: f64) -> Tensor<R> {
    let a = R::from_f64(alpha);
    let mut dx = dy.clone();
    for (d, &y) in dx.data_mut().iter_mut().zip(y_cache.data().iter()) {
        if y <= R::zero() {
            *d = *d * (y + a);
        }
    }
    dx
}
