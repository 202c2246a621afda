//! Parameter initialization.

use super::real::Real;
use super::tensor::Tensor;
use crate::rng::Stream;
use rand::Rng;

/// Fan-in-scaled uniform initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
pub fn fan_in_uniform<R: Real>(shape: &[usize], fan_in: usize, rng: &mut Stream) -> Tensor<R> {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    let data: Vec<R> = (0..shape.iter().product::<usize>())
        .map(|_| R::from_f64(rng.gen_range(-bound..bound)))
        .collect();
    Tensor::from_vec(shape, data).expect("volume matches by construction")
}

/// Constant-filled tensor (biases, batchnorm affine parameters).
pub fn constant<R: Real>(shape: &[usize], v: f64) -> Tensor<R> {
    let mut t = Tensor::zeros(shape);
    t.fill(R::from_f64(v));
    t
}
