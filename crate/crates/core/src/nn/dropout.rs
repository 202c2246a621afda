//! Inverted dropout.

use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Stream;
use rand::Rng;

/// Training-mode dropout: zero each unit with probability `p` and scale
/// survivors by 1/(1-p). Returns the mask so the backward pass (and
/// fixed-mask gradient checks) reuse it.
pub fn dropout_train<R: Real>(
    x: &Tensor<R>,
    p: f64,
    rng: &mut Stream,
) -> Result<(Tensor<R>, Vec<R>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Parameter(format!("dropout p={p} outside [0, 1)")));
    }
    let scale = R::from_f64(1.0 / (1.0 - p));
    let mask: Vec<R> = (0..x.len())
        .map(|_| {
            if rng.gen::<f64>() < p {
                R::zero()
            } else {
                scale
            }
        })
        .collect();
    Ok((apply_mask(x, &mask), mask))
}

/// Evaluation-mode dropout is the identity.
pub fn dropout_eval<R: Real>(x: &Tensor<R>) -> Tensor<R> {
    x.clone()
}

/// Elementwise multiply by a dropout mask (forward and backward share it).
pub fn apply_mask<R: Real>(x: &Tensor<R>, mask: &[R]) -> Tensor<R> {
    let mut y = x.clone();
    for (v, &m) in y.data_mut().iter_mut().zip(mask.iter()) {
        *v = *v * m;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn p_zero_is_identity() {
        let x = Tensor::<f64>::from_f64(&[4], &[1.0, -2.0, 3.0, 0.5]).unwrap();
        let mut r = rng::derive(1, &[0]);
        let (y, _) = dropout_train(&x, 0.0, &mut r).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn eval_is_identity() {
        let x = Tensor::<f64>::from_f64(&[3], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(dropout_eval(&x).data(), x.data());
    }

    #[test]
    fn train_mean_is_unbiased() {
        let x = Tensor::<f64>::from_f64(&[1], &[2.0]).unwrap();
        let mut r = rng::derive(9, &[7]);
        let trials = 100_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let (y, _) = dropout_train(&x, 0.5, &mut r).unwrap();
            acc += y.data()[0];
        }
        let mean = acc / trials as f64;
        assert!((mean - 2.0).abs() < 0.04, "mean {mean}");
    }

    #[test]
    fn invalid_p_rejected() {
        let x = Tensor::<f64>::zeros(&[2]);
        let mut r = rng::derive(1, &[0]);
        assert!(dropout_train(&x, 1.0, &mut r).is_err());
        assert!(dropout_train(&x, -0.1, &mut r).is_err());
    }
}
