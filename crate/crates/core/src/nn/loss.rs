//! Softmax cross-entropy loss.

use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Row-wise softmax with max subtraction.
pub fn softmax_probs<R: Real>(logits: &Tensor<R>) -> Result<Tensor<R>> {
    let s = logits.shape();
    if s.len() != 2 {
        return Err(Error::Shape(format!("softmax expects [b, k], got {:?}", s)));
    }
    let k = s[1];
    let mut probs = logits.clone();
    for row in probs.data_mut().chunks_mut(k) {
        let mut mx = R::neg_infinity();
        for &v in row.iter() {
            if v > mx {
                mx = v;
            }
        }
        let mut denom = R::zero();
        for v in row.iter_mut() {
            *v = (*v - mx).exp();
            denom += *v;
        }
        for v in row.iter_mut() {
            *v /= denom;
        }
    }
    Ok(probs)
}

/// Mean cross-entropy over the batch plus the gradient with respect to
/// the logits: (probs - onehot) / batch.
pub fn softmax_cross_entropy<R: Real>(
    logits: &Tensor<R>,
    labels: &[usize],
) -> Result<(f64, Tensor<R>)> {
    let s = logits.shape();
    if s.len() != 2 || s[0] != labels.len() {
        return Err(Error::Shape(format!(
            "cross-entropy: logits {:?} vs {} labels",
            s,
            labels.len()
        )));
    }
    let (b, k) = (s[0], s[1]);
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::Input(format!("label {bad} out of range for {k} classes")));
    }
    let mut dlogits = softmax_probs(logits)?;
    let mut loss = 0.0;
    let inv_b = R::from_f64(1.0 / b as f64);
    for (i, &label) in labels.iter().enumerate() {
        let row = &mut dlogits.data_mut()[i * k..(i + 1) * k];
        let p = row[label].as_f64();
        loss -= p.max(f64::MIN_POSITIVE).ln();
        row[label] -= R::one();
        for v in row.iter_mut() {
            *v = *v * inv_b;
        }
    }
    Ok((loss / b as f64, dlogits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_loss_is_ln_k() {
        let logits = Tensor::<f64>::zeros(&[4, 3]);
        let (loss, _) = softmax_cross_entropy(&logits, &[0, 1, 2, 0]).unwrap();
        assert!((loss - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_correct_logits_have_negligible_loss() {
        let mut logits = Tensor::<f64>::zeros(&[2, 3]);
        logits.data_mut()[0] = 20.0; // row 0 favors class 0
        logits.data_mut()[3 + 2] = 20.0; // row 1 favors class 2
        let (loss, _) = softmax_cross_entropy(&logits, &[0, 2]).unwrap();
        assert!(loss < 1e-8, "loss {loss}");
    }

    #[test]
    fn loss_is_nonnegative() {
        let logits =
            Tensor::<f64>::from_f64(&[2, 3], &[0.3, -0.2, 1.0, 4.0, -3.0, 0.0]).unwrap();
        let (loss, _) = softmax_cross_entropy(&logits, &[1, 0]).unwrap();
        assert!(loss >= 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let logits = Tensor::<f64>::from_f64(
            &[3, 3],
            &[0.5, -1.0, 0.25, 2.0, 0.0, -0.5, -2.0, 1.5, 0.75],
        )
        .unwrap();
        let labels = [2usize, 0, 1];
        let (_, grad) = softmax_cross_entropy(&logits, &labels).unwrap();
        let eps = 1e-5;
        for i in 0..9 {
            let mut lp = logits.clone();
            lp.data_mut()[i] += eps;
            let mut lm = logits.clone();
            lm.data_mut()[i] -= eps;
            let (fp, _) = softmax_cross_entropy(&lp, &labels).unwrap();
            let (fm, _) = softmax_cross_entropy(&lm, &labels).unwrap();
            let fd = (fp - fm) / (2.0 * eps);
            assert!((fd - grad.data()[i]).abs() < 1e-9, "dlogits[{i}]");
        }
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let logits = Tensor::<f64>::from_f64(&[1, 3], &[1e4, -1e4, 0.0]).unwrap();
        let (loss, grad) = softmax_cross_entropy(&logits, &[1]).unwrap();
        assert!(loss.is_finite());
        assert!(!grad.has_non_finite());
    }
}
