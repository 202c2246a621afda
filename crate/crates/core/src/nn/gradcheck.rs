//! Central finite-difference gradient verification.

/// Relative error between an analytic and a numeric gradient element:
/// |a - b| / max(|a|, |b|, 1). The unit floor keeps near-zero gradients
/// measured absolutely instead of blowing up the ratio.
pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Central finite differences of a scalar function over a parameter
/// vector: g[i] = (f(x + eps e_i) - f(x - eps e_i)) / (2 eps).
pub fn central_differences<F>(x: &[f64], eps: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut work = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = work[i];
        work[i] = orig + eps;
        let fp = f(&work);
        work[i] = orig - eps;
        let fm = f(&work);
        work[i] = orig;
        grad.push((fp - fm) / (2.0 * eps));
    }
    grad
}

/// Maximum [`rel_error`] between an analytic gradient and the central
/// finite differences of `f` at `x`.
pub fn max_rel_error<F>(x: &[f64], analytic: &[f64], eps: f64, f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x.len(), analytic.len());
    central_differences(x, eps, f)
        .iter()
        .zip(analytic.iter())
        .map(|(&n, &a)| rel_error(a, n))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient_is_recovered() {
        // f(x) = sum x_i^2, grad = 2x
        let x = vec![0.3, -1.7, 2.4];
        let analytic: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let err = max_rel_error(&x, &analytic, 1e-3, |v| v.iter().map(|a| a * a).sum());
        assert!(err < 1e-9, "err {err}");
    }

    #[test]
    fn wrong_gradient_is_flagged() {
        let x = vec![1.0, 2.0];
        let wrong = vec![2.0, 3.0]; // true grad is [2, 4]
        let err = max_rel_error(&x, &wrong, 1e-3, |v| v.iter().map(|a| a * a).sum());
        assert!(err > 0.1);
    }
}
