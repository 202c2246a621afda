//! Window functions for spectral analysis.

use std::f64::consts::PI;

/// Periodic Hann window of length `n` (suitable for Welch averaging).
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Kaiser window of length `n` with shape parameter `beta`.
///
/// `beta = 0` gives a rectangular window; larger values taper harder.
pub fn kaiser(n: usize, beta: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let r = 2.0 * i as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).sqrt()) / denom
        })
        .collect()
}

/// Modified Bessel function of the first kind, order zero.
///
/// Power-series evaluation; converges quickly for the beta range used by
/// Kaiser windows.
pub fn bessel_i0(x: f64) -> f64 {
    let y = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= y / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hann_endpoints_and_symmetry() {
        let w = hann(16);
        assert_relative_eq!(w[0], 0.0, epsilon = 1e-15);
        // periodic window: w[k] == w[n-k]
        for k in 1..16 {
            assert_relative_eq!(w[k], w[16 - k], epsilon = 1e-12);
        }
    }

    #[test]
    fn kaiser_zero_beta_is_rectangular() {
        let w = kaiser(9, 0.0);
        assert!(w.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn kaiser_is_unit_peak_and_tapered() {
        let w = kaiser(33, 5.0);
        let peak = w.iter().cloned().fold(f64::MIN, f64::max);
        assert_relative_eq!(peak, 1.0, epsilon = 1e-12);
        assert!(w[0] < 0.1);
        assert!(w[16] > 0.99);
    }

    #[test]
    fn bessel_i0_reference_values() {
        // Abramowitz & Stegun table values.
        assert_relative_eq!(bessel_i0(0.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(bessel_i0(1.0), 1.2660658777520084, epsilon = 1e-12);
        assert_relative_eq!(bessel_i0(2.0), 2.2795853023360673, epsilon = 1e-12);
        assert_relative_eq!(bessel_i0(5.0), 27.239871823604442, epsilon = 1e-10);
    }
}
