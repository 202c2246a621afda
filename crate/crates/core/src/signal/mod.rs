//! Shared DSP primitives used across the extraction modules.

pub mod analytic;
pub mod filter;
pub mod interp;
pub mod spectrum;
pub mod window;

pub use analytic::{analytic_signal, instantaneous_phase, unwrap_phase};
pub use filter::{butter_bandpass, butter_bandpass_analytic_magnitude, Biquad, SosFilter};
pub use interp::CubicSpline;
pub use spectrum::{welch_cross, welch_psd, CrossSpectra};

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// Population standard deviation (divide by N).
pub fn population_std(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Remove the least-squares straight line from `x`.
pub fn detrend_linear(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let nf = n as f64;
    let t_mean = (nf - 1.0) / 2.0;
    let x_mean = mean(x);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let dt = i as f64 - t_mean;
        num += dt * (v - x_mean);
        den += dt * dt;
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    x.iter()
        .enumerate()
        .map(|(i, &v)| v - (x_mean + slope * (i as f64 - t_mean)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn detrend_removes_exact_line() {
        let x: Vec<f64> = (0..100).map(|i| 3.0 + 0.25 * i as f64).collect();
        let y = detrend_linear(&x);
        assert!(y.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn population_std_matches_hand_value() {
        // values 1..=4: mean 2.5, var (2.25+0.25+0.25+2.25)/4 = 1.25
        let s = population_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(s, 1.25f64.sqrt(), epsilon = 1e-12);
    }
}
