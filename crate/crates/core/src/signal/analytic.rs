//! Analytic signal and instantaneous phase via the frequency-domain
//! Hilbert transform.

use super::spectrum::{fft_real, ifft};
use rustfft::num_complex::Complex;

/// Analytic signal of `x`: FFT, zero the negative frequencies, double the
/// positive ones (DC and Nyquist kept single), inverse FFT.
pub fn analytic_signal(x: &[f64]) -> Vec<Complex<f64>> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut spec = fft_real(x);
    let half = n / 2;
    for (k, v) in spec.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            // keep
        } else if k < half || (n % 2 == 1 && k <= half) {
            *v *= 2.0;
        } else {
            *v = Complex::new(0.0, 0.0);
        }
    }
    ifft(&spec)
}

/// Instantaneous phase of `x` in (-pi, pi].
pub fn instantaneous_phase(x: &[f64]) -> Vec<f64> {
    analytic_signal(x).iter().map(|c| c.im.atan2(c.re)).collect()
}

/// Unwrap a phase sequence by removing 2*pi jumps.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    let mut prev = None;
    for &p in phase {
        if let Some(q) = prev {
            let mut d = p + offset - q;
            while d > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
                d += 2.0 * std::f64::consts::PI;
            }
        }
        let v = p + offset;
        out.push(v);
        prev = Some(v);
    }
    out
}
