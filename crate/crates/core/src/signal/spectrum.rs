//! FFT-based spectral estimation: Welch auto- and cross-spectra.

use crate::error::{Error, Result};
use rustfft::{num_complex::Complex, FftPlanner};

/// Forward complex FFT of a real sequence.
pub fn fft_real(x: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// Inverse complex FFT, normalized by 1/N.
pub fn ifft(x: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let mut buf = x.to_vec();
    FftPlanner::new()
        .plan_fft_inverse(buf.len())
        .process(&mut buf);
    let n = buf.len() as f64;
    for v in buf.iter_mut() {
        *v /= n;
    }
    buf
}

/// One-sided frequency axis for an `n`-point FFT at sampling rate `fs`.
pub fn rfft_freqs(n: usize, fs: f64) -> Vec<f64> {
    (0..=n / 2).map(|k| k as f64 * fs / n as f64).collect()
}

/// Welch power spectral density (one-sided, density scaling).
///
/// Segments of `nperseg` samples advance by `hop`; each segment has its
/// mean removed and is multiplied by `window` before the FFT. Returns
/// `(freqs, psd)` with `psd[k]` in units of x^2 per Hz.
pub fn welch_psd(
    x: &[f64],
    fs: f64,
    nperseg: usize,
    hop: usize,
    window: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let spectra = segment_spectra(x, nperseg, hop, window)?;
    let scale = 1.0 / (fs * window.iter().map(|w| w * w).sum::<f64>());
    let nfreq = nperseg / 2 + 1;
    let mut psd = vec![0.0; nfreq];
    for seg in &spectra {
        for (k, p) in psd.iter_mut().enumerate() {
            *p += seg[k].norm_sqr();
        }
    }
    let nseg = spectra.len() as f64;
    for (k, p) in psd.iter_mut().enumerate() {
        let one_sided = if k == 0 || (nperseg % 2 == 0 && k == nperseg / 2) {
            1.0
        } else {
            2.0
        };
        *p *= scale * one_sided / nseg;
    }
    Ok((rfft_freqs(nperseg, fs), psd))
}

/// Welch cross power spectral density between `x` and `y` (one-sided),
/// conj(X) * Y convention. Also returns the two auto-spectra from the
/// same segmentation so coherence can be formed consistently.
pub struct CrossSpectra {
    pub freqs: Vec<f64>,
    pub sxy: Vec<Complex<f64>>,
    pub sxx: Vec<f64>,
    pub syy: Vec<f64>,
    pub n_segments: usize,
}

pub fn welch_cross(
    x: &[f64],
    y: &[f64],
    fs: f64,
    nperseg: usize,
    hop: usize,
    window: &[f64],
) -> Result<CrossSpectra> {
    if x.len() != y.len() {
        return Err(Error::Parameter(format!(
            "cross-spectrum inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let sx = segment_spectra(x, nperseg, hop, window)?;
    let sy = segment_spectra(y, nperseg, hop, window)?;
    let scale = 1.0 / (fs * window.iter().map(|w| w * w).sum::<f64>());
    let nfreq = nperseg / 2 + 1;
    let mut sxy = vec![Complex::new(0.0, 0.0); nfreq];
    let mut sxx = vec![0.0; nfreq];
    let mut syy = vec![0.0; nfreq];
    for (a, b) in sx.iter().zip(sy.iter()) {
        for k in 0..nfreq {
            sxy[k] += a[k].conj() * b[k];
            sxx[k] += a[k].norm_sqr();
            syy[k] += b[k].norm_sqr();
        }
    }
    let nseg = sx.len() as f64;
    for k in 0..nfreq {
        let one_sided = if k == 0 || (nperseg % 2 == 0 && k == nperseg / 2) {
            1.0
        } else {
            2.0
        };
        let s = scale * one_sided / nseg;
        sxy[k] *= s;
        sxx[k] *= s;
        syy[k] *= s;
    }
    Ok(CrossSpectra {
        freqs: rfft_freqs(nperseg, fs),
        sxy,
        sxx,
        syy,
        n_segments: sx.len(),
    })
}

fn segment_spectra(
    x: &[f64],
    nperseg: usize,
    hop: usize,
    window: &[f64],
) -> Result<Vec<Vec<Complex<f64>>>> {
    if nperseg == 0 || hop == 0 || window.len() != nperseg {
        return Err(Error::Parameter(
            "segment length, hop, and window must be consistent and nonzero".into(),
        ));
    }
    if x.len() < nperseg {
        return Err(Error::InsufficientSignal(format!(
            "signal of {} samples shorter than one segment of {}",
            x.len(),
            nperseg
        )));
    }
    let planner_fft = FftPlanner::new().plan_fft_forward(nperseg);
    let mut out = Vec::new();
    let mut start = 0;
    while start + nperseg <= x.len() {
        let seg = &x[start..start + nperseg];
        let mean = seg.iter().sum::<f64>() / nperseg as f64;
        let mut buf: Vec<Complex<f64>> = seg
            .iter()
            .zip(window.iter())
            .map(|(&v, &w)| Complex::new((v - mean) * w, 0.0))
            .collect();
        planner_fft.process(&mut buf);
        buf.truncate(nperseg / 2 + 1);
        out.push(buf);
        start += hop;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::window::hann;
    use approx::assert_relative_eq;

    #[test]
    fn psd_integrates_to_sine_power() {
        // A unit sine has mean power 1/2; integrating the PSD over
        // frequency must recover it (Parseval, density scaling).
        let fs = 4.0;
        let n = 4096;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 0.5 * i as f64 / fs).sin())
            .collect();
        let nperseg = 512;
        let w = hann(nperseg);
        let (freqs, psd) = welch_psd(&x, fs, nperseg, nperseg / 2, &w).unwrap();
        let df = freqs[1] - freqs[0];
        let total: f64 = psd.iter().sum::<f64>() * df;
        assert_relative_eq!(total, 0.5, epsilon = 0.01);
    }

    #[test]
    fn psd_peak_at_sine_frequency() {
        let fs = 4.0;
        let n = 2048;
        let f0 = 0.25;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f0 * i as f64 / fs).sin())
            .collect();
        let nperseg = 256;
        let w = hann(nperseg);
        let (freqs, psd) = welch_psd(&x, fs, nperseg, nperseg / 2, &w).unwrap();
        let kmax = psd
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_relative_eq!(freqs[kmax], f0, epsilon = fs / nperseg as f64);
    }

    #[test]
    fn too_short_signal_is_an_error() {
        let w = hann(64);
        assert!(welch_psd(&[0.0; 32], 1.0, 64, 32, &w).is_err());
    }

    #[test]
    fn cross_spectrum_of_identical_signals_is_auto() {
        let x: Vec<f64> = (0..1024).map(|i| ((i * 7 % 23) as f64) - 11.0).collect();
        let w = hann(128);
        let cs = welch_cross(&x, &x, 1.0, 128, 64, &w).unwrap();
        for k in 0..cs.freqs.len() {
            assert_relative_eq!(cs.sxy[k].re, cs.sxx[k], epsilon = 1e-12);
            assert!(cs.sxy[k].im.abs() < 1e-12);
        }
    }
}
