//! Butterworth band-pass design and zero-phase (forward-backward) filtering.
//!
//! The design path follows the classical chain: analog Butterworth
//! prototype -> low-pass-to-band-pass transform -> bilinear transform ->
//! second-order sections. Filtering runs each section in direct form II
//! transposed with steady-state initial conditions, forward and backward
//! over an odd-extension padded signal, so the net response is zero-phase
//! with magnitude |H|^2.

use crate::error::{Error, Result};

/// One second-order section: y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2]
///                                 - a1 y[n-1] - a2 y[n-2].
#[derive(Debug, Clone, Copy)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Complex frequency response at normalized angular frequency `w`
    /// (radians/sample).
    fn response(&self, w: f64) -> (f64, f64) {
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        let nr = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let ni = self.b[1] * s1 + self.b[2] * s2;
        let dr = 1.0 + self.a[0] * c1 + self.a[1] * c2;
        let di = self.a[0] * s1 + self.a[1] * s2;
        let d = dr * dr + di * di;
        ((nr * dr + ni * di) / d, (ni * dr - nr * di) / d)
    }

    /// Steady-state filter state for a unit-step input (direct form II
    /// transposed). Scaling this by the first signal sample starts the
    /// filter without a step transient.
    fn step_steady_state(&self) -> [f64; 2] {
        let h1 = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1]);
        let z2 = self.b[2] - self.a[1] * h1;
        let z1 = self.b[1] - self.a[0] * h1 + z2;
        [z1, z2]
    }
}

/// A cascade of second-order sections.
#[derive(Debug, Clone)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
}

impl SosFilter {
    /// Magnitude response at frequency `f_hz` for sampling rate `fs`.
    pub fn magnitude(&self, f_hz: f64, fs: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f_hz / fs;
        let mut re = 1.0;
        let mut im = 0.0;
        for s in &self.sections {
            let (r, i) = s.response(w);
            let (nr, ni) = (re * r - im * i, re * i + im * r);
            re = nr;
            im = ni;
        }
        (re * re + im * im).sqrt()
    }

    /// Single forward pass over `x` with per-section steady-state initial
    /// conditions scaled by the first sample.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            let zi = s.step_steady_state();
            let mut z1 = zi[0] * y[0];
            let mut z2 = zi[1] * y[0];
            for v in y.iter_mut() {
                let xn = *v;
                let yn = s.b[0] * xn + z1;
                z1 = s.b[1] * xn - s.a[0] * yn + z2;
                z2 = s.b[2] * xn - s.a[1] * yn;
                *v = yn;
            }
        }
        y
    }

    /// Zero-phase filtering: odd-extend by `padlen` samples on both ends,
    /// filter forward and backward, then trim the extension.
    pub fn filtfilt(&self, x: &[f64], padlen: usize) -> Result<Vec<f64>> {
        if x.is_empty() {
            return Err(Error::InsufficientSignal("empty signal".into()));
        }
        let padlen = padlen.min(x.len().saturating_sub(1));
        let n = x.len();
        let mut ext = Vec::with_capacity(n + 2 * padlen);
        let first = x[0];
        let last = x[n - 1];
        for i in (1..=padlen).rev() {
            ext.push(2.0 * first - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=padlen {
            ext.push(2.0 * last - x[n - 1 - i]);
        }
        let mut y = self.filter(&ext);
        y.reverse();
        let mut y = self.filter(&y);
        y.reverse();
        Ok(y[padlen..padlen + n].to_vec())
    }
}

/// Design an order-`order` Butterworth band-pass (2*order poles) between
/// `lo_hz` and `hi_hz` for sampling rate `fs`, returned as second-order
/// sections with unit gain at the geometric center frequency.
pub fn butter_bandpass(order: usize, lo_hz: f64, hi_hz: f64, fs: f64) -> Result<SosFilter> {
    if !(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < fs / 2.0) {
        return Err(Error::Parameter(format!(
            "band [{lo_hz}, {hi_hz}] Hz must satisfy 0 < lo < hi < fs/2 = {}",
            fs / 2.0
        )));
    }
    if order == 0 {
        return Err(Error::Parameter("filter order must be >= 1".into()));
    }

    let fs2 = 2.0 * fs;
    // Pre-warped analog band edges for the bilinear transform.
    let w1 = fs2 * (std::f64::consts::PI * lo_hz / fs).tan();
    let w2 = fs2 * (std::f64::consts::PI * hi_hz / fs).tan();
    let w0sq = w1 * w2;
    let bw = w2 - w1;

    // Analog low-pass prototype poles on the unit circle, left half-plane.
    let mut analog_poles = Vec::with_capacity(2 * order);
    for k in 1..=order {
        let theta = std::f64::consts::PI * (2 * k + order - 1) as f64 / (2 * order) as f64;
        let p = (theta.cos(), theta.sin());
        // Low-pass to band-pass: p -> p*bw/2 +/- sqrt((p*bw/2)^2 - w0^2).
        let hr = p.0 * bw / 2.0;
        let hi = p.1 * bw / 2.0;
        let (sr, si) = complex_sqrt(hr * hr - hi * hi - w0sq, 2.0 * hr * hi);
        analog_poles.push((hr + sr, hi + si));
        analog_poles.push((hr - sr, hi - si));
    }

    // Bilinear transform of poles; zeros are `order` at z=+1 (from s=0)
    // and `order` at z=-1 (from s=infinity).
    let digital_poles: Vec<(f64, f64)> = analog_poles
        .iter()
        .map(|&(pr, pi)| {
            let dr = fs2 - pr;
            let di = -pi;
            let d = dr * dr + di * di;
            (
                ((fs2 + pr) * dr + pi * di) / d,
                (pi * dr - (fs2 + pr) * di) / d,
            )
        })
        .collect();

    // Group poles into conjugate pairs (sort by imaginary part magnitude
    // descending for a deterministic pairing, then by real part).
    let mut upper: Vec<(f64, f64)> = digital_poles
        .iter()
        .cloned()
        .filter(|&(_, i)| i >= 0.0)
        .collect();
    upper.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then(a.0.partial_cmp(&b.0).unwrap())
    });
    if upper.len() != order {
        return Err(Error::Parameter(
            "pole pairing failed; band too extreme for this order".into(),
        ));
    }

    // Each section carries one zero at +1 and one at -1: numerator z^2 - 1.
    let mut sections: Vec<Biquad> = upper
        .iter()
        .map(|&(pr, pi)| Biquad {
            b: [1.0, 0.0, -1.0],
            a: [-2.0 * pr, pr * pr + pi * pi],
        })
        .collect();

    // Normalize unit gain at the center frequency, applied to the first
    // section so the cascade is exactly unity there.
    let f_center = (lo_hz * hi_hz).sqrt();
    let cascade = SosFilter {
        sections: sections.clone(),
    };
    let g = cascade.magnitude(f_center, fs);
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::Parameter("degenerate filter design".into()));
    }
    let scale = 1.0 / g;
    for b in sections[0].b.iter_mut() {
        *b *= scale;
    }
    Ok(SosFilter { sections })
}

/// Analog Butterworth band-pass magnitude at `f_hz`, evaluated from the
/// closed form |H|^2 = 1 / (1 + ((w^2 - w0^2)/(bw*w))^(2n)) at the
/// bilinear-warped frequency. This is the design target the digital
/// filter realizes exactly, so it serves as an independent oracle for
/// the implementation.
pub fn butter_bandpass_analytic_magnitude(
    order: usize,
    lo_hz: f64,
    hi_hz: f64,
    fs: f64,
    f_hz: f64,
) -> f64 {
    let warp = |f: f64| 2.0 * fs * (std::f64::consts::PI * f / fs).tan();
    let w1 = warp(lo_hz);
    let w2 = warp(hi_hz);
    let w = warp(f_hz);
    let w0sq = w1 * w2;
    let bw = w2 - w1;
    if w == 0.0 {
        return 0.0;
    }
    let x = (w * w - w0sq) / (bw * w);
    1.0 / (1.0 + x.powi(2 * order as i32)).sqrt()
}

fn complex_sqrt(re: f64, im: f64) -> (f64, f64) {
    let r = (re * re + im * im).sqrt();
    let sr = ((r + re) / 2.0).sqrt();
    let si = ((r - re) / 2.0).sqrt() * if im < 0.0 { -1.0 } else { 1.0 };
    (sr, si)
}
