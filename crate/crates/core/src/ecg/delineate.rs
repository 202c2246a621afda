//! Wave delineation in fixed physiological windows around each R peak.
//!
//! Search windows relative to R (seconds): P peak in [-0.25, -0.08],
//! Q trough in [-0.08, 0], S trough in [0, 0.08], T in [0.12, 0.45].
//! Onsets and ends are the 10%-of-peak-amplitude crossings relative to
//! the per-beat isoelectric PQ baseline (mean over [-0.09, -0.07] s).
//! Beats whose windows leave the record, or whose landmarks come out
//! unordered, are dropped and counted.

use super::EcgRecord;
use crate::error::Result;

/// Fraction of the wave amplitude that defines onset/end crossings.
const EDGE_FRACTION: f64 = 0.1;

/// Landmarks and baseline-corrected amplitudes of one beat.
#[derive(Debug, Clone, Copy)]
pub struct Beat {
    pub r_index: usize,
    pub p_onset: usize,
    pub p_peak: usize,
    pub q_onset: usize,
    pub q_trough: usize,
    pub s_trough: usize,
    pub qrs_end: usize,
    pub t_end: usize,
    pub r_amplitude: f64,
    pub p_amplitude: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BeatLandmarks {
    pub beats: Vec<Beat>,
    /// Beats rejected at the record edge or with inconsistent landmarks.
    pub dropped: usize,
}

/// Delineate every beat around the given R peaks.
///
/// Degenerate beats are dropped (never an error); the count is reported
/// in the result.
pub fn delineate_waves(record: &EcgRecord, r_peaks: &[usize]) -> Result<BeatLandmarks> {
    let fs = record.fs;
    let x = &record.samples;
    let n = x.len();
    let at = |r: usize, off_s: f64| -> isize { r as isize + (off_s * fs).round() as isize };

    let mut out = BeatLandmarks::default();
    for &r in r_peaks {
        let p_lo = at(r, -0.25);
        let t_hi = at(r, 0.45);
        if p_lo < 0 || t_hi >= n as isize {
            out.dropped += 1;
            continue;
        }
        let beat = match delineate_one(x, fs, r) {
            Some(b) => b,
            None => {
                out.dropped += 1;
                continue;
            }
        };
        // ordering invariant
        if beat.p_onset < beat.q_onset
            && beat.q_onset < beat.r_index
            && beat.r_index < beat.s_trough
            && beat.s_trough < beat.qrs_end
            && beat.s_trough < beat.t_end
        {
            out.beats.push(beat);
        } else {
            out.dropped += 1;
        }
    }
    Ok(out)
}

fn delineate_one(x: &[f64], fs: f64, r: usize) -> Option<Beat> {
    let idx = |off_s: f64| -> usize { (r as isize + (off_s * fs).round() as isize) as usize };

    // isoelectric PQ baseline
    let b_lo = idx(-0.09);
    let b_hi = idx(-0.07).max(b_lo + 1);
    let baseline = x[b_lo..b_hi].iter().sum::<f64>() / (b_hi - b_lo) as f64;

    let argmax = |lo: usize, hi: usize| -> usize {
        (lo..hi)
            .max_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap())
            .unwrap()
    };
    let argmin = |lo: usize, hi: usize| -> usize {
        (lo..hi)
            .min_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap())
            .unwrap()
    };

    let p_peak = argmax(idx(-0.25), idx(-0.08));
    let q_trough = argmin(idx(-0.08), r);
    let s_trough = argmin(r + 1, idx(0.08));
    let t_peak = argmax(idx(0.12), idx(0.45));

    // 10% crossings toward the baseline
    let p_height = x[p_peak] - baseline;
    let q_depth = x[q_trough] - baseline;
    let s_depth = x[s_trough] - baseline;
    let t_height = x[t_peak] - baseline;
    if p_height <= 0.0 || t_height <= 0.0 {
        return None;
    }

    let p_onset = cross_left(x, p_peak, idx(-0.25), |v| {
        v - baseline <= EDGE_FRACTION * p_height
    });
    let q_onset = cross_left(x, q_trough, idx(-0.08), |v| {
        (v - baseline).abs() <= EDGE_FRACTION * q_depth.abs()
    });
    let qrs_end = cross_right(x, s_trough, idx(0.12), |v| {
        (v - baseline).abs() <= EDGE_FRACTION * s_depth.abs()
    });
    let t_end = cross_right(x, t_peak, idx(0.45), |v| {
        v - baseline <= EDGE_FRACTION * t_height
    });

    Some(Beat {
        r_index: r,
        p_onset,
        p_peak,
        q_onset,
        q_trough,
        s_trough,
        qrs_end,
        t_end,
        r_amplitude: x[r] - baseline,
        p_amplitude: p_height,
    })
}

/// Walk left from `from` until the predicate holds; clamp at `limit`.
fn cross_left(x: &[f64], from: usize, limit: usize, pred: impl Fn(f64) -> bool) -> usize {
    let mut i = from;
    while i > limit {
        if pred(x[i]) {
            return i;
        }
        i -= 1;
    }
    limit
}

/// Walk right from `from` until the predicate holds; clamp at `limit`.
fn cross_right(x: &[f64], from: usize, limit: usize, pred: impl Fn(f64) -> bool) -> usize {
    let mut i = from;
    while i < limit {
        if pred(x[i]) {
            return i;
        }
        i += 1;
    }
    limit
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gaussian-bump beat template centered at `r_center` (in samples).
    fn add_beat(x: &mut [f64], fs: f64, r_center: f64) {
        let waves = [
            (0.15, -0.16, 0.02),  // P
            (-0.10, -0.04, 0.008), // Q
            (1.00, 0.0, 0.012),   // R
            (-0.20, 0.04, 0.010), // S
            (0.30, 0.25, 0.04),   // T
        ];
        for i in 0..x.len() {
            let t = i as f64 / fs - r_center;
            for &(a, mu, sigma) in &waves {
                let d = (t - mu) / sigma;
                if d.abs() < 8.0 {
                    x[i] += a * (-0.5 * d * d).exp();
                }
            }
        }
    }

    #[test]
    fn landmarks_near_template_centers() {
        let fs = 250.0;
        let mut x = vec![0.0; 1500];
        add_beat(&mut x, fs, 3.0);
        let rec = EcgRecord::new(x, fs).unwrap();
        let lm = delineate_waves(&rec, &[750]).unwrap();
        assert_eq!(lm.beats.len(), 1);
        let b = lm.beats[0];
        let s = |i: usize| i as f64 / fs - 3.0;
        assert!((s(b.p_peak) + 0.16).abs() < 0.01, "p_peak at {}", s(b.p_peak));
        assert!((s(b.q_trough) + 0.04).abs() < 0.01);
        assert!((s(b.s_trough) - 0.04).abs() < 0.01);
        // P onset: 10% crossing of a Gaussian is 2.146 sigma before center
        assert!((s(b.p_onset) - (-0.16 - 2.146 * 0.02)).abs() < 0.01);
        assert!((b.r_amplitude - 1.0).abs() < 0.05);
        assert!((b.p_amplitude - 0.15).abs() < 0.03);
    }

    #[test]
    fn edge_beat_is_dropped_others_kept() {
        let fs = 250.0;
        let mut x = vec![0.0; 1250];
        add_beat(&mut x, fs, 1.0);
        add_beat(&mut x, fs, 2.0);
        add_beat(&mut x, fs, 4.9); // T window exceeds the record end
        let rec = EcgRecord::new(x, fs).unwrap();
        let lm = delineate_waves(&rec, &[250, 500, 1225]).unwrap();
        assert_eq!(lm.beats.len(), 2);
        assert_eq!(lm.dropped, 1);
    }

    #[test]
    fn identical_beats_give_identical_widths() {
        let fs = 250.0;
        let mut x = vec![0.0; 2500];
        for k in 0..8 {
            add_beat(&mut x, fs, 1.0 + k as f64);
        }
        let rec = EcgRecord::new(x, fs).unwrap();
        let peaks: Vec<usize> = (0..8).map(|k| 250 + k * 250).collect();
        let lm = delineate_waves(&rec, &peaks).unwrap();
        assert_eq!(lm.beats.len(), 8);
        let w0 = lm.beats[0].qrs_end - lm.beats[0].q_onset;
        for b in &lm.beats {
            assert_eq!(b.qrs_end - b.q_onset, w0);
            assert_eq!(b.r_index - b.p_onset, lm.beats[0].r_index - lm.beats[0].p_onset);
        }
    }
}
