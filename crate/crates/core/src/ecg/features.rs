//! The 20-dimensional ECG feature vector.
//!
//! Fixed schema (see [`ECG_FEATURE_NAMES`]):
//!
//! | # | feature | definition |
//! |---|---------|------------|
//! | 0 | RR | mean RR interval \[s\] |
//! | 1 | HR | 60 / mean RR \[bpm\] |
//! | 2 | R amplitude | mean R peak height over the PQ baseline |
//! | 3 | P amplitude | mean P peak height over the PQ baseline |
//! | 4 | QRS width | mean (QRS end - Q onset) \[s\] |
//! | 5 | PRQ width | mean (Q trough - P onset) \[s\] |
//! | 6 | QT | mean (T end - Q onset) \[s\] |
//! | 7 | QTC | QT / sqrt(mean RR) \[s\] |
//! | 8 | ST | mean (T end - S trough) \[s\] |
//! | 9 | SDNN | population std of RR \[s\] |
//! | 10 | RMSSD | RMS of successive RR differences \[s\] |
//! | 11 | SDSD | population std of successive RR differences \[s\] |
//! | 12 | PNN50 | % successive differences strictly above 50 ms |
//! | 13-16 | VLF, LF, HF, VHF | band powers of the RR tachogram |
//! | 17 | LF/HF | power ratio |
//! | 18 | LF norm | LF / (VLF + LF + HF) |
//! | 19 | HF norm | HF / (VLF + LF + HF) |
//!
//! Frequency features: the RR series is resampled to a uniform 4 Hz grid
//! by natural cubic spline, mean-removed, and Welch-averaged (60 s
//! segments, 50% overlap, Hann). Band powers integrate the one-sided PSD
//! over VLF [0, 0.04), LF [0.04, 0.15), HF [0.15, 0.4), and VHF
//! [0.4, 2.0] Hz — the tachogram's Nyquist rate caps the VHF band at
//! 2 Hz. Standard deviations use the population (divide by N) convention.

use super::delineate::BeatLandmarks;
use super::{EcgRecord, RrSeries};
use crate::error::{Error, Result};
use crate::signal::{mean, population_std, welch_psd, window::hann, CubicSpline};

pub const ECG_FEATURE_NAMES: [&str; 20] = [
    "rr_s",
    "hr_bpm",
    "r_amplitude",
    "p_amplitude",
    "qrs_width_s",
    "prq_width_s",
    "qt_s",
    "qtc_s",
    "st_s",
    "sdnn_s",
    "rmssd_s",
    "sdsd_s",
    "pnn50_pct",
    "vlf_power",
    "lf_power",
    "hf_power",
    "vhf_power",
    "lf_hf_ratio",
    "lf_norm",
    "hf_norm",
];

/// Tachogram resampling rate for spectral analysis.
pub const RR_RESAMPLE_HZ: f64 = 4.0;
/// Welch segment length in seconds on the resampled tachogram.
pub const RR_WELCH_SEGMENT_S: f64 = 60.0;

/// Frequency bands in Hz: (low, high, half-open on the right except VHF).
pub const VLF_BAND: (f64, f64) = (0.0, 0.04);
pub const LF_BAND: (f64, f64) = (0.04, 0.15);
pub const HF_BAND: (f64, f64) = (0.15, 0.4);
pub const VHF_BAND: (f64, f64) = (0.4, 2.0);

/// The complete 20-value vector in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgFeatureVector(pub [f64; 20]);

impl EcgFeatureVector {
    pub fn values(&self) -> &[f64; 20] {
        &self.0
    }

    /// Check the vector's internal consistency constraints.
    pub fn validate(&self) -> Result<()> {
        let v = &self.0;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite ECG feature".into()));
        }
        if !(0.0..=100.0).contains(&v[12]) {
            return Err(Error::Validation(format!("PNN50 {} outside [0, 100]", v[12])));
        }
        if v[13..17].iter().any(|&p| p < 0.0) {
            return Err(Error::Validation("negative band power".into()));
        }
        let (lfn, hfn) = (v[18], v[19]);
        if !(0.0..=1.0).contains(&lfn) || !(0.0..=1.0).contains(&hfn) || lfn + hfn > 1.0 + 1e-12 {
            return Err(Error::Validation(format!(
                "normalized band powers inconsistent: {lfn} + {hfn}"
            )));
        }
        if (v[1] - 60.0 / v[0]).abs() > 1e-9 {
            return Err(Error::Validation("HR != 60/RR".into()));
        }
        Ok(())
    }
}

/// The 13 time-domain features (schema positions 0-12).
pub fn time_domain_features(rr: &RrSeries, landmarks: &BeatLandmarks) -> Result<[f64; 13]> {
    if rr.intervals_s.len() < 2 {
        return Err(Error::InsufficientSignal(
            "time-domain features need at least 2 RR intervals".into(),
        ));
    }
    if landmarks.beats.is_empty() {
        return Err(Error::InsufficientSignal("no delineated beats".into()));
    }
    let rr_mean = mean(&rr.intervals_s);
    let hr = 60.0 / rr_mean;

    let fs_independent = |f: &dyn Fn(&super::delineate::Beat) -> f64| -> f64 {
        mean(&landmarks.beats.iter().map(f).collect::<Vec<_>>())
    };
    let r_amp = fs_independent(&|b| b.r_amplitude);
    let p_amp = fs_independent(&|b| b.p_amplitude);

    let diffs: Vec<f64> = rr.intervals_s.windows(2).map(|w| w[1] - w[0]).collect();
    let sdnn = population_std(&rr.intervals_s);
    let rmssd = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    let sdsd = population_std(&diffs);
    let pnn50 = 100.0 * diffs.iter().filter(|d| d.abs() > 0.05).count() as f64 / diffs.len() as f64;

    Ok([
        rr_mean, hr, r_amp, p_amp,
        0.0, // widths filled below, they need the sampling rate
        0.0, 0.0, 0.0, 0.0, sdnn, rmssd, sdsd, pnn50,
    ])
}

/// Interval widths in seconds, averaged over beats.
fn interval_features(landmarks: &BeatLandmarks, fs: f64, rr_mean: f64) -> [f64; 5] {
    let m = |f: &dyn Fn(&super::delineate::Beat) -> f64| -> f64 {
        mean(&landmarks.beats.iter().map(f).collect::<Vec<_>>())
    };
    let qrs = m(&|b| (b.qrs_end - b.q_onset) as f64 / fs);
    let prq = m(&|b| (b.q_trough - b.p_onset) as f64 / fs);
    let qt = m(&|b| (b.t_end - b.q_onset) as f64 / fs);
    let qtc = qt / rr_mean.sqrt();
    let st = m(&|b| (b.t_end - b.s_trough) as f64 / fs);
    [qrs, prq, qt, qtc, st]
}

/// The 7 frequency-domain features (schema positions 13-19).
pub fn frequency_domain_features(rr: &RrSeries) -> Result<[f64; 7]> {
    if rr.span_s() < RR_WELCH_SEGMENT_S {
        return Err(Error::InsufficientSignal(format!(
            "RR span {:.1} s < {RR_WELCH_SEGMENT_S} s required for spectral analysis",
            rr.span_s()
        )));
    }
    // uniform 4 Hz grid anchored at the first timestamp
    let t0 = rr.timestamps_s[0];
    let span = rr.span_s();
    let n = (span * RR_RESAMPLE_HZ).floor() as usize + 1;
    let spline = CubicSpline::fit(&rr.timestamps_s, &rr.intervals_s)?;
    let grid: Vec<f64> = (0..n).map(|k| t0 + k as f64 / RR_RESAMPLE_HZ).collect();
    let mut resampled = spline.eval_many(&grid);
    let m = mean(&resampled);
    for v in resampled.iter_mut() {
        *v -= m;
    }

    let nperseg = ((RR_WELCH_SEGMENT_S * RR_RESAMPLE_HZ) as usize).min(resampled.len());
    let hop = (nperseg / 2).max(1);
    let w = hann(nperseg);
    let (freqs, psd) = welch_psd(&resampled, RR_RESAMPLE_HZ, nperseg, hop, &w)?;
    let df = freqs[1] - freqs[0];
    let band_power = |lo: f64, hi: f64, closed_right: bool| -> f64 {
        freqs
            .iter()
            .zip(psd.iter())
            .filter(|(&f, _)| f >= lo && (f < hi || (closed_right && f <= hi)))
            .map(|(_, &p)| p * df)
            .sum()
    };
    let vlf = band_power(VLF_BAND.0, VLF_BAND.1, false);
    let lf = band_power(LF_BAND.0, LF_BAND.1, false);
    let hf = band_power(HF_BAND.0, HF_BAND.1, false);
    let vhf = band_power(VHF_BAND.0, VHF_BAND.1, true);

    let total = vlf + lf + hf;
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    Ok([
        vlf,
        lf,
        hf,
        vhf,
        ratio(lf, hf),
        ratio(lf, total),
        ratio(hf, total),
    ])
}

/// Full pipeline: filter, detect, delineate, and assemble the 20 features.
pub fn ecg_feature_vector(record: &EcgRecord) -> Result<EcgFeatureVector> {
    let filtered = super::bandpass_filter(record, 0.5, 40.0)?;
    let peaks = super::detect_r_peaks(&filtered)?;
    let landmarks = super::delineate_waves(&filtered, &peaks)?;
    let rr = RrSeries::from_r_peaks(&peaks, filtered.fs)?;

    let mut time = time_domain_features(&rr, &landmarks)?;
    let widths = interval_features(&landmarks, filtered.fs, time[0]);
    time[4..9].copy_from_slice(&widths);
    let freq = frequency_domain_features(&rr)?;

    let mut v = [0.0; 20];
    v[..13].copy_from_slice(&time);
    v[13..].copy_from_slice(&freq);
    let out = EcgFeatureVector(v);
    out.validate()?;
    Ok(out)
}
