//! ECG handcrafted-feature extraction.
//!
//! A raw single-lead record is band-pass filtered, R peaks are located
//! with a derivative-square-integrate detector, waves are delineated in
//! fixed physiological windows around each R peak, and the result is a
//! 20-dimensional feature vector: 13 time-domain values (intervals, wave
//! amplitudes, RR statistics) and 7 frequency-domain values (band powers
//! of the resampled RR tachogram and their ratios).

pub mod delineate;
pub mod detect;
pub mod features;
pub mod io;

pub use delineate::{delineate_waves, Beat, BeatLandmarks};
pub use detect::{bandpass_filter, detect_r_peaks};
pub use features::{
    ecg_feature_vector, frequency_domain_features, time_domain_features, EcgFeatureVector,
    ECG_FEATURE_NAMES,
};

use crate::error::{Error, Result};

/// A uniformly sampled single-lead ECG record.
#[derive(Debug, Clone)]
pub struct EcgRecord {
    pub samples: Vec<f64>,
    /// Sampling rate in Hz.
    pub fs: f64,
}

impl EcgRecord {
    /// Validates rate and sample finiteness at ingestion.
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if fs <= 0.0 || !fs.is_finite() {
            return Err(Error::Parameter(format!("sampling rate {fs} Hz invalid")));
        }
        if samples.is_empty() {
            return Err(Error::InsufficientSignal("empty ECG record".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "ECG record contains NaN or infinite samples".into(),
            ));
        }
        Ok(Self { samples, fs })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }
}

/// Beat-to-beat intervals with the onset time of each interval.
///
/// Intervals outside the physiological window (0.2, 3.0) s are rejected
/// at construction; `rejected` reports how many.
#[derive(Debug, Clone)]
pub struct RrSeries {
    pub intervals_s: Vec<f64>,
    pub timestamps_s: Vec<f64>,
    pub rejected: usize,
}

impl RrSeries {
    pub const MIN_RR_S: f64 = 0.2;
    pub const MAX_RR_S: f64 = 3.0;

    pub fn from_r_peaks(r_peaks: &[usize], fs: f64) -> Result<Self> {
        if r_peaks.len() < 2 {
            return Err(Error::InsufficientSignal(format!(
                "{} R peaks cannot form an RR series",
                r_peaks.len()
            )));
        }
        let mut intervals = Vec::with_capacity(r_peaks.len() - 1);
        let mut timestamps = Vec::with_capacity(r_peaks.len() - 1);
        let mut rejected = 0usize;
        for w in r_peaks.windows(2) {
            let dt = (w[1] - w[0]) as f64 / fs;
            if dt > Self::MIN_RR_S && dt < Self::MAX_RR_S {
                intervals.push(dt);
                timestamps.push(w[0] as f64 / fs);
            } else {
                rejected += 1;
            }
        }
        if rejected > 0 {
            log::debug!("RR artifact rejection dropped {rejected} intervals");
        }
        if intervals.len() < 2 {
            return Err(Error::InsufficientSignal(
                "fewer than 2 RR intervals after artifact rejection".into(),
            ));
        }
        Ok(Self {
            intervals_s: intervals,
            timestamps_s: timestamps,
            rejected,
        })
    }

    /// Time spanned by the series in seconds.
    pub fn span_s(&self) -> f64 {
        self.timestamps_s.last().unwrap() - self.timestamps_s[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_validation() {
        assert!(EcgRecord::new(vec![], 250.0).is_err());
        assert!(EcgRecord::new(vec![0.0], -1.0).is_err());
        assert!(EcgRecord::new(vec![f64::NAN], 250.0).is_err());
        let r = EcgRecord::new(vec![0.0; 500], 250.0).unwrap();
        assert!((r.duration_s() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rr_series_rejects_artifacts() {
        // peaks at 0 s, 1 s, 1.05 s (0.05 s interval rejected), 2.05 s
        let fs = 100.0;
        let peaks = vec![0, 100, 105, 205];
        let rr = RrSeries::from_r_peaks(&peaks, fs).unwrap();
        assert_eq!(rr.rejected, 1);
        assert_eq!(rr.intervals_s.len(), 2);
        assert!(rr.intervals_s.iter().all(|&v| v > 0.2 && v < 3.0));
    }

    #[test]
    fn rr_series_needs_two_peaks() {
        assert!(RrSeries::from_r_peaks(&[5], 100.0).is_err());
    }
}
