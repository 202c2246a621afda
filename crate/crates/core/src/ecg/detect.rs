//! Band-pass filtering and R-peak detection.

use super::EcgRecord;
use crate::error::{Error, Result};
use crate::signal::butter_bandpass;

/// Zero-phase Butterworth band-pass (order-4 prototype, forward-backward).
///
/// Same length and rate; group delay is compensated by the backward pass.
pub fn bandpass_filter(record: &EcgRecord, lo_hz: f64, hi_hz: f64) -> Result<EcgRecord> {
    let sos = butter_bandpass(4, lo_hz, hi_hz, record.fs)?;
    // pad past the slowest filter time constant so edges settle
    let padlen = ((2.0 * record.fs / lo_hz).ceil() as usize).min(record.samples.len() - 1);
    let filtered = sos.filtfilt(&record.samples, padlen)?;
    Ok(EcgRecord {
        samples: filtered,
        fs: record.fs,
    })
}

/// Refractory period between accepted peaks.
const REFRACTORY_S: f64 = 0.2;
/// Moving-integration window.
const INTEGRATION_S: f64 = 0.15;

/// Locate R peaks with a derivative-square-integrate cascade and adaptive
/// dual thresholds, then refine each detection to the local maximum of the
/// input record.
///
/// Expects an already band-limited record of at least 5 s. Returned
/// indices are strictly increasing with at least 0.2 s spacing.
pub fn detect_r_peaks(record: &EcgRecord) -> Result<Vec<usize>> {
    if record.duration_s() < 5.0 {
        return Err(Error::InsufficientSignal(format!(
            "record of {:.2} s too short for peak detection (need 5 s)",
            record.duration_s()
        )));
    }
    let fs = record.fs;
    let x = &record.samples;

    // QRS-band emphasis
    let qrs_band = butter_bandpass(2, 5.0, (15.0f64).min(fs * 0.45), fs)?;
    let bp = qrs_band.filtfilt(x, ((2.0 * fs / 5.0).ceil() as usize).min(x.len() - 1))?;

    // centered five-point derivative, squared
    let n = x.len();
    let mut sq = vec![0.0f64; n];
    for i in 2..n - 2 {
        let d = (-bp[i - 2] - 2.0 * bp[i - 1] + 2.0 * bp[i + 1] + bp[i + 2]) / 8.0;
        sq[i] = d * d;
    }

    // moving-window integration
    let win = (INTEGRATION_S * fs).round().max(1.0) as usize;
    let mut mwi = vec![0.0f64; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += sq[i];
        if i >= win {
            acc -= sq[i - win];
        }
        mwi[i] = acc / win as f64;
    }

    let refractory = (REFRACTORY_S * fs).round() as usize;

    // initialize thresholds from the first 2 s
    let head = &mwi[..(2.0 * fs) as usize];
    let head_max = head.iter().cloned().fold(0.0f64, f64::max);
    let head_mean = head.iter().sum::<f64>() / head.len() as f64;
    let mut spki = 0.25 * head_max;
    let mut npki = 0.5 * head_mean;

    // candidate local maxima of the integrated signal
    let mut candidates = Vec::new();
    for i in 1..n - 1 {
        if mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1] && mwi[i] > 0.0 {
            candidates.push(i);
        }
    }
    if candidates.is_empty() {
        return Err(Error::InsufficientSignal("no QRS energy found".into()));
    }

    let mut accepted: Vec<usize> = Vec::new();
    let mut recent_rr: Vec<f64> = Vec::new();
    let mut pending_noise: Vec<usize> = Vec::new();

    for &c in &candidates {
        if let Some(&last) = accepted.last() {
            if c < last + refractory {
                continue;
            }
        }
        let thr1 = npki + 0.25 * (spki - npki);
        if mwi[c] > thr1 {
            push_beat(&mut accepted, &mut recent_rr, c, fs);
            spki = 0.125 * mwi[c] + 0.875 * spki;
            pending_noise.clear();
        } else {
            pending_noise.push(c);
            npki = 0.125 * mwi[c] + 0.875 * npki;
            // search back when a beat is overdue
            if !recent_rr.is_empty() {
                let avg_rr = recent_rr.iter().sum::<f64>() / recent_rr.len() as f64;
                let last = *accepted.last().unwrap();
                if (c - last) as f64 / fs > 1.66 * avg_rr {
                    let thr2 = 0.5 * thr1;
                    if let Some(&best) = pending_noise
                        .iter()
                        .filter(|&&p| p > last + refractory && mwi[p] > thr2)
                        .max_by(|&&a, &&b| mwi[a].partial_cmp(&mwi[b]).unwrap())
                    {
                        push_beat(&mut accepted, &mut recent_rr, best, fs);
                        spki = 0.25 * mwi[best] + 0.75 * spki;
                        pending_noise.clear();
                    }
                }
            }
        }
    }

    // Refine each integrated-signal peak to the record maximum inside the
    // integration lag window, then re-enforce the refractory rule.
    let back = win + (0.05 * fs) as usize;
    let fwd = (0.05 * fs) as usize;
    let mut refined: Vec<usize> = Vec::new();
    for &c in &accepted {
        let lo = c.saturating_sub(back);
        let hi = (c + fwd + 1).min(n);
        let r = (lo..hi)
            .max_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap())
            .unwrap();
        match refined.last() {
            Some(&prev) if r <= prev => {}
            Some(&prev) if r - prev < refractory => {
                if x[r] > x[prev] {
                    *refined.last_mut().unwrap() = r;
                }
            }
            _ => refined.push(r),
        }
    }

    if refined.len() < 2 {
        return Err(Error::InsufficientSignal(format!(
            "only {} R peaks detected",
            refined.len()
        )));
    }
    Ok(refined)
}

fn push_beat(accepted: &mut Vec<usize>, recent_rr: &mut Vec<f64>, idx: usize, fs: f64) {
    if let Some(&last) = accepted.last() {
        recent_rr.push((idx - last) as f64 / fs);
        if recent_rr.len() > 8 {
            recent_rr.remove(0);
        }
    }
    accepted.push(idx);
}
