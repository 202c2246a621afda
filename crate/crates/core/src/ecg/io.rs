//! ECG CSV ingestion and feature export.
//!
//! Input format: header `t_s,value`, one row per sample. The sampling
//! rate is inferred from the median timestep and every timestep must
//! agree with it to within 1 ppm.

use super::{EcgRecord, EcgFeatureVector, ECG_FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::io::{read_csv, write_csv};
use std::path::Path;

pub fn read_ecg_csv(path: &Path) -> Result<EcgRecord> {
    let (header, rows) = read_csv(path)?;
    if header != ["t_s", "value"] {
        return Err(Error::Validation(format!(
            "{}: expected header t_s,value, got {:?}",
            path.display(),
            header
        )));
    }
    if rows.len() < 2 {
        return Err(Error::Validation(format!(
            "{}: need at least 2 samples",
            path.display()
        )));
    }
    let mut steps: Vec<f64> = rows.windows(2).map(|w| w[1][0] - w[0][0]).collect();
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dt = steps[steps.len() / 2];
    if dt <= 0.0 {
        return Err(Error::Validation(format!(
            "{}: non-increasing timestamps",
            path.display()
        )));
    }
    for (i, w) in rows.windows(2).enumerate() {
        let step = w[1][0] - w[0][0];
        if ((step - dt) / dt).abs() > 1e-6 {
            return Err(Error::Validation(format!(
                "{}: timestep at row {} deviates from uniform grid by more than 1 ppm",
                path.display(),
                i + 2
            )));
        }
    }
    EcgRecord::new(rows.iter().map(|r| r[1]).collect(), 1.0 / dt)
}

pub fn write_ecg_csv(path: &Path, record: &EcgRecord) -> Result<()> {
    let rows: Vec<Vec<f64>> = record
        .samples
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![i as f64 / record.fs, v])
        .collect();
    write_csv(path, &["t_s", "value"], &rows)
}

/// One CSV row holding the fixed 20-column feature schema.
pub fn write_feature_csv(path: &Path, v: &EcgFeatureVector) -> Result<()> {
    write_csv(path, &ECG_FEATURE_NAMES, &[v.0.to_vec()])
}

pub fn read_feature_csv(path: &Path) -> Result<EcgFeatureVector> {
    let (header, rows) = read_csv(path)?;
    if header != ECG_FEATURE_NAMES {
        return Err(Error::Validation(format!(
            "{}: unexpected ECG feature schema",
            path.display()
        )));
    }
    let row = rows
        .first()
        .ok_or_else(|| Error::Validation(format!("{}: no feature row", path.display())))?;
    let mut out = [0.0; 20];
    out.copy_from_slice(row);
    Ok(EcgFeatureVector(out))
}
