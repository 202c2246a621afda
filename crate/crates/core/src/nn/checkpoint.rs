//! Checkpoint container: a single-line JSON header followed by a raw
//! little-endian `f32` blob holding every parameter in header order.

use super::optim::PlateauScheduler;
use super::params::ParamStore;
use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamHeader {
    pub name: String,
    pub shape: Vec<usize>,
    pub trainable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub schema_version: u32,
    /// Model variant tag (A-D); loads refuse a mismatch.
    pub variant: String,
    pub seed: u64,
    pub scheduler: PlateauScheduler,
    pub params: Vec<ParamHeader>,
}

/// Serialize a parameter store. Values are converted to `f32` regardless
/// of the compute precision.
pub fn save<R: Real>(
    path: &Path,
    store: &ParamStore<R>,
    variant: &str,
    seed: u64,
    scheduler: &PlateauScheduler,
) -> Result<()> {
    let header = CheckpointHeader {
        schema_version: SCHEMA_VERSION,
        variant: variant.to_string(),
        seed,
        scheduler: scheduler.clone(),
        params: store
            .iter()
            .map(|p| ParamHeader {
                name: p.name.clone(),
                shape: p.value.shape().to_vec(),
                trainable: p.trainable,
            })
            .collect(),
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for p in store.iter() {
        for &v in p.value.data() {
            w.write_all(&(v.as_f64() as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a checkpoint into a freshly built store whose parameter names and
/// shapes must match the header exactly (the model builder constructs the
/// store, then this fills the values).
pub fn load_into<R: Real>(path: &Path, store: &mut ParamStore<R>) -> Result<CheckpointHeader> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: CheckpointHeader = serde_json::from_str(line.trim_end()).map_err(|e| {
        Error::Checkpoint(format!("{}: malformed header: {e}", path.display()))
    })?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported schema version {}",
            header.schema_version
        )));
    }
    if header.params.len() != store.len() {
        return Err(Error::Checkpoint(format!(
            "checkpoint has {} parameters, model expects {}",
            header.params.len(),
            store.len()
        )));
    }
    let mut blob = Vec::new();
    r.read_to_end(&mut blob)?;
    let total: usize = header.params.iter().map(|p| p.shape.iter().product::<usize>()).sum();
    if blob.len() != 4 * total {
        return Err(Error::Checkpoint(format!(
            "blob holds {} bytes, header declares {}",
            blob.len(),
            4 * total
        )));
    }
    let mut offset = 0usize;
    for ph in &header.params {
        let id = store.id_of(&ph.name).ok_or_else(|| {
            Error::Checkpoint(format!("parameter {} not present in model", ph.name))
        })?;
        let n: usize = ph.shape.iter().product();
        let data: Vec<R> = blob[offset..offset + 4 * n]
            .chunks_exact(4)
            .map(|c| R::from_f64(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
            .collect();
        offset += 4 * n;
        store.set_value(id, Tensor::from_vec(&ph.shape, data)?)?;
    }
    Ok(header)
}

/// Read just the header (variant checks, inspection).
pub fn read_header(path: &Path) -> Result<CheckpointHeader> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    serde_json::from_str(line.trim_end())
        .map_err(|e| Error::Checkpoint(format!("{}: malformed header: {e}", path.display())))
}
