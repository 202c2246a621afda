//! On-disk formats shared across the pipeline: a raw little-endian f32
//! tensor container and small CSV helpers.
//!
//! Tensor container layout (all integers little-endian):
//!
//! ```text
//! bytes 0..4   magic b"F32T"
//! bytes 4..8   u32 number of dimensions d
//! next 4*d     u32 dimension sizes
//! rest         f32 data, C order (last dimension fastest)
//! ```

use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"F32T";

/// Write a tensor file.
pub fn write_tensor(path: &Path, shape: &[usize], data: &[f32]) -> Result<()> {
    let expect: usize = shape.iter().product();
    if expect != data.len() {
        return Err(Error::Shape(format!(
            "tensor file {:?}: shape {:?} holds {expect} values, got {}",
            path,
            shape,
            data.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(shape.len() as u32).to_le_bytes())?;
    for &d in shape {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for &v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a tensor file, returning `(shape, data)`.
pub fn read_tensor(path: &Path) -> Result<(Vec<usize>, Vec<f32>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Validation(format!(
            "{:?}: not a tensor file (bad magic)",
            path
        )));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let ndim = u32::from_le_bytes(u32buf) as usize;
    if ndim > 8 {
        return Err(Error::Validation(format!(
            "{:?}: implausible tensor rank {ndim}",
            path
        )));
    }
    let mut shape = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        r.read_exact(&mut u32buf)?;
        shape.push(u32::from_le_bytes(u32buf) as usize);
    }
    let n: usize = shape.iter().product();
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 4 * n {
        return Err(Error::Validation(format!(
            "{:?}: expected {} data bytes for shape {:?}, found {}",
            path,
            4 * n,
            shape,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((shape, data))
}

/// Write one CSV header line plus rows of f64 values. Values use the
/// shortest round-trip decimal representation, so files reload bit-exactly.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a CSV of f64 columns written by [`write_csv`]. Returns the header
/// fields and the rows. The error message names the file and line of the
/// first malformed cell.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Validation(format!("{:?}: empty file", path)))??
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(header.len());
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Validation(format!(
                    "{:?}: line {}: cannot parse {:?} as a number",
                    path,
                    lineno + 2,
                    cell
                ))
            })?;
            row.push(v);
        }
        if row.len() != header.len() {
            return Err(Error::Validation(format!(
                "{:?}: line {}: expected {} columns, found {}",
                path,
                lineno + 2,
                header.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
