//! Ensemble export.
//!
//! CSV: header `time,path_id,x0,…,x{d-1}`, one row per recorded state.
//!
//! Binary (little endian):
//!
//! | field      | type        |
//! |------------|-------------|
//! | magic      | `b"IJD1"`   |
//! | dim        | `u32`       |
//! | scheme     | `u32` (0 ambient, 1 chart) |
//! | n_paths    | `u64`       |
//! | per path   | `u64` id, `u64` n, then `n × (1 + dim)` `f64` (time, state) |

use std::io::{Read, Write};

use ijd_core::sim::{PathEnsemble, Scheme};

use crate::{IjdError, Result};

pub const MAGIC: &[u8; 4] = b"IJD1";

/// Ambient states of an ensemble, independent of how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleData {
    pub dim: usize,
    pub scheme: Scheme,
    pub paths: Vec<PathData>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathData {
    pub id: u64,
    pub times: Vec<f64>,
    /// `times.len() × dim` values, row by row.
    pub states: Vec<f64>,
}

impl From<&PathEnsemble> for EnsembleData {
    fn from(e: &PathEnsemble) -> Self {
        EnsembleData {
            dim: e.dim,
            scheme: e.scheme,
            paths: e
                .paths
                .iter()
                .map(|p| PathData { id: p.index, times: p.times.clone(), states: p.states.clone() })
                .collect(),
        }
    }
}

pub fn write_csv<W: Write>(data: &EnsembleData, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string(), "path_id".to_string()];
    header.extend((0..data.dim).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(data.dim + 2);
    for p in &data.paths {
        for (i, t) in p.times.iter().enumerate() {
            row.clear();
            row.push(t.to_string());
            row.push(p.id.to_string());
            row.extend(p.states[i * data.dim..(i + 1) * data.dim].iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV export; rows of one path must be contiguous.
pub fn read_csv<R: Read>(input: R, scheme: Scheme) -> Result<EnsembleData> {
    let mut r = csv::Reader::from_reader(input);
    let dim = r.headers()?.len().checked_sub(2).ok_or_else(|| IjdError::Format("missing columns".into()))?;
    let mut paths: Vec<PathData> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| IjdError::Format(format!("column {i}: {e}")))
        };
        let id: u64 = rec[1].parse().map_err(|e| IjdError::Format(format!("path_id: {e}")))?;
        if paths.last().is_none_or(|p| p.id != id) {
            paths.push(PathData { id, times: Vec::new(), states: Vec::new() });
        }
        let p = paths.last_mut().expect("just pushed");
        p.times.push(num(0)?);
        for i in 0..dim {
            p.states.push(num(i + 2)?);
        }
    }
    Ok(EnsembleData { dim, scheme, paths })
}

pub fn write_binary<W: Write>(data: &EnsembleData, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(data.dim as u32).to_le_bytes())?;
    out.write_all(&data.scheme.id().to_le_bytes())?;
    out.write_all(&(data.paths.len() as u64).to_le_bytes())?;
    for p in &data.paths {
        out.write_all(&p.id.to_le_bytes())?;
        out.write_all(&(p.times.len() as u64).to_le_bytes())?;
        for (i, t) in p.times.iter().enumerate() {
            out.write_all(&t.to_le_bytes())?;
            for v in &p.states[i * data.dim..(i + 1) * data.dim] {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| IjdError::Format(format!("truncated file: {e}")))?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<EnsembleData> {
    if &take::<4, _>(&mut input)? != MAGIC {
        return Err(IjdError::Format("bad magic".into()));
    }
    let dim = u32::from_le_bytes(take(&mut input)?) as usize;
    let scheme_id = u32::from_le_bytes(take(&mut input)?);
    let scheme = Scheme::from_id(scheme_id).ok_or_else(|| IjdError::Format(format!("unknown scheme {scheme_id}")))?;
    let n_paths = u64::from_le_bytes(take(&mut input)?);
    let mut paths = Vec::new();
    for _ in 0..n_paths {
        let id = u64::from_le_bytes(take(&mut input)?);
        let n = u64::from_le_bytes(take(&mut input)?) as usize;
        let mut times = Vec::with_capacity(n.min(1 << 20));
        let mut states = Vec::with_capacity((n * dim).min(1 << 20));
        for _ in 0..n {
            times.push(f64::from_le_bytes(take(&mut input)?));
            for _ in 0..dim {
                states.push(f64::from_le_bytes(take(&mut input)?));
            }
        }
        paths.push(PathData { id, times, states });
    }
    Ok(EnsembleData { dim, scheme, paths })
}
