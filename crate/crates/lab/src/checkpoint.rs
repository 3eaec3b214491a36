//! Flat little-endian snapshots of grid functions: `d` and `L` as `f64`,
//! the cells per axis as `u64`, then the values in row-major order.

use std::io::{Read, Write};

use polarlab_core::{GridFunction, GridSet, Lattice};

use crate::error::{LabError, Result};

fn io_err(e: std::io::Error) -> LabError {
    LabError::Checkpoint(e.to_string())
}

pub fn write_grid<W: Write>(w: &mut W, f: &GridFunction) -> Result<()> {
    let lat = f.lattice();
    let mut buf = Vec::with_capacity(24 + 8 * lat.len());
    buf.extend_from_slice(&(lat.dim() as f64).to_le_bytes());
    buf.extend_from_slice(&lat.half_width().to_le_bytes());
    buf.extend_from_slice(&(lat.cells_per_axis() as u64).to_le_bytes());
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

/// Sets are stored through their indicator functions.
pub fn write_set<W: Write>(w: &mut W, a: &GridSet) -> Result<()> {
    write_grid(w, &a.indicator())
}

fn read_word<R: Read>(r: &mut R) -> Result<[u8; 8]> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(b)
}

pub fn read_grid<R: Read>(r: &mut R) -> Result<GridFunction> {
    let d = f64::from_le_bytes(read_word(r)?);
    let l = f64::from_le_bytes(read_word(r)?);
    let n = u64::from_le_bytes(read_word(r)?);
    if !((1.0..=8.0).contains(&d) && d.fract() == 0.0) {
        return Err(LabError::Checkpoint(format!("bad dimension {d}")));
    }
    let lat = Lattice::new(d as usize, l, n as usize)?;
    let mut values = Vec::with_capacity(lat.len());
    for _ in 0..lat.len() {
        values.push(f64::from_le_bytes(read_word(r)?));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io_err)? != 0 {
        return Err(LabError::Checkpoint("trailing bytes".into()));
    }
    Ok(GridFunction::new(lat, values)?)
}

pub fn read_set<R: Read>(r: &mut R) -> Result<GridSet> {
    let f = read_grid(r)?;
    if f.values().iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(LabError::Checkpoint("not an indicator".into()));
    }
    Ok(f.level_set(0.5))
}
