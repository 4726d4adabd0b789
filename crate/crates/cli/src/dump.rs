//! Raw grid dumps: `BFMG`, u32 ndim, u32 components, u64 dims, f64 spacings,
//! then every component in turn as little-endian f64 in grid order.

use std::path::Path;

use bfm_core::grid::Grid;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"BFMG";

#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub grid: Grid,
    pub components: Vec<Vec<f64>>,
}

pub fn encode(grid: &Grid, components: &[&[f64]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 16 * grid.ndim() + 8 * grid.len() * components.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.ndim() as u32).to_le_bytes());
    out.extend_from_slice(&(components.len() as u32).to_le_bytes());
    for &d in grid.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for h in grid.spacings() {
        out.extend_from_slice(&h.to_le_bytes());
    }
    for c in components {
        assert_eq!(c.len(), grid.len(), "component length");
        for v in c.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Dump, String> {
    let mut pos = 0;
    let mut take = |n: usize| -> std::result::Result<&[u8], String> {
        let s = bytes.get(pos..pos + n).ok_or("truncated dump")?;
        pos += n;
        Ok(s)
    };
    if take(4)? != MAGIC {
        return Err("bad magic, not a BFMG dump".into());
    }
    let ndim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let ncomp = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if ndim == 0 || ndim > 3 {
        return Err(format!("unsupported dimension {ndim}"));
    }
    let dims = (0..ndim)
        .map(|_| Ok(u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize))
        .collect::<std::result::Result<Vec<_>, String>>()?;
    let grid = Grid::new(&dims).map_err(|e| e.to_string())?;
    for (axis, cells) in dims.iter().enumerate() {
        let h = f64::from_le_bytes(take(8)?.try_into().unwrap());
        if h != grid.spacing(axis) {
            return Err(format!("spacing {h} does not match {cells} cells"));
        }
    }
    let components = (0..ncomp)
        .map(|_| {
            let raw = take(8 * grid.len())?;
            Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
        })
        .collect::<std::result::Result<Vec<Vec<f64>>, String>>()?;
    Ok(Dump { grid, components })
}

pub fn write(path: &Path, grid: &Grid, components: &[&[f64]]) -> Result<()> {
    std::fs::write(path, encode(grid, components)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<Dump> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|m| CliError::format(path, m))
}
