//! Where densities come from: greymaps, CSV grids or built-in shapes.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bfm_core::grid::{normalize, DensityField, Grid};
use bfm_core::shapes::ShapeUnion;

use crate::error::{CliError, Result};
use crate::pgm;

#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    File(PathBuf),
    Shapes(ShapeUnion),
}

impl FromStr for DensitySpec {
    type Err = CliError;

    /// `builtin:<shapes>` or a file path.
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("builtin:") {
            Some(shapes) => Ok(DensitySpec::Shapes(shapes.parse()?)),
            None => Ok(DensitySpec::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::File(p) => write!(f, "{}", p.display()),
            DensitySpec::Shapes(u) => {
                let parts: Vec<String> = u.0.iter().map(|s| s.to_string()).collect();
                write!(f, "builtin:{}", parts.join("+"))
            }
        }
    }
}

/// Unnormalised samples on a grid read from disk.
struct Raster {
    grid: Grid,
    values: Vec<f64>,
}

fn is_pgm(path: &Path, bytes: &[u8]) -> bool {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("pgm") => true,
        Some(e) if e.eq_ignore_ascii_case("csv") => false,
        _ => matches!(bytes.get(..2), Some(b"P5" | b"P2")),
    }
}

fn parse_csv(path: &Path, text: &str) -> Result<Raster> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(r, line)| {
            line.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::format(path, format!("row {}: bad number '{}'", r + 1, t.trim())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let width = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || width == 0 {
        return Err(CliError::format(path, "empty grid"));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != width) {
        return Err(CliError::format(path, format!("row {} has {} columns, expected {width}", r + 1, row.len())));
    }
    let grid = Grid::new(&[rows.len(), width]).map_err(|e| CliError::format(path, e.to_string()))?;
    Ok(Raster { grid, values: rows.concat() })
}

fn load(path: &Path, invert: bool) -> Result<Raster> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    if is_pgm(path, &bytes) {
        let img = pgm::parse(&bytes).map_err(|m| CliError::format(path, m))?;
        let grid = Grid::new(&[img.height, img.width]).map_err(|e| CliError::format(path, e.to_string()))?;
        let values = if invert { img.samples.iter().map(|v| 1.0 - v).collect() } else { img.samples };
        Ok(Raster { grid, values })
    } else {
        let text = String::from_utf8(bytes).map_err(|_| CliError::format(path, "CSV is not UTF-8"))?;
        parse_csv(path, &text)
    }
}

/// Builds both densities on a common grid. Files fix the grid; shapes are
/// rasterised on it, or on an `n`-per-axis cube when both are shapes.
/// `invert` flips greymap samples so dark pixels carry mass.
pub fn resolve_pair(mu: &DensitySpec, nu: &DensitySpec, n: usize, invert: bool) -> Result<(DensityField, DensityField)> {
    let load_file = |s: &DensitySpec| match s {
        DensitySpec::File(p) => load(p, invert).map(Some),
        DensitySpec::Shapes(_) => Ok(None),
    };
    let (a, b) = (load_file(mu)?, load_file(nu)?);
    let grid = match (&a, &b, mu) {
        (Some(r), _, _) | (None, Some(r), _) => r.grid,
        (None, None, DensitySpec::Shapes(u)) => Grid::cube(u.ndim(), n)?,
        _ => unreachable!("a file spec always loads a raster"),
    };
    let build = |spec: &DensitySpec, raster: Option<Raster>| -> Result<DensityField> {
        match (spec, raster) {
            (DensitySpec::Shapes(u), _) => Ok(u.density(grid)?),
            (DensitySpec::File(p), Some(r)) => {
                if r.grid != grid {
                    return Err(CliError::Usage(format!(
                        "{} is {:?} but the other density is {:?}",
                        p.display(),
                        r.grid.dims(),
                        grid.dims()
                    )));
                }
                Ok(normalize(grid, &r.values)?)
            }
            (DensitySpec::File(_), None) => unreachable!("file specs are loaded above"),
        }
    };
    Ok((build(mu, a)?, build(nu, b)?))
}

/// One density on a grid fixed elsewhere (for example by a map dump).
pub fn resolve_on(spec: &DensitySpec, grid: Grid, invert: bool) -> Result<DensityField> {
    match spec {
        DensitySpec::Shapes(u) => Ok(u.density(grid)?),
        DensitySpec::File(p) => {
            let r = load(p, invert)?;
            if r.grid != grid {
                return Err(CliError::Usage(format!("{} is {:?}, expected {:?}", p.display(), r.grid.dims(), grid.dims())));
            }
            Ok(normalize(grid, &r.values)?)
        }
    }
}
