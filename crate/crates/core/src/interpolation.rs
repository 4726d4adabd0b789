//! Displacement interpolation `ρ(t) = ((1 − t)·id + t·T)_# μ`.
//!
//! For non-quadratic costs the straight-line path is a visualisation
//! convention, not the transport geodesic.

use crate::error::{Error, Result};
use crate::grid::DensityField;
use crate::pushforward::{splat, TransportMap};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Splats `mu` along `x + t·(T(x) − x)`. `t = 0` returns `mu` and `t = 1`
/// the pushforward under `map`, both bitwise.
pub fn displacement_interpolant(map: &TransportMap, mu: &DensityField, t: f64) -> Result<DensityField> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    if map.grid() != mu.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(DensityField::from_raw_parts(
        *mu.grid(),
        splat(map.displacement(), mu.values(), t),
    ))
}

/// Interpolants at `t = k/(count − 1)` for `k = 0..count`.
pub fn frame_sequence(map: &TransportMap, mu: &DensityField, count: usize) -> Result<Vec<DensityField>> {
    if count < 2 {
        return Err(Error::TOutOfRange(count as f64));
    }
    let times: Vec<f64> = (0..count).map(|k| frame_time(k, count)).collect();
    #[cfg(feature = "parallel")]
    let iter = times.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = times.iter();
    iter.map(|&t| displacement_interpolant(map, mu, t)).collect()
}

/// `k/(count − 1)`, exactly 1 for the last frame.
pub fn frame_time(k: usize, count: usize) -> f64 {
    if k + 1 == count {
        1.0
    } else {
        k as f64 / (count - 1) as f64
    }
}
