//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use bfm_core::grid::{Grid, Potential};
use bfm_core::CostModel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const EXPONENTS: [f64; 5] = [1.1, 1.5, 2.0, 2.5, 3.0];

/// `max_j x·y_j − v_j`, smallest `j` on ties.
pub fn brute_legendre(nodes: &[f64], values: &[f64], x: f64) -> (f64, usize) {
    let mut best = x * nodes[0] - values[0];
    let mut arg = 0;
    for j in 1..nodes.len() {
        let v = x * nodes[j] - values[j];
        if v > best {
            best = v;
            arg = j;
        }
    }
    (best, arg)
}

/// `min_j table[|k − j|] − v_j`, smallest `j` on ties.
pub fn brute_ctransform(table: &[f64], values: &[f64], k: usize) -> (f64, usize) {
    let mut best = table[k] - values[0];
    let mut arg = 0;
    for j in 1..values.len() {
        let v = table[k.abs_diff(j)] - values[j];
        if v < best {
            best = v;
            arg = j;
        }
    }
    (best, arg)
}

/// `min_y c(x, y) − φ(y)` over every node, for every node.
pub fn brute_force_nd(model: &CostModel, phi: &Potential) -> Vec<f64> {
    let g = phi.grid();
    let d = g.ndim();
    (0..g.len())
        .map(|i| {
            let x = g.point(i);
            (0..g.len())
                .map(|j| model.cost(&x[..d], &g.point(j)[..d]) - phi.values()[j])
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

pub fn centres(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) / n as f64).collect()
}

/// Noise plus a random parabola, so both flat and strongly curved hulls
/// occur.
pub fn random_line(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let a: f64 = rng.gen_range(-2.0..2.0);
    let amp: f64 = [0.0, 1e-3, 0.1, 1.0][rng.gen_range(0..4)];
    (0..n)
        .map(|j| {
            let y = (j as f64 + 0.5) / n as f64;
            a * y * y + amp * rng.gen_range(-1.0..1.0)
        })
        .collect()
}

pub fn random_potential(rng: &mut ChaCha8Rng, grid: Grid) -> Potential {
    let scale: f64 = [0.01, 0.1, 1.0][rng.gen_range(0..3)];
    let vals = (0..grid.len()).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
    Potential::new(grid, vals).unwrap()
}

/// `−Δ_h u` with zero-flux (mirrored) ghost cells.
pub fn neg_laplacian(grid: &Grid, u: &[f64]) -> Vec<f64> {
    (0..u.len())
        .map(|i| {
            let idx = grid.unravel(i);
            (0..grid.ndim())
                .map(|a| {
                    let n = grid.dims()[a];
                    let s = grid.stride(a);
                    let left = if idx[a] == 0 { u[i] } else { u[i - s] };
                    let right = if idx[a] == n - 1 { u[i] } else { u[i + s] };
                    (2.0 * u[i] - left - right) * (n * n) as f64
                })
                .sum()
        })
        .collect()
}

/// Largest deviation of `−Δ_h u` from the mean-free `rhs`, relative to the
/// size of the mean-free `rhs`.
pub fn roundtrip_error(grid: &Grid, u: &[f64], rhs: &[f64]) -> f64 {
    let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
    let scale = rhs.iter().map(|v| (v - mean).abs()).fold(1e-300, f64::max);
    neg_laplacian(grid, u)
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - (b - mean)).abs())
        .fold(0.0, f64::max)
        / scale
}
