//! Exact discrete c-transforms on grids.
//!
//! A separable cost lets the d-dimensional transform be computed by one
//! pass of 1-D transforms per axis, negating the partial result between
//! passes. For the quadratic cost each 1-D pass is a linear-time Legendre
//! transform; other power costs use the `O(n log n)` divide-and-conquer
//! transform. Lines within a pass are independent and run in parallel.

mod dnc;
mod legendre;

pub use dnc::ctransform_1d;
pub use legendre::legendre_1d;

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::grid::{Grid, Potential, MAX_DIM};
use crate::par;

/// Per-lane scratch for line transforms, sized to the longest axis.
#[derive(Debug, Clone)]
pub struct TransformWorkspace {
    line: Vec<f64>,
    nodes: Vec<f64>,
    hull: Vec<usize>,
    argmin: Vec<usize>,
}

impl TransformWorkspace {
    pub fn new(max_len: usize) -> Self {
        Self {
            line: Vec::with_capacity(max_len),
            nodes: Vec::with_capacity(max_len),
            hull: Vec::with_capacity(max_len),
            argmin: vec![0; max_len],
        }
    }

    pub fn for_grid(grid: &Grid) -> Self {
        Self::new(grid.dims().iter().copied().max().unwrap_or(0))
    }

    /// In-place Legendre transform of a line sampled at the cell centres of
    /// an axis with `line.len()` points. Maximisers go to `argmax` when given.
    pub fn legendre_line(&mut self, line: &mut [f64], argmax: Option<&mut [usize]>) {
        let n = line.len();
        let Self {
            line: input,
            nodes,
            hull,
            argmin,
        } = self;
        input.clear();
        input.extend_from_slice(line);
        nodes.clear();
        nodes.extend((0..n).map(|j| (j as f64 + 0.5) / n as f64));
        let argmax = match argmax {
            Some(a) => a,
            None => {
                argmin.resize(n, 0);
                &mut argmin[..n]
            }
        };
        legendre_1d(nodes, input, nodes, line, argmax, hull);
    }

    /// In-place c-transform of a line for the cost `table`.
    pub fn ctransform_line(&mut self, table: &[f64], line: &mut [f64], argmin: Option<&mut [usize]>) {
        let n = line.len();
        self.line.clear();
        self.line.extend_from_slice(line);
        let argmin = match argmin {
            Some(a) => a,
            None => {
                self.argmin.resize(n, 0);
                &mut self.argmin[..n]
            }
        };
        ctransform_1d(table, &self.line, line, argmin);
    }
}

fn check_model(model: &CostModel, grid: &Grid) -> Result<()> {
    if model.ndim() != grid.ndim() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Discrete c-transform `φ^c(x) = min_y c(x, y) − φ(y)` over all grid nodes.
pub fn ctransform(model: &CostModel, phi: &Potential) -> Result<Potential> {
    check_model(model, phi.grid())?;
    let grid = *phi.grid();
    let values = if model.is_quadratic() {
        quadratic_pass(&grid, phi.values(), None)
    } else {
        separable_pass(model, &grid, phi.values(), None)
    };
    Potential::new(grid, values)
}

/// c-transform plus, for every node `x`, the flat index of its minimiser
/// `y(x)` (smallest index on ties, resolved axis by axis).
pub fn ctransform_with_argmin(
    model: &CostModel,
    phi: &Potential,
) -> Result<(Potential, Vec<usize>)> {
    check_model(model, phi.grid())?;
    let grid = *phi.grid();
    let mut per_axis: Vec<Vec<usize>> = Vec::with_capacity(grid.ndim());
    let values = if model.is_quadratic() {
        quadratic_pass(&grid, phi.values(), Some(&mut per_axis))
    } else {
        separable_pass(model, &grid, phi.values(), Some(&mut per_axis))
    };
    let argmin = backtrack_minimisers(&grid, &per_axis);
    Ok((Potential::new(grid, values)?, argmin))
}

/// `φ^{cc}`.
pub fn double_ctransform(model: &CostModel, phi: &Potential) -> Result<Potential> {
    ctransform(model, &ctransform(model, phi)?)
}

fn half_square_norm(grid: &Grid, i: usize) -> f64 {
    let p = grid.point(i);
    0.5 * p[..grid.ndim()].iter().map(|x| x * x).sum::<f64>()
}

/// Quadratic cost via `φ^c(x) = ½|x|² − (½|·|² − φ)*(x)`.
fn quadratic_pass(
    grid: &Grid,
    phi: &[f64],
    mut argmin: Option<&mut Vec<Vec<usize>>>,
) -> Vec<f64> {
    let mut work = vec![0.0; phi.len()];
    par::fill_indexed(&mut work, |i| half_square_norm(grid, i) - phi[i]);
    let last = grid.ndim() - 1;
    for axis in 0..grid.ndim() {
        let negate = axis != last;
        let init = || TransformWorkspace::for_grid(grid);
        match argmin.as_deref_mut() {
            Some(store) => {
                let mut idx = vec![0usize; phi.len()];
                grid.for_each_line_with_aux(&mut work, &mut idx, axis, init, |ws, line, arg| {
                    ws.legendre_line(line, Some(arg));
                    if negate {
                        line.iter_mut().for_each(|v| *v = -*v);
                    }
                });
                store.push(idx);
            }
            None => grid.for_each_line(&mut work, axis, init, |ws, line| {
                ws.legendre_line(line, None);
                if negate {
                    line.iter_mut().for_each(|v| *v = -*v);
                }
            }),
        }
    }
    par::update_indexed(&mut work, |i, v| half_square_norm(grid, i) - v);
    work
}

/// General separable cost via axis-by-axis divide-and-conquer transforms.
fn separable_pass(
    model: &CostModel,
    grid: &Grid,
    phi: &[f64],
    mut argmin: Option<&mut Vec<Vec<usize>>>,
) -> Vec<f64> {
    let mut work = phi.to_vec();
    let last = grid.ndim() - 1;
    for axis in 0..grid.ndim() {
        let table = model.axis_table(axis, grid.dims()[axis]);
        let table = &table;
        let negate = axis != last;
        let init = || TransformWorkspace::for_grid(grid);
        match argmin.as_deref_mut() {
            Some(store) => {
                let mut idx = vec![0usize; phi.len()];
                grid.for_each_line_with_aux(&mut work, &mut idx, axis, init, |ws, line, arg| {
                    ws.ctransform_line(table, line, Some(arg));
                    if negate {
                        line.iter_mut().for_each(|v| *v = -*v);
                    }
                });
                store.push(idx);
            }
            None => grid.for_each_line(&mut work, axis, init, |ws, line| {
                ws.ctransform_line(table, line, None);
                if negate {
                    line.iter_mut().for_each(|v| *v = -*v);
                }
            }),
        }
    }
    work
}

/// Recovers the full minimiser from the per-pass 1-D minimisers. Pass `a`
/// stores, at `(x_0..x_a, y_{a+1}..)`, the minimising `y_a`; walking the
/// passes from last to first fills in `y` one coordinate at a time.
fn backtrack_minimisers(grid: &Grid, per_axis: &[Vec<usize>]) -> Vec<usize> {
    let mut out = vec![0usize; grid.len()];
    par::fill_indexed_usize(&mut out, |i| {
        let mut idx: [usize; MAX_DIM] = grid.unravel(i);
        for axis in (0..grid.ndim()).rev() {
            idx[axis] = per_axis[axis][grid.ravel(&idx)];
        }
        grid.ravel(&idx)
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(model: &CostModel, phi: &Potential) -> Vec<f64> {
        let g = phi.grid();
        let d = g.ndim();
        (0..g.len())
            .map(|i| {
                let xi = g.unravel(i);
                (0..g.len())
                    .map(|j| {
                        let yj = g.unravel(j);
                        let c: f64 = (0..d)
                            .map(|a| {
                                model.axis_cost(a, g.offset(a, yj[a] as isize - xi[a] as isize))
                            })
                            .sum();
                        c - phi.values()[j]
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    fn pseudo_random(grid: Grid, seed: u64) -> Potential {
        let mut s = seed;
        let vals = (0..grid.len())
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 0.2 - 0.1
            })
            .collect();
        Potential::new(grid, vals).unwrap()
    }

    #[test]
    fn zero_potential_maps_to_zero() {
        for model in [CostModel::quadratic(2), CostModel::new(vec![1.5, 2.5]).unwrap()] {
            let g = Grid::new(&[6, 7]).unwrap();
            let out = ctransform(&model, &Potential::zeros(g)).unwrap();
            assert!(out.values().iter().all(|&v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn matches_brute_force_in_three_dimensions() {
        let g = Grid::new(&[4, 5, 6]).unwrap();
        let phi = pseudo_random(g, 7);
        for model in [CostModel::quadratic(3), CostModel::new(vec![1.5, 3.0, 2.5]).unwrap()] {
            let fast = ctransform(&model, &phi).unwrap();
            let slow = brute_force(&model, &phi);
            for (a, b) in fast.values().iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn argmin_attains_the_minimum() {
        let g = Grid::new(&[8, 9]).unwrap();
        let phi = pseudo_random(g, 3);
        let model = CostModel::new(vec![1.5, 2.5]).unwrap();
        let (out, arg) = ctransform_with_argmin(&model, &phi).unwrap();
        for i in 0..g.len() {
            let x = g.point(i);
            let y = g.point(arg[i]);
            let xi = g.unravel(i);
            let yi = g.unravel(arg[i]);
            let c: f64 = (0..2)
                .map(|a| model.axis_cost(a, g.offset(a, yi[a] as isize - xi[a] as isize)))
                .sum();
            assert!((c - phi.values()[arg[i]] - out.values()[i]).abs() < 1e-12);
            assert!((model.cost(&x[..2], &y[..2]) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let g = Grid::new(&[4, 4]).unwrap();
        assert_eq!(
            ctransform(&CostModel::quadratic(3), &Potential::zeros(g)),
            Err(Error::GridMismatch)
        );
    }
}
