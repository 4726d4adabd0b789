//! Regular cell-centred grids on the unit cube and the scalar/vector fields
//! that live on them.
//!
//! Storage is row-major with the last axis contiguous. Node `j` on an axis
//! with `n` points sits at the cell centre `(j + 1/2) / n`.

use crate::error::{Error, Result};
use crate::par;

pub const MAX_DIM: usize = 3;

/// Grid geometry. Cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    ndim: usize,
    dims: [usize; MAX_DIM],
}

impl Grid {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {}",
                dims.len()
            )));
        }
        if let Some(&n) = dims.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGrid(format!(
                "each axis needs at least 2 points, got {n}"
            )));
        }
        let mut d = [1; MAX_DIM];
        d[..dims.len()].copy_from_slice(dims);
        Ok(Self {
            ndim: dims.len(),
            dims: d,
        })
    }

    /// `n` points along each of `ndim` axes.
    pub fn cube(ndim: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; ndim])
    }

    #[inline]
    pub fn ndim(&self) -> usize {
        self.ndim
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.ndim]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self, axis: usize) -> f64 {
        1.0 / self.dims[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.ndim).map(|a| self.spacing(a)).collect()
    }

    /// Largest cell width.
    pub fn max_spacing(&self) -> f64 {
        (0..self.ndim).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    /// Volume of one cell, the midpoint quadrature weight.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dims().iter().map(|&n| 1.0 / n as f64).product()
    }

    /// Coordinate of node `j` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, j: usize) -> f64 {
        (j as f64 + 0.5) / self.dims[axis] as f64
    }

    /// Signed distance between two nodes `d` apart on `axis`.
    #[inline]
    pub fn offset(&self, axis: usize, d: isize) -> f64 {
        d as f64 / self.dims[axis] as f64
    }

    /// Distance between consecutive entries of `axis` in the flat storage.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..self.ndim].iter().product()
    }

    /// Per-axis node indices of flat index `i` (unused axes are zero).
    #[inline]
    pub fn unravel(&self, mut i: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for a in (0..self.ndim).rev() {
            let n = self.dims[a];
            idx[a] = i % n;
            i /= n;
        }
        idx
    }

    #[inline]
    pub fn ravel(&self, idx: &[usize]) -> usize {
        let mut i = 0;
        for a in 0..self.ndim {
            i = i * self.dims[a] + idx[a];
        }
        i
    }

    /// Coordinates of the node at flat index `i`.
    pub fn point(&self, i: usize) -> [f64; MAX_DIM] {
        let idx = self.unravel(i);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.ndim {
            p[a] = self.coord(a, idx[a]);
        }
        p
    }

    /// Applies `op` to every line of `data` running along `axis`, in place.
    /// Lines are independent and may be processed concurrently; each lane
    /// gets its own scratch from `init`.
    pub fn for_each_line<S, I, F>(&self, data: &mut [f64], axis: usize, init: I, op: F)
    where
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &mut [f64]) + Sync + Send,
    {
        debug_assert_eq!(data.len(), self.len());
        let n = self.dims[axis];
        let stride = self.stride(axis);
        if stride == 1 {
            par::lines_mut(data, n, init, op);
            return;
        }
        let mut lines = self.gather_lines(data, axis);
        par::lines_mut(&mut lines, n, init, op);
        self.scatter_lines(&lines, data, axis);
    }

    /// Like [`Grid::for_each_line`], also handing `op` an index buffer that
    /// lines up with each line; the buffer contents are written to `aux` in
    /// grid order.
    pub fn for_each_line_with_aux<S, I, F>(
        &self,
        data: &mut [f64],
        aux: &mut [usize],
        axis: usize,
        init: I,
        op: F,
    ) where
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &mut [f64], &mut [usize]) + Sync + Send,
    {
        debug_assert_eq!(data.len(), self.len());
        debug_assert_eq!(aux.len(), self.len());
        let n = self.dims[axis];
        let stride = self.stride(axis);
        if stride == 1 {
            par::lines_mut_with_aux(data, aux, n, init, op);
            return;
        }
        let mut lines = self.gather_lines(data, axis);
        let mut idx = vec![0usize; data.len()];
        par::lines_mut_with_aux(&mut lines, &mut idx, n, init, op);
        self.scatter_lines(&lines, data, axis);
        let (n, stride) = (n, stride);
        par::fill_indexed_usize(aux, |i| idx[line_major_index(i, n, stride)]);
    }

    /// Copies `data` into line-major order for `axis`.
    fn gather_lines(&self, data: &[f64], axis: usize) -> Vec<f64> {
        let n = self.dims[axis];
        let stride = self.stride(axis);
        let mut lines = vec![0.0; data.len()];
        par::fill_indexed(&mut lines, |k| {
            let line = k / n;
            let pos = k % n;
            let outer = line / stride;
            let inner = line % stride;
            data[outer * stride * n + pos * stride + inner]
        });
        lines
    }

    fn scatter_lines(&self, lines: &[f64], data: &mut [f64], axis: usize) {
        let n = self.dims[axis];
        let stride = self.stride(axis);
        par::fill_indexed(data, |i| lines[line_major_index(i, n, stride)]);
    }
}

#[inline]
fn line_major_index(i: usize, n: usize, stride: usize) -> usize {
    let inner = i % stride;
    let pos = (i / stride) % n;
    let outer = i / (stride * n);
    (outer * stride + inner) * n + pos
}

fn check_len(grid: &Grid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(())
}

/// Real-valued field on a grid: a potential such as φ, ψ or φ^c, or a
/// Poisson solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    grid: Grid,
    values: Vec<f64>,
}

impl Potential {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, &values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64 + Sync + Send) -> Self {
        let mut values = vec![0.0; grid.len()];
        par::fill_indexed(&mut values, |i| {
            let p = grid.point(i);
            f(&p[..grid.ndim()])
        });
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Quadrature mean over the unit cube.
    pub fn mean(&self) -> f64 {
        let v = &self.values;
        par::sum(v.len(), |i| v[i]) / v.len() as f64
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, scale: f64, other: &Potential) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let o = &other.values;
        par::update_indexed(&mut self.values, |i, v| v + scale * o[i]);
        Ok(())
    }
}

/// Nonnegative probability density with unit total mass under the midpoint
/// quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    values: Vec<f64>,
}

/// Relative tolerance on total mass accepted by [`DensityField::new`].
pub const MASS_TOLERANCE: f64 = 1e-9;

impl DensityField {
    /// Wraps values that already form a probability density.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, &values)?;
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InfeasibleInput(format!(
                "non-finite value {v} at node {i}"
            )));
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(Error::NegativeInput { index: i, value: v });
        }
        let mass = par::sum(values.len(), |i| values[i]) * grid.cell_volume();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InfeasibleInput(format!("total mass {mass}")));
        }
        Ok(Self { grid, values })
    }

    /// Used by the pushforward, whose output is a density by construction.
    pub(crate) fn from_raw_parts(grid: Grid, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    /// Uniform density on the whole cube.
    pub fn uniform(grid: Grid) -> Self {
        Self {
            values: vec![1.0; grid.len()],
            grid,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Total mass, `Σ ρ · cell volume`.
    pub fn mass(&self) -> f64 {
        let v = &self.values;
        par::sum(v.len(), |i| v[i]) * self.grid.cell_volume()
    }

    /// Sup norm.
    pub fn max_value(&self) -> f64 {
        let v = &self.values;
        par::max(v.len(), |i| v[i])
    }

    /// Mass-weighted mean position.
    pub fn center_of_mass(&self) -> Vec<f64> {
        let g = self.grid;
        let v = &self.values;
        let mass = par::sum(v.len(), |i| v[i]);
        (0..g.ndim())
            .map(|a| par::sum(v.len(), |i| v[i] * g.coord(a, g.unravel(i)[a])) / mass)
            .collect()
    }
}

/// Scales a nonnegative field so that it integrates to one.
pub fn normalize(grid: Grid, raw: &[f64]) -> Result<DensityField> {
    check_len(&grid, raw)?;
    if let Some((i, &v)) = raw.iter().enumerate().find(|(_, &v)| v.is_nan() || v < 0.0) {
        if v.is_nan() {
            return Err(Error::InfeasibleInput(format!("NaN at node {i}")));
        }
        return Err(Error::NegativeInput { index: i, value: v });
    }
    let total = par::sum(raw.len(), |i| raw[i]);
    if total == 0.0 {
        return Err(Error::AllZeroInput);
    }
    if !total.is_finite() {
        return Err(Error::InfeasibleInput("infinite total mass".into()));
    }
    let mass = total * grid.cell_volume();
    // Fields already normalised up to summation rounding are kept as they
    // are, which makes normalisation idempotent.
    if (mass - 1.0).abs() <= 1e-12 {
        return Ok(DensityField { grid, values: raw.to_vec() });
    }
    let mut values = vec![0.0; raw.len()];
    par::fill_indexed(&mut values, |i| raw[i] / mass);
    Ok(DensityField { grid, values })
}

/// Midpoint quadrature `Σ f · w · cell volume`.
pub fn integrate(f: &Potential, w: &DensityField) -> Result<f64> {
    if f.grid != w.grid {
        return Err(Error::GridMismatch);
    }
    Ok(dot(f.values(), w.values()) * f.grid.cell_volume())
}

/// Plain `Σ a·b`, blocked for determinism.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    par::sum(a.len(), |i| a[i] * b[i])
}

/// One scalar component per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: vec![vec![0.0; grid.len()]; grid.ndim()],
            grid,
        }
    }

    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.ndim() {
            return Err(Error::InvalidGrid(format!(
                "expected {} components, got {}",
                grid.ndim(),
                components.len()
            )));
        }
        for c in &components {
            check_len(&grid, c)?;
        }
        Ok(Self { grid, components })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.components
    }

    /// Vector at flat index `i`.
    pub fn at(&self, i: usize) -> [f64; MAX_DIM] {
        let mut v = [0.0; MAX_DIM];
        for (a, c) in self.components.iter().enumerate() {
            v[a] = c[i];
        }
        v
    }
}

/// Finite-difference gradient: centred differences inside, first-order
/// one-sided differences on the boundary nodes.
pub fn gradient(f: &Potential) -> VectorField {
    let grid = *f.grid();
    let v = f.values();
    let components = (0..grid.ndim())
        .map(|axis| {
            let n = grid.dims()[axis];
            let stride = grid.stride(axis);
            let inv_h = n as f64;
            let mut out = vec![0.0; v.len()];
            par::fill_indexed(&mut out, |i| {
                let j = (i / stride) % n;
                if j == 0 {
                    (v[i + stride] - v[i]) * inv_h
                } else if j == n - 1 {
                    (v[i] - v[i - stride]) * inv_h
                } else {
                    (v[i + stride] - v[i - stride]) * (0.5 * inv_h)
                }
            });
            out
        })
        .collect();
    VectorField { grid, components }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(&[]).is_err());
        assert!(Grid::new(&[4, 4, 4, 4]).is_err());
        assert!(Grid::new(&[4, 1]).is_err());
        let g = Grid::new(&[4, 8]).unwrap();
        assert_eq!(g.len(), 32);
        assert_eq!(g.stride(0), 8);
        assert_eq!(g.stride(1), 1);
        assert_eq!(g.cell_volume(), 1.0 / 32.0);
        for i in 0..g.len() {
            assert_eq!(g.ravel(&g.unravel(i)), i);
            let p = g.point(i);
            assert!(p[..2].iter().all(|&x| x > 0.0 && x < 1.0));
        }
        assert_eq!(g.coord(0, 0), 0.125);
    }

    #[test]
    fn normalize_constant_is_unit() {
        let g = Grid::cube(2, 4).unwrap();
        let d = normalize(g, &[1.0; 16]).unwrap();
        assert!(d.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn normalize_point_mass() {
        let n = 8;
        let g = Grid::cube(2, n).unwrap();
        let mut raw = vec![0.0; n * n];
        raw[13] = 0.37;
        let d = normalize(g, &raw).unwrap();
        assert!((d.values()[13] - (n * n) as f64).abs() < 1e-12);
        assert!((d.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_errors() {
        let g = Grid::cube(1, 4).unwrap();
        assert_eq!(normalize(g, &[0.0; 4]), Err(Error::AllZeroInput));
        assert!(matches!(
            normalize(g, &[1.0, -1.0, 0.0, 0.0]),
            Err(Error::NegativeInput { index: 1, .. })
        ));
        assert!(matches!(
            normalize(g, &[1.0; 3]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn normalize_is_idempotent() {
        let g = Grid::cube(2, 16).unwrap();
        let raw: Vec<f64> = (0..256).map(|i| ((i * 37) % 11) as f64).collect();
        let a = normalize(g, &raw).unwrap();
        let b = normalize(g, a.values()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn integrate_examples() {
        let g = Grid::new(&[2]).unwrap();
        let w = DensityField::uniform(g);
        let f = Potential::from_fn(g, |p| p[0]);
        assert_eq!(integrate(&f, &w).unwrap(), 0.5);
        let c = Potential::new(g, vec![3.5; 2]).unwrap();
        assert_eq!(integrate(&c, &w).unwrap(), 3.5);
        let other = DensityField::uniform(Grid::new(&[4]).unwrap());
        assert_eq!(integrate(&f, &other), Err(Error::GridMismatch));
    }

    #[test]
    fn gradient_of_linear_and_quadratic() {
        let g = Grid::new(&[8]).unwrap();
        let lin = gradient(&Potential::from_fn(g, |p| p[0]));
        assert!(lin.component(0).iter().all(|&d| (d - 1.0).abs() < 1e-12));

        let quad = gradient(&Potential::from_fn(g, |p| p[0] * p[0]));
        let h = g.spacing(0);
        for j in 0..8 {
            let exact = 2.0 * g.coord(0, j);
            let err = (quad.component(0)[j] - exact).abs();
            if j == 0 || j == 7 {
                assert!(err <= h + 1e-12);
            } else {
                assert!(err < 1e-12);
            }
        }
        let zero = gradient(&Potential::zeros(Grid::cube(3, 4).unwrap()));
        assert!(zero.components().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_along_each_axis() {
        let g = Grid::new(&[5, 6, 7]).unwrap();
        let f = Potential::from_fn(g, |p| 2.0 * p[0] - 3.0 * p[1] + 0.5 * p[2]);
        let grad = gradient(&f);
        for (a, slope) in [2.0, -3.0, 0.5].into_iter().enumerate() {
            assert!(grad.component(a).iter().all(|&d| (d - slope).abs() < 1e-12));
        }
    }

    #[test]
    fn line_gather_roundtrip() {
        let g = Grid::new(&[3, 4, 5]).unwrap();
        for axis in 0..3 {
            let mut data: Vec<f64> = (0..g.len()).map(|i| i as f64).collect();
            let orig = data.clone();
            let n = g.dims()[axis];
            let stride = g.stride(axis);
            // each line must be an arithmetic progression with the axis stride
            g.for_each_line(&mut data, axis, || (), |_, line| {
                assert_eq!(line.len(), n);
                for w in line.windows(2) {
                    assert_eq!(w[1] - w[0], stride as f64);
                }
                line.reverse();
            });
            g.for_each_line(&mut data, axis, || (), |_, line| line.reverse());
            assert_eq!(data, orig);
        }
    }
}
