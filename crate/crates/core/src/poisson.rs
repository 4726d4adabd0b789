//! Inverse negative Laplacian with zero-flux boundaries on the unit cube.
//!
//! On a cell-centred grid the (2d+1)-point Neumann stencil is diagonalised
//! by the type-II cosine basis `cos(πk(j + ½)/n)`, with eigenvalue
//! `(2 − 2cos(πk/n))·n²` per axis. Solves and norms are therefore exact for
//! the discrete operator up to rounding.

use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};
use crate::grid::{Grid, Potential};
use crate::par;

/// Cosine-transform plans and stencil eigenvalues for one grid.
/// Immutable once built; share it freely between threads.
#[derive(Clone)]
pub struct SpectralPlan {
    grid: Grid,
    eigenvalues: Vec<Vec<f64>>,
    transforms: Vec<Arc<dyn TransformType2And3<f64>>>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

/// `(2 − 2cos(πk/n))·n²` for `k = 0..n`.
pub fn stencil_eigenvalues(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|k| (2.0 - 2.0 * (std::f64::consts::PI * k as f64 / nf).cos()) * nf * nf)
        .collect()
}

impl SpectralPlan {
    pub fn new(grid: Grid) -> Self {
        let mut planner = DctPlanner::new();
        let transforms = grid.dims().iter().map(|&n| planner.plan_dct2(n)).collect();
        let eigenvalues = grid.dims().iter().map(|&n| stencil_eigenvalues(n)).collect();
        Self {
            grid,
            eigenvalues,
            transforms,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eigenvalues(&self, axis: usize) -> &[f64] {
        &self.eigenvalues[axis]
    }

    /// `Λ(k) = Σᵢ λᵢ(kᵢ)` for the mode at flat index `i`.
    #[inline]
    fn mode_eigenvalue(&self, i: usize) -> f64 {
        let k = self.grid.unravel(i);
        (0..self.grid.ndim()).map(|a| self.eigenvalues[a][k[a]]).sum()
    }

    /// Quadrature weight of mode `i` so that `∫ f g = Σ_k F_k G_k w_k` for
    /// unnormalised type-II coefficients.
    #[inline]
    fn mode_weight(&self, i: usize) -> f64 {
        let k = self.grid.unravel(i);
        self.grid
            .dims()
            .iter()
            .enumerate()
            .map(|(a, &n)| {
                let c = if k[a] == 0 { 1.0 } else { 2.0 };
                c / (n * n) as f64
            })
            .product()
    }

    /// Unnormalised type-II cosine transform along every axis.
    fn forward(&self, data: &mut [f64]) {
        for (axis, dct) in self.transforms.iter().enumerate() {
            let scratch_len = dct.get_scratch_len();
            self.grid.for_each_line(
                data,
                axis,
                || vec![0.0; scratch_len],
                |scratch, line| dct.process_dct2_with_scratch(line, scratch),
            );
        }
    }

    /// Unnormalised type-III transform along every axis; `backward(forward(x))`
    /// is `x` times `Π nᵢ/2`.
    fn backward(&self, data: &mut [f64]) {
        for (axis, dct) in self.transforms.iter().enumerate() {
            let scratch_len = dct.get_scratch_len();
            self.grid.for_each_line(
                data,
                axis,
                || vec![0.0; scratch_len],
                |scratch, line| dct.process_dct3_with_scratch(line, scratch),
            );
        }
    }

    fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(Error::LengthMismatch {
                expected: self.grid.len(),
                got: values.len(),
            });
        }
        Ok(())
    }

    /// Solves `−Δu = r − mean(r)` with zero Neumann data, returning the
    /// mean-zero solution.
    pub fn solve_neumann(&self, rhs: &[f64]) -> Result<Potential> {
        self.check(rhs)?;
        let mut coeffs = rhs.to_vec();
        self.forward(&mut coeffs);
        let scale: f64 = self.grid.dims().iter().map(|&n| 2.0 / n as f64).product();
        par::update_indexed(&mut coeffs, |i, c| {
            if i == 0 {
                0.0
            } else {
                c * scale / self.mode_eigenvalue(i)
            }
        });
        self.backward(&mut coeffs);
        Potential::new(self.grid, coeffs)
    }

    /// `‖f‖²_Ḣ¹ = ∫|∇f|²` for the discrete operator, `⟨f, −Δ_h f⟩`. The mean
    /// of `f` does not contribute.
    pub fn h1dot_norm_sq(&self, f: &Potential) -> Result<f64> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut coeffs = f.values().to_vec();
        self.forward(&mut coeffs);
        Ok(par::sum(coeffs.len(), |i| {
            if i == 0 {
                0.0
            } else {
                self.mode_eigenvalue(i) * coeffs[i] * coeffs[i] * self.mode_weight(i)
            }
        }))
    }

    /// `‖r‖²_Ḣ⁻¹ = ‖(−Δ)⁻¹ r‖²_Ḣ¹ = ⟨r, (−Δ)⁻¹ r⟩`.
    pub fn hm1dot_norm_sq(&self, rhs: &[f64]) -> Result<f64> {
        self.check(rhs)?;
        let mut coeffs = rhs.to_vec();
        self.forward(&mut coeffs);
        Ok(par::sum(coeffs.len(), |i| {
            if i == 0 {
                0.0
            } else {
                coeffs[i] * coeffs[i] * self.mode_weight(i) / self.mode_eigenvalue(i)
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `−Δ_h u` with mirrored ghost cells.
    fn neg_laplacian(grid: &Grid, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for i in 0..u.len() {
            let idx = grid.unravel(i);
            let mut acc = 0.0;
            for a in 0..grid.ndim() {
                let n = grid.dims()[a];
                let s = grid.stride(a);
                let h2 = (n * n) as f64;
                let left = if idx[a] == 0 { u[i] } else { u[i - s] };
                let right = if idx[a] == n - 1 { u[i] } else { u[i + s] };
                acc += (2.0 * u[i] - left - right) * h2;
            }
            out[i] = acc;
        }
        out
    }

    fn cosine_mode(n: usize) -> (Grid, Vec<f64>) {
        let g = Grid::new(&[n]).unwrap();
        let v = (0..n)
            .map(|j| (std::f64::consts::PI * g.coord(0, j)).cos())
            .collect();
        (g, v)
    }

    #[test]
    fn eigenvalues_increase_from_zero() {
        let ev = stencil_eigenvalues(16);
        assert_eq!(ev[0], 0.0);
        assert!(ev.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn constant_rhs_gives_zero() {
        let g = Grid::cube(2, 8).unwrap();
        let plan = SpectralPlan::new(g);
        let u = plan.solve_neumann(&vec![3.0; 64]).unwrap();
        assert!(u.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn single_cosine_mode_is_scaled_by_its_eigenvalue() {
        let (g, r) = cosine_mode(64);
        let plan = SpectralPlan::new(g);
        let lambda = (2.0 - 2.0 * (std::f64::consts::PI / 64.0).cos()) * 64.0 * 64.0;
        let u = plan.solve_neumann(&r).unwrap();
        for (a, b) in u.values().iter().zip(&r) {
            assert!((a - b / lambda).abs() < 1e-14);
        }
        let hm1 = plan.hm1dot_norm_sq(&r).unwrap();
        assert!((hm1 - 0.5 / lambda).abs() < 1e-15);
        // √2 cos(πx)/√λ has unit Ḣ¹ norm
        let f: Vec<f64> = r.iter().map(|v| v * 2f64.sqrt() / lambda.sqrt()).collect();
        let h1 = plan.h1dot_norm_sq(&Potential::new(g, f).unwrap()).unwrap();
        assert!((h1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stencil_roundtrip_3d() {
        let g = Grid::new(&[6, 5, 8]).unwrap();
        let plan = SpectralPlan::new(g);
        let r: Vec<f64> = (0..g.len()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let u = plan.solve_neumann(&r).unwrap();
        assert!(u.mean().abs() < 1e-13);
        let back = neg_laplacian(&g, u.values());
        let scale = r.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        for (a, b) in back.iter().zip(&r) {
            assert!((a - (b - mean)).abs() <= 1e-10 * scale);
        }
        // ‖u‖²_Ḣ¹ = ⟨u, −Δu⟩
        let h1 = plan.h1dot_norm_sq(&u).unwrap();
        let quad: f64 = u.values().iter().zip(&back).map(|(a, b)| a * b).sum::<f64>()
            * g.cell_volume();
        assert!((h1 - quad).abs() <= 1e-10 * quad.abs());
    }

    #[test]
    fn length_checks() {
        let plan = SpectralPlan::new(Grid::cube(2, 4).unwrap());
        assert!(plan.solve_neumann(&[0.0; 3]).is_err());
        assert!(plan
            .h1dot_norm_sq(&Potential::zeros(Grid::cube(2, 5).unwrap()))
            .is_err());
    }
}
