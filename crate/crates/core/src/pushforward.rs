//! Transport maps built from dual potentials, pushforward of densities by
//! mass splatting, and the dual and primal objective values.

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::grid::{self, gradient, DensityField, Grid, Potential, VectorField, MAX_DIM};
use crate::par;
use crate::transform::{ctransform, ctransform_with_argmin};

/// Which density a map transports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Pushes μ towards ν (built from φ).
    Mu,
    /// Pushes ν towards μ (built from ψ).
    Nu,
}

/// A map `T(x) = x + displacement(x)` sampled at the grid nodes. Every
/// target lies in the closed unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    displacement: VectorField,
    source: Side,
}

impl TransportMap {
    pub fn identity(grid: Grid, source: Side) -> Self {
        Self {
            displacement: VectorField::zeros(grid),
            source,
        }
    }

    /// Takes a displacement field, clamping targets into the unit cube.
    pub fn from_displacement(mut displacement: VectorField, source: Side) -> Self {
        let grid = *displacement.grid();
        for (axis, comp) in displacement.components_mut().iter_mut().enumerate() {
            par::update_indexed(comp, |i, d| clamp_displacement(&grid, axis, i, d));
        }
        Self {
            displacement,
            source,
        }
    }

    /// `T(x) = x − (∇h)⁻¹(∇u(x))` where `u` is the c-transform of the
    /// potential defining the map (φ^c for the μ side).
    pub fn from_transformed(model: &CostModel, transformed: &Potential, source: Side) -> Result<Self> {
        if model.ndim() != transformed.grid().ndim() {
            return Err(Error::GridMismatch);
        }
        let grid = *transformed.grid();
        let mut disp = gradient(transformed);
        for (axis, comp) in disp.components_mut().iter_mut().enumerate() {
            par::update_indexed(comp, |i, g| {
                let d = -model.axis_inverse_gradient(axis, g);
                clamp_displacement(&grid, axis, i, d)
            });
        }
        Ok(Self {
            displacement: disp,
            source,
        })
    }

    /// Node-quantised map sending each node to its c-transform minimiser.
    pub fn from_minimisers(grid: Grid, argmin: &[usize], source: Side) -> Result<Self> {
        if argmin.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: argmin.len(),
            });
        }
        let components = (0..grid.ndim())
            .map(|axis| {
                let mut c = vec![0.0; grid.len()];
                par::fill_indexed(&mut c, |i| {
                    let from = grid.unravel(i)[axis] as isize;
                    let to = grid.unravel(argmin[i])[axis] as isize;
                    grid.offset(axis, to - from)
                });
                c
            })
            .collect();
        Ok(Self {
            displacement: VectorField::new(grid, components)?,
            source,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.displacement.grid()
    }

    pub fn source(&self) -> Side {
        self.source
    }

    pub fn displacement(&self) -> &VectorField {
        &self.displacement
    }

    /// `T(x)` at flat index `i`.
    pub fn target(&self, i: usize) -> [f64; MAX_DIM] {
        let g = self.grid();
        let p = g.point(i);
        let d = self.displacement.at(i);
        let mut t = [0.0; MAX_DIM];
        for a in 0..g.ndim() {
            t[a] = p[a] + d[a];
        }
        t
    }
}

#[inline]
fn clamp_displacement(grid: &Grid, axis: usize, i: usize, d: f64) -> f64 {
    let x = grid.coord(axis, grid.unravel(i)[axis]);
    if d.is_nan() {
        return 0.0;
    }
    d.clamp(-x, 1.0 - x)
}

/// Builds `T_φ` from a potential on the ν side, computing φ^c on the way.
pub fn build_map(model: &CostModel, phi: &Potential) -> Result<TransportMap> {
    let phi_c = ctransform(model, phi)?;
    TransportMap::from_transformed(model, &phi_c, Side::Mu)
}

/// Node-quantised counterpart of [`build_map`] from the transform's
/// minimisers, used to cross-check the finite-difference map.
pub fn build_argmin_map(model: &CostModel, phi: &Potential) -> Result<TransportMap> {
    let (_, argmin) = ctransform_with_argmin(model, phi)?;
    TransportMap::from_minimisers(*phi.grid(), &argmin, Side::Mu)
}

/// `T_# ρ`: each node's mass is deposited on the grid nodes around `T(x)`
/// with multilinear weights. Targets beyond the outermost nodes go to the
/// boundary node. Total mass is conserved.
pub fn pushforward_density(map: &TransportMap, density: &DensityField) -> Result<DensityField> {
    if map.grid() != density.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(DensityField::from_raw_parts(
        *density.grid(),
        splat(map.displacement(), density.values(), 1.0),
    ))
}

/// Deposits `values` along `x + t·displacement(x)`. Cells all have the same
/// volume, so splatting density values conserves mass.
pub(crate) fn splat(disp: &VectorField, values: &[f64], t: f64) -> Vec<f64> {
    let grid = *disp.grid();
    let ndim = grid.ndim();
    let dims = grid.dims();
    let strides: Vec<usize> = (0..ndim).map(|a| grid.stride(a)).collect();
    par::accumulate(values.len(), values.len(), |range, out| {
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for i in range {
            let m = values[i];
            if m == 0.0 {
                continue;
            }
            let idx = grid.unravel(i);
            for a in 0..ndim {
                let n = dims[a];
                let u = (idx[a] as f64 + t * disp.component(a)[i] * n as f64)
                    .clamp(0.0, (n - 1) as f64);
                let b = (u.floor() as usize).min(n - 2);
                base[a] = b;
                frac[a] = u - b as f64;
            }
            for corner in 0..(1usize << ndim) {
                let mut w = m;
                let mut j = 0;
                for a in 0..ndim {
                    let hi = (corner >> a) & 1;
                    w *= if hi == 1 { frac[a] } else { 1.0 - frac[a] };
                    j += (base[a] + hi) * strides[a];
                }
                out[j] += w;
            }
        }
    })
}

fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `J(φ) = ∫ φ dν + ∫ φ^c dμ`.
pub fn dual_value_j(
    model: &CostModel,
    phi: &Potential,
    mu: &DensityField,
    nu: &DensityField,
) -> Result<f64> {
    same_grid(mu.grid(), nu.grid())?;
    let phi_c = ctransform(model, phi)?;
    Ok(grid::integrate(phi, nu)? + grid::integrate(&phi_c, mu)?)
}

/// `I(ψ) = ∫ ψ^c dν + ∫ ψ dμ`.
pub fn dual_value_i(
    model: &CostModel,
    psi: &Potential,
    mu: &DensityField,
    nu: &DensityField,
) -> Result<f64> {
    same_grid(mu.grid(), nu.grid())?;
    let psi_c = ctransform(model, psi)?;
    Ok(grid::integrate(&psi_c, nu)? + grid::integrate(psi, mu)?)
}

/// Monge cost `∫ c(x, T(x)) dρ(x)` of moving `density` along `map`.
pub fn primal_cost(model: &CostModel, map: &TransportMap, density: &DensityField) -> Result<f64> {
    same_grid(map.grid(), density.grid())?;
    if model.ndim() != map.grid().ndim() {
        return Err(Error::GridMismatch);
    }
    let disp = map.displacement();
    let rho = density.values();
    let ndim = model.ndim();
    let total = par::sum(rho.len(), |i| {
        if rho[i] == 0.0 {
            return 0.0;
        }
        let c: f64 = (0..ndim)
            .map(|a| model.axis_cost(a, disp.component(a)[i]))
            .sum();
        c * rho[i]
    });
    Ok(total * density.grid().cell_volume())
}
