//! Separable power costs `c(x, y) = Σᵢ |yᵢ − xᵢ|^pᵢ / pᵢ`.

use crate::error::{Error, Result};

/// Per-axis exponents of a separable, strictly convex power cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    exponents: Vec<f64>,
    quadratic: bool,
}

impl CostModel {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() || exponents.len() > crate::grid::MAX_DIM {
            return Err(Error::InvalidCost(format!(
                "expected 1 to 3 exponents, got {}",
                exponents.len()
            )));
        }
        if let Some(p) = exponents.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return Err(Error::InvalidCost(format!(
                "exponent {p} is not > 1 (strict convexity)"
            )));
        }
        let quadratic = exponents.iter().all(|&p| p == 2.0);
        Ok(Self {
            exponents,
            quadratic,
        })
    }

    /// `½|y − x|²` in `ndim` dimensions.
    pub fn quadratic(ndim: usize) -> Self {
        Self {
            exponents: vec![2.0; ndim],
            quadratic: true,
        }
    }

    /// Parses `quadratic`, `power:p` (same exponent on every axis) or
    /// `power:p1,p2[,p3]`.
    pub fn parse(spec: &str, ndim: usize) -> Result<Self> {
        let spec = spec.trim();
        if spec == "quadratic" {
            return Ok(Self::quadratic(ndim));
        }
        let list = spec.strip_prefix("power:").ok_or_else(|| {
            Error::InvalidCost(format!(
                "unknown cost '{spec}', expected 'quadratic' or 'power:p1,p2[,p3]'"
            ))
        })?;
        let exps = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidCost(format!("bad exponent '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let exps = match exps.len() {
            1 => vec![exps[0]; ndim],
            k if k == ndim => exps,
            k => {
                return Err(Error::InvalidCost(format!(
                    "{k} exponents given for a {ndim}-dimensional grid"
                )))
            }
        };
        Self::new(exps)
    }

    pub fn ndim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// True iff every exponent is 2.
    pub fn is_quadratic(&self) -> bool {
        self.quadratic
    }

    /// `hᵢ(s) = |s|^pᵢ / pᵢ`.
    #[inline]
    pub fn axis_cost(&self, axis: usize, s: f64) -> f64 {
        let p = self.exponents[axis];
        if p == 2.0 {
            0.5 * s * s
        } else {
            s.abs().powf(p) / p
        }
    }

    /// `hᵢ'(s) = sign(s)|s|^(pᵢ−1)`.
    #[inline]
    pub fn axis_gradient(&self, axis: usize, s: f64) -> f64 {
        let p = self.exponents[axis];
        if p == 2.0 {
            s
        } else {
            s.signum() * s.abs().powf(p - 1.0)
        }
    }

    /// `(hᵢ')⁻¹(v) = sign(v)|v|^(1/(pᵢ−1))`.
    #[inline]
    pub fn axis_inverse_gradient(&self, axis: usize, v: f64) -> f64 {
        let p = self.exponents[axis];
        if p == 2.0 {
            v
        } else if v == 0.0 {
            0.0
        } else {
            v.signum() * v.abs().powf(1.0 / (p - 1.0))
        }
    }

    /// `c(x, y) = h(y − x)`.
    pub fn cost(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.ndim());
        x.iter()
            .zip(y)
            .enumerate()
            .map(|(a, (xi, yi))| self.axis_cost(a, yi - xi))
            .sum()
    }

    /// `∇h(s)`.
    pub fn gradient(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .enumerate()
            .map(|(a, &si)| self.axis_gradient(a, si))
            .collect()
    }

    /// `(∇h)⁻¹(v)`, componentwise because the cost is separable.
    pub fn inverse_gradient(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(a, &vi)| self.axis_inverse_gradient(a, vi))
            .collect()
    }

    /// Table of `hᵢ(d / n)` for `d = 0..n`, the cost between two nodes `d`
    /// apart on an axis with `n` points.
    pub fn axis_table(&self, axis: usize, n: usize) -> Vec<f64> {
        (0..n)
            .map(|d| self.axis_cost(axis, d as f64 / n as f64))
            .collect()
    }
}

impl std::fmt::Display for CostModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.quadratic {
            return write!(f, "quadratic");
        }
        let parts: Vec<String> = self.exponents.iter().map(|p| p.to_string()).collect();
        write!(f, "power:{}", parts.join(","))
    }
}
