//! Reference problems with known optimal costs and published iteration
//! counts.

use crate::cost::CostModel;
use crate::error::Result;
use crate::grid::{DensityField, Grid};
use crate::shapes::ShapeUnion;
use crate::solver::Mode;

/// Published iteration count for one (grid, tolerance, mode) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub n: usize,
    pub tolerance: f64,
    pub mode: Mode,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCase {
    pub name: &'static str,
    pub ndim: usize,
    pub mu: &'static str,
    pub nu: &'static str,
    /// `quadratic` or `power:p1,p2[,p3]`.
    pub cost: &'static str,
    /// Optimal transport cost, when known in closed form.
    pub exact: Option<f64>,
    pub expected: &'static [Expected],
}

const fn bfm(n: usize, tolerance: f64, iterations: usize) -> Expected {
    Expected { n, tolerance, mode: Mode::BackAndForth, iterations }
}

const fn ga(n: usize, tolerance: f64, iterations: usize) -> Expected {
    Expected { n, tolerance, mode: Mode::GradientAscent, iterations }
}

pub const TWO_DISCS: BenchmarkCase = BenchmarkCase {
    name: "two-discs",
    ndim: 2,
    mu: "disc:0.25,0.25,0.125",
    nu: "disc:0.75,0.75,0.125",
    cost: "quadratic",
    exact: Some(0.25),
    expected: &[
        bfm(512, 1e-4, 3),
        bfm(512, 1e-8, 5),
        bfm(1024, 1e-4, 3),
        bfm(1024, 1e-5, 5),
        bfm(1024, 1e-6, 5),
        bfm(1024, 1e-8, 5),
        bfm(2048, 1e-4, 3),
        bfm(2048, 1e-8, 5),
        bfm(4096, 1e-4, 3),
        bfm(4096, 1e-8, 5),
        ga(1024, 1e-4, 50),
        ga(1024, 1e-5, 149),
        ga(1024, 1e-6, 321),
    ],
};

pub const TWO_BALLS: BenchmarkCase = BenchmarkCase {
    name: "two-balls",
    ndim: 3,
    mu: "ball:0.25,0.25,0.25,0.125",
    nu: "ball:0.75,0.75,0.75,0.125",
    cost: "quadratic",
    exact: Some(0.375),
    expected: &[
        bfm(128, 1e-4, 6),
        bfm(128, 1e-8, 10),
        bfm(256, 1e-4, 6),
        bfm(256, 1e-8, 9),
        bfm(384, 1e-4, 6),
        bfm(384, 1e-8, 9),
    ],
};

pub const FOUR_SQUARES: BenchmarkCase = BenchmarkCase {
    name: "four-squares",
    ndim: 2,
    mu: "square:0.5,0.5,0.25",
    nu: "square:0.1875,0.1875,0.125+square:0.8125,0.1875,0.125+\
         square:0.1875,0.8125,0.125+square:0.8125,0.8125,0.125",
    cost: "quadratic",
    exact: Some(0.0625),
    expected: &[
        bfm(512, 1e-4, 3),
        bfm(512, 1e-5, 5),
        bfm(512, 1e-6, 13),
        bfm(1024, 1e-4, 3),
        bfm(1024, 1e-5, 5),
        bfm(1024, 1e-6, 14),
        bfm(2048, 1e-4, 3),
        bfm(2048, 1e-5, 5),
        bfm(2048, 1e-6, 14),
        bfm(4096, 1e-4, 3),
        bfm(4096, 1e-5, 5),
        bfm(4096, 1e-6, 13),
        ga(1024, 1e-4, 34),
        ga(1024, 1e-5, 106),
        ga(1024, 1e-6, 744),
    ],
};

pub const EIGHT_CUBES: BenchmarkCase = BenchmarkCase {
    name: "eight-cubes",
    ndim: 3,
    mu: "cube:0.5,0.5,0.5,0.25",
    nu: "cube:0.1875,0.1875,0.1875,0.125+cube:0.8125,0.1875,0.1875,0.125+\
         cube:0.1875,0.8125,0.1875,0.125+cube:0.8125,0.8125,0.1875,0.125+\
         cube:0.1875,0.1875,0.8125,0.125+cube:0.8125,0.1875,0.8125,0.125+\
         cube:0.1875,0.8125,0.8125,0.125+cube:0.8125,0.8125,0.8125,0.125",
    cost: "quadratic",
    exact: Some(0.09375),
    expected: &[
        bfm(128, 1e-3, 3),
        bfm(128, 1e-5, 6),
        bfm(256, 1e-3, 3),
        bfm(256, 1e-5, 8),
        bfm(384, 1e-3, 3),
        bfm(384, 1e-5, 13),
    ],
};

/// Two discs moved vertically under `|Δx|^1.1/1.1 + |Δy|³/3`. No closed-form
/// cost; used as a qualitative check.
pub const POWER_DISC_PAIRS: BenchmarkCase = BenchmarkCase {
    name: "power-disc-pairs",
    ndim: 2,
    mu: "disc:0.25,0.25,0.125+disc:0.75,0.75,0.125",
    nu: "disc:0.25,0.75,0.125+disc:0.75,0.25,0.125",
    cost: "power:1.1,3",
    exact: None,
    expected: &[],
};

pub const ALL: [BenchmarkCase; 5] = [TWO_DISCS, TWO_BALLS, FOUR_SQUARES, EIGHT_CUBES, POWER_DISC_PAIRS];

pub fn by_name(name: &str) -> Option<BenchmarkCase> {
    ALL.iter().find(|c| c.name == name).cloned()
}

impl BenchmarkCase {
    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::cube(self.ndim, n)
    }

    pub fn model(&self) -> Result<CostModel> {
        CostModel::parse(self.cost, self.ndim)
    }

    pub fn densities(&self, n: usize) -> Result<(DensityField, DensityField)> {
        let grid = self.grid(n)?;
        let mu: ShapeUnion = self.mu.parse()?;
        let nu: ShapeUnion = self.nu.parse()?;
        Ok((mu.density(grid)?, nu.density(grid)?))
    }

    /// Published count for `(n, tolerance, mode)`, if any.
    pub fn expected_iterations(&self, n: usize, tolerance: f64, mode: Mode) -> Option<usize> {
        self.expected
            .iter()
            .find(|e| e.n == n && e.mode == mode && (e.tolerance / tolerance - 1.0).abs() < 1e-9)
            .map(|e| e.iterations)
    }
}
