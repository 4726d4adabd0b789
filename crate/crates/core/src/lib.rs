//! Optimal transport on regular grids by back-and-forth dual ascent.
//!
//! Densities live on a cell-centred grid over the unit square or cube.
//! The solver alternates Ḣ¹ gradient steps on the two dual functionals,
//! linked by exact discrete c-transforms, and returns the potentials, the
//! transport map and the optimal cost.

pub mod cases;
pub mod cost;
pub mod error;
pub mod grid;
pub mod interpolation;
pub mod par;
pub mod poisson;
pub mod pushforward;
pub mod shapes;
pub mod solver;
pub mod transform;

pub use cost::CostModel;
pub use error::{Error, Result};
pub use grid::{integrate, normalize, DensityField, Grid, Potential, VectorField};
pub use interpolation::{displacement_interpolant, frame_sequence};
pub use poisson::SpectralPlan;
pub use pushforward::{build_map, pushforward_density, Side, TransportMap};
pub use solver::{
    solve, IterationRecord, Mode, SolveReport, Solver, SolverConfig, StopRule, Termination,
};
pub use transform::{ctransform, ctransform_with_argmin, double_ctransform};
