//! JSON documents written by the commands. Field names are part of the
//! interface; bump `SCHEMA` when they change.

use bfm_core::{IterationRecord, SolveReport};
use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Serialize)]
pub struct StopSummary {
    /// `residual` or `known_value`.
    pub rule: &'static str,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub dual_value: f64,
    pub residual: f64,
    pub sigma_phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_psi: Option<f64>,
}

impl From<&IterationRecord> for IterationSummary {
    fn from(r: &IterationRecord) -> Self {
        IterationSummary {
            iteration: r.iteration,
            dual_value: r.j_end,
            residual: r.residual,
            sigma_phi: r.sigma_phi,
            sigma_psi: r.sigma_psi,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub schema: u32,
    pub mu: String,
    pub nu: String,
    pub grid: Vec<usize>,
    pub cost: String,
    pub mode: &'static str,
    pub stop: StopSummary,
    pub threads: usize,
    pub termination: &'static str,
    pub iterations: usize,
    pub dual_value: f64,
    pub primal_cost: f64,
    pub residual: f64,
    pub wall_time_seconds: f64,
    pub sigma_trace: Vec<f64>,
    pub trace: Vec<IterationSummary>,
}

impl SolveSummary {
    pub fn new(mu: String, nu: String, cost: String, stop: StopSummary, mode: &'static str, report: &SolveReport) -> Self {
        SolveSummary {
            schema: SCHEMA,
            mu,
            nu,
            grid: report.phi.grid().dims().to_vec(),
            cost,
            mode,
            stop,
            threads: bfm_core::par::lanes(),
            termination: report.termination.as_str(),
            iterations: report.iterations,
            dual_value: report.dual_value,
            primal_cost: report.primal_cost,
            residual: report.residual,
            wall_time_seconds: report.wall_time.as_secs_f64(),
            sigma_trace: report.sigma_history.clone(),
            trace: report.trace.iter().map(IterationSummary::from).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FrameEntry {
    pub index: usize,
    pub t: f64,
    pub file: String,
    pub mass: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub grid: Vec<usize>,
    pub frames: Vec<FrameEntry>,
    /// Largest |mass − 1| over the frames.
    pub max_mass_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
}
