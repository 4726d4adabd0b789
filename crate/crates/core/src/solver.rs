//! Back-and-forth dual ascent.
//!
//! Each iteration takes an Ḣ¹ gradient step on `J` in φ-space, hops to
//! ψ-space with a c-transform, takes an Ḣ¹ gradient step on `I`, and hops
//! back. The step size follows an Armijo–Goldstein window without
//! backtracking. A single-space gradient ascent on `J` (with a double
//! c-transform after each step) is available as a baseline.

use std::time::{Duration, Instant};

use log::{debug, warn};

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::grid::{dot, DensityField, Potential};
use crate::poisson::SpectralPlan;
use crate::pushforward::{self, Side, TransportMap};
use crate::transform::ctransform;

/// Slack allowed on the c-transform half-step inequalities.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    BackAndForth,
    /// Ḣ¹ ascent on `J` only, `φ ← (φ + σ∇J)^{cc}`.
    GradientAscent,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bfm" | "back-and-forth" => Ok(Mode::BackAndForth),
            "gradient-ascent" | "ga" => Ok(Mode::GradientAscent),
            _ => Err(Error::InvalidConfig(format!("unknown mode '{s}'"))),
        }
    }
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::BackAndForth => "bfm",
            Mode::GradientAscent => "gradient-ascent",
        }
    }
}

/// When to stop iterating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// `‖T_{φ#}μ − ν‖_Ḣ⁻¹ ≤ tol`.
    Residual(f64),
    /// `|J(φ) − exact| < tol`, for problems with a known optimal cost.
    KnownValue { exact: f64, tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub beta1: f64,
    pub beta2: f64,
    /// Step growth factor.
    pub alpha1: f64,
    /// Step shrink factor.
    pub alpha2: f64,
    pub sigma_min: f64,
    /// Initial step; `None` uses `8 min(1/‖μ‖∞, 1/‖ν‖∞)`.
    pub sigma_init: Option<f64>,
    pub max_iterations: usize,
    pub stop: StopRule,
    /// Stop once `|ΔJ|` stays below `stall_tolerance` for `stall_window`
    /// consecutive iterations.
    pub stall_tolerance: f64,
    pub stall_window: usize,
    pub mode: Mode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta1: 0.25,
            beta2: 0.75,
            alpha1: 1.25,
            alpha2: 0.8,
            sigma_min: 0.01,
            sigma_init: None,
            max_iterations: 200,
            stop: StopRule::Residual(1e-4),
            stall_tolerance: 1e-12,
            stall_window: 10,
            mode: Mode::BackAndForth,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.beta1
            && self.beta1 < self.beta2
            && self.beta2 < 1.0
            && self.alpha1 > 1.0
            && 0.0 < self.alpha2
            && self.alpha2 < 1.0
            && self.sigma_min > 0.0
            && self.sigma_init.is_none_or(|s| s > 0.0 && s.is_finite());
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "invalid step-size parameters {self:?}"
            )));
        }
        Ok(())
    }
}

/// Armijo–Goldstein step control. An increase below `β₁σ‖g‖²` shrinks the
/// step by `α₂`, one above `β₂σ‖g‖²` grows it by `α₁`; the result never
/// drops below `σ_min`.
pub fn update_sigma(sigma: f64, increase: f64, grad_norm_sq: f64, config: &SolverConfig) -> f64 {
    let expected = sigma * grad_norm_sq;
    let next = if increase < config.beta1 * expected {
        sigma * config.alpha2
    } else if increase > config.beta2 * expected {
        sigma * config.alpha1
    } else {
        sigma
    };
    next.max(config.sigma_min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ToleranceMet,
    DualStalled,
    MaxIterations,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ToleranceMet => "tolerance_met",
            Termination::DualStalled => "dual_stalled",
            Termination::MaxIterations => "max_iterations",
        }
    }
}

/// Diagnostics of one iteration `n → n+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Step used for the φ half-step.
    pub sigma_phi: f64,
    /// Step used for the ψ half-step (back-and-forth only).
    pub sigma_psi: Option<f64>,
    /// `J(φ_n)`.
    pub j_start: f64,
    /// `J(φ_{n+½})`.
    pub j_half: f64,
    /// `I(ψ_{n+½})`.
    pub i_half: Option<f64>,
    /// `I(ψ_{n+1})`.
    pub i_end: Option<f64>,
    /// `J(φ_{n+1})`.
    pub j_end: f64,
    /// `‖T_{φ_n#}μ − ν‖_Ḣ⁻¹`.
    pub residual: f64,
    /// `‖T_{ψ_{n+½}#}ν − μ‖_Ḣ⁻¹`.
    pub residual_psi: Option<f64>,
    /// Largest |mean| of the Ḣ¹ gradients used this iteration.
    pub gradient_mean: f64,
}

impl IterationRecord {
    /// Dual increases produced by the gradient half-steps.
    pub fn gradient_increases(&self) -> Vec<f64> {
        let mut v = vec![self.j_half - self.j_start];
        if let (Some(ih), Some(ie)) = (self.i_half, self.i_end) {
            v.push(ie - ih);
        }
        v
    }

    /// The c-transform hops never decrease the dual value.
    pub fn transform_steps_monotone(&self, slack: f64) -> bool {
        match (self.i_half, self.i_end) {
            (Some(ih), Some(ie)) => ih >= self.j_half - slack && self.j_end >= ie - slack,
            _ => self.j_end >= self.j_half - slack,
        }
    }
}

/// Iterates and diagnostics. After every completed iteration
/// `phi == ctransform(psi)`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub phi: Potential,
    pub psi: Potential,
    pub sigma: f64,
    pub iteration: usize,
    pub trace: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub dual_value: f64,
    pub primal_cost: f64,
    pub iterations: usize,
    pub wall_time: Duration,
    pub residual: f64,
    pub termination: Termination,
    pub trace: Vec<IterationRecord>,
    pub sigma_history: Vec<f64>,
    pub phi: Potential,
    pub psi: Potential,
    pub map: TransportMap,
}

/// Gradient data of one dual functional at one iterate.
#[derive(Debug, Clone)]
struct Ascent {
    transformed: Potential,
    value: f64,
    grad: Potential,
    grad_norm_sq: f64,
}

pub struct Solver<'a> {
    model: &'a CostModel,
    mu: &'a DensityField,
    nu: &'a DensityField,
    config: SolverConfig,
    plan: SpectralPlan,
    state: SolverState,
    pending: Option<Ascent>,
    /// The residual-growth warning is issued once per run.
    warned_residual: bool,
}

fn validate_density(name: &str, d: &DensityField) -> Result<()> {
    let v = d.values();
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InfeasibleInput(format!(
            "{name} has negative or non-finite values"
        )));
    }
    let mass = d.mass();
    if (mass - 1.0).abs() > crate::grid::MASS_TOLERANCE {
        return Err(Error::InfeasibleInput(format!("{name} has mass {mass}")));
    }
    Ok(())
}

impl<'a> Solver<'a> {
    pub fn new(
        model: &'a CostModel,
        mu: &'a DensityField,
        nu: &'a DensityField,
        config: SolverConfig,
    ) -> Result<Self> {
        if mu.grid() != nu.grid() || model.ndim() != mu.grid().ndim() {
            return Err(Error::GridMismatch);
        }
        config.validate()?;
        validate_density("mu", mu)?;
        validate_density("nu", nu)?;
        let grid = *mu.grid();
        let sigma = config
            .sigma_init
            .unwrap_or_else(|| 8.0 * (1.0 / mu.max_value()).min(1.0 / nu.max_value()));
        Ok(Self {
            model,
            mu,
            nu,
            plan: SpectralPlan::new(grid),
            config,
            state: SolverState {
                phi: Potential::zeros(grid),
                psi: Potential::zeros(grid),
                sigma,
                iteration: 0,
                trace: Vec::new(),
            },
            pending: None,
            warned_residual: false,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Value, gradient and pushforward residual of `J` at `φ = potential`
    /// (`side = Mu`) or of `I` at `ψ = potential` (`side = Nu`).
    fn ascent(&self, potential: &Potential, transformed: Potential, side: Side) -> Result<Ascent> {
        let (source, target) = match side {
            Side::Mu => (self.mu, self.nu),
            Side::Nu => (self.nu, self.mu),
        };
        let vol = source.grid().cell_volume();
        let value = (dot(potential.values(), target.values())
            + dot(transformed.values(), source.values()))
            * vol;
        if !value.is_finite() {
            return Err(Error::NumericalBlowup(format!(
                "dual value {value} at iteration {}",
                self.state.iteration
            )));
        }
        let map = TransportMap::from_transformed(self.model, &transformed, side)?;
        let pushed = pushforward::pushforward_density(&map, source)?;
        let rhs: Vec<f64> = target
            .values()
            .iter()
            .zip(pushed.values())
            .map(|(t, p)| t - p)
            .collect();
        let grad = self.plan.solve_neumann(&rhs)?;
        let grad_norm_sq = (dot(grad.values(), &rhs) * vol).max(0.0);
        Ok(Ascent {
            transformed,
            value,
            grad,
            grad_norm_sq,
        })
    }

    fn current(&mut self) -> Result<&Ascent> {
        if self.pending.is_none() {
            let phi_c = ctransform(self.model, &self.state.phi)?;
            let a = self.ascent(&self.state.phi, phi_c, Side::Mu)?;
            self.pending = Some(a);
        }
        Ok(self.pending.as_ref().expect("pending ascent data"))
    }

    /// `J(φ_n)` at the current iterate.
    pub fn dual_value(&mut self) -> Result<f64> {
        Ok(self.current()?.value)
    }

    /// `‖T_{φ_n#}μ − ν‖_Ḣ⁻¹` at the current iterate.
    pub fn residual(&mut self) -> Result<f64> {
        Ok(self.current()?.grad_norm_sq.sqrt())
    }

    /// Transport map `T_{φ_n}` at the current iterate.
    pub fn map(&mut self) -> Result<TransportMap> {
        let model = self.model;
        let a = self.current()?;
        TransportMap::from_transformed(model, &a.transformed, Side::Mu)
    }

    /// One full iteration in the configured mode.
    pub fn step(&mut self) -> Result<&IterationRecord> {
        self.current()?;
        let start = self.pending.take().expect("pending ascent data");
        let record = match self.config.mode {
            Mode::BackAndForth => self.back_and_forth_step(start)?,
            Mode::GradientAscent => self.gradient_ascent_step(start)?,
        };
        if !record.transform_steps_monotone(MONOTONE_SLACK) {
            warn!(
                "iteration {}: c-transform half-step decreased the dual value ({record:?})",
                record.iteration
            );
        }
        for inc in record.gradient_increases() {
            if inc < 0.0 {
                debug!("iteration {}: gradient half-step decreased the dual by {}", record.iteration, -inc);
            }
        }
        self.state.iteration += 1;
        self.state.trace.push(record);
        self.check_residual_trend();
        Ok(self.state.trace.last().expect("record just pushed"))
    }

    fn back_and_forth_step(&mut self, start: Ascent) -> Result<IterationRecord> {
        let model = self.model;
        let vol = self.mu.grid().cell_volume();

        let sigma_phi = self.state.sigma;
        let mut phi_half = self.state.phi.clone();
        phi_half.add_scaled(sigma_phi, &start.grad)?;
        let psi_half = ctransform(model, &phi_half)?;
        let j_half = (dot(phi_half.values(), self.nu.values())
            + dot(psi_half.values(), self.mu.values()))
            * vol;
        self.state.sigma = update_sigma(sigma_phi, j_half - start.value, start.grad_norm_sq, &self.config);

        let psi_half_c = ctransform(model, &psi_half)?;
        let back = self.ascent(&psi_half, psi_half_c, Side::Nu)?;
        let sigma_psi = self.state.sigma;
        let mut psi_new = psi_half;
        psi_new.add_scaled(sigma_psi, &back.grad)?;
        let phi_new = ctransform(model, &psi_new)?;
        let i_end = (dot(phi_new.values(), self.nu.values())
            + dot(psi_new.values(), self.mu.values()))
            * vol;
        if !(i_end.is_finite() && j_half.is_finite()) {
            return Err(Error::NumericalBlowup(format!(
                "dual value at iteration {}",
                self.state.iteration
            )));
        }
        self.state.sigma = update_sigma(sigma_psi, i_end - back.value, back.grad_norm_sq, &self.config);

        let phi_new_c = ctransform(model, &phi_new)?;
        let next = self.ascent(&phi_new, phi_new_c, Side::Mu)?;
        let record = IterationRecord {
            iteration: self.state.iteration,
            sigma_phi,
            sigma_psi: Some(sigma_psi),
            j_start: start.value,
            j_half,
            i_half: Some(back.value),
            i_end: Some(i_end),
            j_end: next.value,
            residual: start.grad_norm_sq.sqrt(),
            residual_psi: Some(back.grad_norm_sq.sqrt()),
            gradient_mean: start.grad.mean().abs().max(back.grad.mean().abs()),
        };
        self.state.phi = phi_new;
        self.state.psi = psi_new;
        self.pending = Some(next);
        Ok(record)
    }

    fn gradient_ascent_step(&mut self, start: Ascent) -> Result<IterationRecord> {
        let model = self.model;
        let vol = self.mu.grid().cell_volume();

        let sigma_phi = self.state.sigma;
        let mut phi_half = self.state.phi.clone();
        phi_half.add_scaled(sigma_phi, &start.grad)?;
        let phi_half_c = ctransform(model, &phi_half)?;
        let j_half = (dot(phi_half.values(), self.nu.values())
            + dot(phi_half_c.values(), self.mu.values()))
            * vol;
        if !j_half.is_finite() {
            return Err(Error::NumericalBlowup(format!(
                "dual value at iteration {}",
                self.state.iteration
            )));
        }
        self.state.sigma = update_sigma(sigma_phi, j_half - start.value, start.grad_norm_sq, &self.config);

        // (φ^{cc})^c = φ^c, so the transform of the new iterate is already known.
        let phi_new = ctransform(model, &phi_half_c)?;
        let next = self.ascent(&phi_new, phi_half_c.clone(), Side::Mu)?;
        let record = IterationRecord {
            iteration: self.state.iteration,
            sigma_phi,
            sigma_psi: None,
            j_start: start.value,
            j_half,
            i_half: None,
            i_end: None,
            j_end: next.value,
            residual: start.grad_norm_sq.sqrt(),
            residual_psi: None,
            gradient_mean: start.grad.mean().abs(),
        };
        self.state.phi = phi_new;
        self.state.psi = phi_half_c;
        self.pending = Some(next);
        Ok(record)
    }

    fn check_residual_trend(&mut self) {
        let t = &self.state.trace;
        if t.len() > 5 {
            let (old, new) = (&t[t.len() - 6], &t[t.len() - 1]);
            if new.residual > old.residual {
                let msg = format!(
                    "Ḣ⁻¹ residual grew over 5 iterations: {} -> {} at iteration {}",
                    old.residual, new.residual, new.iteration
                );
                if self.warned_residual {
                    debug!("{msg}");
                } else {
                    warn!("{msg} (likely the grid's resolution floor)");
                    self.warned_residual = true;
                }
            }
        }
    }

    fn stalled(&self) -> bool {
        let w = self.config.stall_window;
        let t = &self.state.trace;
        w > 0
            && t.len() >= w
            && t[t.len() - w..]
                .iter()
                .all(|r| (r.j_end - r.j_start).abs() < self.config.stall_tolerance)
    }

    /// Checks the stopping rule at the current iterate.
    pub fn converged(&mut self) -> Result<bool> {
        let stop = self.config.stop;
        let a = self.current()?;
        Ok(match stop {
            StopRule::Residual(tol) => a.grad_norm_sq.sqrt() <= tol,
            StopRule::KnownValue { exact, tolerance } => (a.value - exact).abs() < tolerance,
        })
    }

    /// Iterates until the stopping rule, a stall, or the iteration cap.
    pub fn run(mut self) -> Result<SolveReport> {
        let clock = Instant::now();
        let termination = loop {
            if self.converged()? {
                break Termination::ToleranceMet;
            }
            if self.stalled() {
                break Termination::DualStalled;
            }
            if self.state.iteration >= self.config.max_iterations {
                break Termination::MaxIterations;
            }
            self.step()?;
        };
        let map = self.map()?;
        let primal_cost = pushforward::primal_cost(self.model, &map, self.mu)?;
        let pending = self.pending.take().expect("pending ascent data");
        let mut sigma_history: Vec<f64> = Vec::with_capacity(2 * self.state.trace.len());
        for r in &self.state.trace {
            sigma_history.push(r.sigma_phi);
            sigma_history.extend(r.sigma_psi);
        }
        Ok(SolveReport {
            dual_value: pending.value,
            primal_cost,
            iterations: self.state.iteration,
            wall_time: clock.elapsed(),
            residual: pending.grad_norm_sq.sqrt(),
            termination,
            trace: self.state.trace,
            sigma_history,
            phi: self.state.phi,
            psi: self.state.psi,
            map,
        })
    }
}

/// Solves the transport problem from `mu` to `nu`.
pub fn solve(
    model: &CostModel,
    mu: &DensityField,
    nu: &DensityField,
    config: SolverConfig,
) -> Result<SolveReport> {
    Solver::new(model, mu, nu, config)?.run()
}
