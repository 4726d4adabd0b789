//! The three subcommands. Each returns the process exit code.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use bfm_core::cases::{self, BenchmarkCase};
use bfm_core::interpolation::frame_time;
use bfm_core::{
    frame_sequence, solve, CostModel, DensityField, Mode, Side, SolveReport, SolverConfig, StopRule, Termination,
    TransportMap, VectorField,
};
use log::{info, warn};

use crate::args::{BenchmarkArgs, Inputs, InterpolateArgs, SolveArgs, SolverArgs};
use crate::density::{resolve_on, resolve_pair, DensitySpec};
use crate::error::{CliError, Result};
use crate::report::{FrameEntry, Manifest, SolveSummary, StopSummary, SCHEMA};
use crate::{dump, pgm};

pub const EXIT_OK: u8 = 0;
pub const EXIT_BENCHMARK_FAILED: u8 = 1;
pub const EXIT_MAX_ITERATIONS: u8 = 4;

/// Global rayon pool size; `BFM_OT_THREADS` wins over the flag.
pub fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match std::env::var("BFM_OT_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("BFM_OT_THREADS='{v}' is not a thread count")))?,
        ),
        Err(_) => flag,
    };
    let Some(threads) = threads.filter(|&t| t > 0) else {
        return Ok(());
    };
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    if threads > 1 {
        warn!("built without the parallel feature, ignoring {threads} threads");
    }
    Ok(())
}

fn termination_code(t: Termination) -> u8 {
    match t {
        Termination::ToleranceMet | Termination::DualStalled => EXIT_OK,
        Termination::MaxIterations => EXIT_MAX_ITERATIONS,
    }
}

struct Problem {
    mu_desc: String,
    nu_desc: String,
    mu: DensityField,
    nu: DensityField,
    cost_desc: String,
    model: CostModel,
    exact: Option<f64>,
}

fn spec_from(path_or_builtin: &Option<String>, shapes: &Option<String>, flag: &str) -> Result<DensitySpec> {
    match (path_or_builtin, shapes) {
        (Some(s), _) => s.parse(),
        (None, Some(s)) => format!("builtin:{s}").parse(),
        (None, None) => Err(CliError::Usage(format!("need --{flag} or --builtin-{flag} (or --case)"))),
    }
}

fn case_by_name(name: &str) -> Result<BenchmarkCase> {
    cases::by_name(name).ok_or_else(|| {
        let names: Vec<&str> = cases::ALL.iter().map(|c| c.name).collect();
        CliError::Usage(format!("unknown case '{name}', expected one of {}", names.join(", ")))
    })
}

fn check_grid_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(CliError::Usage(format!("--n {n}: need at least 2 cells per axis")));
    }
    Ok(())
}

fn problem(inputs: &Inputs, solver: &SolverArgs) -> Result<Problem> {
    check_grid_size(inputs.n)?;
    if let Some(name) = &inputs.case {
        let case = case_by_name(name)?;
        let (mu, nu) = case.densities(inputs.n)?;
        // the tabulated cost only holds for the case's own cost function
        let (cost_desc, exact) = match &solver.cost {
            Some(c) if c != case.cost => (c.clone(), solver.exact),
            _ => (case.cost.to_string(), solver.exact.or(case.exact)),
        };
        let model = CostModel::parse(&cost_desc, case.ndim)?;
        return Ok(Problem {
            mu_desc: format!("builtin:{}", case.mu),
            nu_desc: format!("builtin:{}", case.nu),
            mu,
            nu,
            cost_desc,
            model,
            exact,
        });
    }
    let mu_spec = spec_from(&inputs.mu, &inputs.builtin_mu, "mu")?;
    let nu_spec = spec_from(&inputs.nu, &inputs.builtin_nu, "nu")?;
    let (mu, nu) = resolve_pair(&mu_spec, &nu_spec, inputs.n, inputs.invert)?;
    let cost_desc = solver.cost.clone().unwrap_or_else(|| "quadratic".into());
    let model = CostModel::parse(&cost_desc, mu.grid().ndim())?;
    Ok(Problem {
        mu_desc: mu_spec.to_string(),
        nu_desc: nu_spec.to_string(),
        mu,
        nu,
        cost_desc,
        model,
        exact: solver.exact,
    })
}

fn config(solver: &SolverArgs, exact: Option<f64>) -> Result<(SolverConfig, StopSummary)> {
    if !(solver.tol.is_finite() && solver.tol >= 0.0) {
        return Err(CliError::Usage(format!("--tol {} must be a non-negative number", solver.tol)));
    }
    let (stop, summary) = match exact {
        Some(e) => (
            StopRule::KnownValue { exact: e, tolerance: solver.tol },
            StopSummary { rule: "known_value", tolerance: solver.tol, exact: Some(e) },
        ),
        None => (
            StopRule::Residual(solver.tol),
            StopSummary { rule: "residual", tolerance: solver.tol, exact: None },
        ),
    };
    let cfg = SolverConfig {
        stop,
        max_iterations: solver.max_iters,
        mode: solver.mode,
        ..SolverConfig::default()
    };
    Ok((cfg, summary))
}

fn run_problem(p: &Problem, solver: &SolverArgs) -> Result<(SolveReport, SolveSummary)> {
    let (cfg, stop) = config(solver, p.exact)?;
    info!("solving {:?} grid, cost {}, {}", p.mu.grid().dims(), p.cost_desc, solver.mode.as_str());
    let report = solve(&p.model, &p.mu, &p.nu, cfg)?;
    info!(
        "{} after {} iterations: dual {:.10}, residual {:.3e}, {:.2}s",
        report.termination.as_str(),
        report.iterations,
        report.dual_value,
        report.residual,
        report.wall_time.as_secs_f64()
    );
    let summary = SolveSummary::new(
        p.mu_desc.clone(),
        p.nu_desc.clone(),
        p.cost_desc.clone(),
        stop,
        solver.mode.as_str(),
        &report,
    );
    Ok((report, summary))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Stdout may be a pipe closed early by the reader; that is not an error.
fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(std::io::stdout().lock(), "{text}").ok();
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let p = problem(&args.inputs, &args.solver)?;
    let (report, summary) = run_problem(&p, &args.solver)?;
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_json(&dir.join("report.json"), &summary)?;
        if args.dump {
            let g = *report.phi.grid();
            dump::write(&dir.join("phi.bfmg"), &g, &[report.phi.values()])?;
            dump::write(&dir.join("psi.bfmg"), &g, &[report.psi.values()])?;
            let comps: Vec<&[f64]> = report.map.displacement().components().iter().map(Vec::as_slice).collect();
            dump::write(&dir.join("displacement.bfmg"), &g, &comps)?;
        }
    }
    print_json(&summary)?;
    Ok(termination_code(report.termination))
}

pub fn cmd_interpolate(args: &InterpolateArgs) -> Result<u8> {
    if args.frames < 2 {
        return Err(CliError::Usage(format!("--frames {} must be at least 2", args.frames)));
    }
    let (map, mu, solved) = match &args.map {
        Some(path) => {
            let d = dump::read(path)?;
            if d.components.len() != d.grid.ndim() {
                return Err(CliError::format(path, format!("{} components on a {}-D grid", d.components.len(), d.grid.ndim())));
            }
            let spec = spec_from(&args.inputs.mu, &args.inputs.builtin_mu, "mu")?;
            let mu = resolve_on(&spec, d.grid, args.inputs.invert)?;
            let field = VectorField::new(d.grid, d.components)?;
            (TransportMap::from_displacement(field, Side::Mu), mu, None)
        }
        None => {
            let p = problem(&args.inputs, &args.solver)?;
            let (report, summary) = run_problem(&p, &args.solver)?;
            (report.map, p.mu, Some((report.termination, summary)))
        }
    };
    let frames = frame_sequence(&map, &mu, args.frames)?;
    create_dir(&args.out)?;
    let g = *mu.grid();
    let mut entries = Vec::with_capacity(frames.len());
    for (k, f) in frames.iter().enumerate() {
        let name = if g.ndim() == 2 { format!("frame_{k:03}.pgm") } else { format!("frame_{k:03}.bfmg") };
        let path = args.out.join(&name);
        if g.ndim() == 2 {
            let pixels = pgm::quantize(f.values(), args.inputs.invert);
            let bytes = pgm::encode(g.dims()[1], g.dims()[0], &pixels);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        } else {
            dump::write(&path, &g, &[f.values()])?;
        }
        entries.push(FrameEntry { index: k, t: frame_time(k, args.frames), file: name, mass: f.mass() });
    }
    let drift = entries.iter().map(|e| (e.mass - 1.0).abs()).fold(0.0, f64::max);
    let code = solved.as_ref().map_or(EXIT_OK, |(t, _)| termination_code(*t));
    let manifest = Manifest {
        schema: SCHEMA,
        grid: g.dims().to_vec(),
        frames: entries,
        max_mass_drift: drift,
        solve: solved.map(|(_, s)| s),
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    print_json(&manifest)?;
    Ok(code)
}

/// Published count for the closest tabulated grid with the same tolerance
/// and mode. Counts barely move with the grid, so a neighbouring row is a
/// fair reference when the exact size was not tabulated.
pub fn reference_count(case: &BenchmarkCase, n: usize, tol: f64, mode: Mode) -> Option<(usize, usize)> {
    case.expected
        .iter()
        .filter(|e| e.mode == mode && (e.tolerance / tol - 1.0).abs() < 1e-9)
        .min_by(|a, b| {
            let da = (a.n as f64 / n as f64).ln().abs();
            let db = (b.n as f64 / n as f64).ln().abs();
            da.total_cmp(&db).then(a.n.cmp(&b.n))
        })
        .map(|e| (e.iterations, e.n))
}

fn tabulated_tolerances(case: &BenchmarkCase, mode: Mode) -> Vec<f64> {
    let mut tols: Vec<f64> = case.expected.iter().filter(|e| e.mode == mode).map(|e| e.tolerance).collect();
    tols.sort_by(|a, b| b.total_cmp(a));
    tols.dedup();
    tols
}

pub const BENCHMARK_HEADER: &str = "case,n,tolerance,mode,iterations,seconds,dual_value,error,expected,expected_n,status";

pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<u8> {
    let selected: Vec<BenchmarkCase> = if args.cases.is_empty() {
        cases::ALL.iter().filter(|c| c.exact.is_some()).cloned().collect()
    } else {
        args.cases.iter().map(|n| case_by_name(n)).collect::<Result<_>>()?
    };
    let mut rows = vec![BENCHMARK_HEADER.to_string()];
    let mut failed = 0;
    let stdout = std::io::stdout();
    writeln!(stdout.lock(), "{BENCHMARK_HEADER}").ok();
    let start = Instant::now();
    for case in &selected {
        let Some(exact) = case.exact else {
            warn!("{} has no known cost, skipped", case.name);
            continue;
        };
        let tols = if args.tol.is_empty() { tabulated_tolerances(case, args.mode) } else { args.tol.clone() };
        if tols.is_empty() {
            warn!("{} has no published {} counts, skipped", case.name, args.mode.as_str());
            continue;
        }
        let grids = if case.ndim == 2 { &args.n } else { &args.n3 };
        for &n in grids {
            check_grid_size(n)?;
            let (mu, nu) = case.densities(n)?;
            let model = case.model()?;
            for &tol in &tols {
                let cfg = SolverConfig {
                    stop: StopRule::KnownValue { exact, tolerance: tol },
                    max_iterations: args.max_iters,
                    mode: args.mode,
                    ..SolverConfig::default()
                };
                let report = solve(&model, &mu, &nu, cfg)?;
                let reference = reference_count(case, n, tol, args.mode);
                let status = match (report.termination, reference) {
                    (Termination::ToleranceMet, Some((e, _))) if report.iterations.abs_diff(e) <= args.slack => "PASS",
                    (Termination::ToleranceMet, None) => "n/a",
                    _ => "FAIL",
                };
                if status == "FAIL" {
                    failed += 1;
                }
                let row = format!(
                    "{},{n},{tol:e},{},{},{:.3},{:.12},{:.3e},{},{},{status}",
                    case.name,
                    args.mode.as_str(),
                    report.iterations,
                    report.wall_time.as_secs_f64(),
                    report.dual_value,
                    (report.dual_value - exact).abs(),
                    reference.map_or(String::new(), |r| r.0.to_string()),
                    reference.map_or(String::new(), |r| r.1.to_string()),
                );
                writeln!(stdout.lock(), "{row}").ok();
                rows.push(row);
            }
        }
    }
    info!("benchmark finished in {:.1}s, {failed} failing rows", start.elapsed().as_secs_f64());
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        let path = dir.join("benchmark.csv");
        std::fs::write(&path, rows.join("\n") + "\n").map_err(|e| CliError::io(&path, e))?;
    }
    Ok(if failed > 0 { EXIT_BENCHMARK_FAILED } else { EXIT_OK })
}
