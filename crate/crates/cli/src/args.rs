use std::path::PathBuf;

use bfm_core::Mode;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "bfm-ot", version, about = "Optimal transport between grid densities by the back-and-forth method")]
pub struct Cli {
    /// Worker threads (default: all cores). BFM_OT_THREADS overrides it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one transport problem and write a JSON report.
    Solve(SolveArgs),
    /// Solve (or load a map) and write displacement-interpolation frames.
    Interpolate(InterpolateArgs),
    /// Run the reference problems with the exact-error stopping rule.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Source density: a PGM/CSV path or `builtin:<shapes>`.
    #[arg(long, conflicts_with_all = ["builtin_mu", "case"])]
    pub mu: Option<String>,

    /// Target density: a PGM/CSV path or `builtin:<shapes>`.
    #[arg(long, conflicts_with_all = ["builtin_nu", "case"])]
    pub nu: Option<String>,

    /// Source as shapes, e.g. `disc:0.25,0.25,0.125+square:0.7,0.7,0.2`.
    #[arg(long, conflicts_with = "case")]
    pub builtin_mu: Option<String>,

    /// Target as shapes.
    #[arg(long, conflicts_with = "case")]
    pub builtin_nu: Option<String>,

    /// Reference problem (two-discs, two-balls, four-squares, eight-cubes,
    /// power-disc-pairs). Supplies both densities and the cost, and stops on
    /// the exact cost when one is known.
    #[arg(long)]
    pub case: Option<String>,

    /// Cells per axis for built-in shapes.
    #[arg(long, default_value_t = 256)]
    pub n: usize,

    /// Dark greymap pixels carry mass instead of bright ones.
    #[arg(long)]
    pub invert: bool,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// `quadratic` or `power:p1,p2[,p3]`.
    #[arg(long)]
    pub cost: Option<String>,

    /// Stopping tolerance: Ḣ⁻¹ residual, or dual error with --exact.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,

    /// Known optimal cost; stop once the dual value is within --tol of it.
    #[arg(long)]
    pub exact: Option<f64>,

    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,

    /// `bfm` (back-and-forth) or `gradient-ascent`.
    #[arg(long, default_value = "bfm")]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub inputs: Inputs,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Directory for report.json and dumps.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also write phi, psi and displacement as BFMG dumps (needs --out).
    #[arg(long, requires = "out")]
    pub dump: bool,
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[command(flatten)]
    pub inputs: Inputs,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Displacement dump from `solve --dump` to use instead of solving.
    #[arg(long)]
    pub map: Option<PathBuf>,

    /// Number of frames, both end points included.
    #[arg(long, default_value_t = 6)]
    pub frames: usize,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Cases to run (default: all with a known cost).
    #[arg(long = "case", value_delimiter = ',')]
    pub cases: Vec<String>,

    /// Grid sizes for 2-D cases.
    #[arg(long, value_delimiter = ',', default_values_t = [256])]
    pub n: Vec<usize>,

    /// Grid sizes for 3-D cases.
    #[arg(long, value_delimiter = ',', default_values_t = [64])]
    pub n3: Vec<usize>,

    /// Tolerances (default: every tolerance tabulated for the case).
    #[arg(long, value_delimiter = ',')]
    pub tol: Vec<f64>,

    #[arg(long, default_value = "bfm")]
    pub mode: Mode,

    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,

    /// Allowed distance from the published iteration count.
    #[arg(long, default_value_t = 2)]
    pub slack: usize,

    /// Directory for benchmark.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
