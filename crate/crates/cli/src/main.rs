//! `needle`: solve, simulate and tabulate point charges on a needle.
//!
//! Every command writes its data files and a `<stem>_manifest.json` into
//! the output directory (`--out`, else `$NEEDLE_OUT_DIR`, else `.`) and
//! prints the written paths. Data files never contain timestamps, so equal
//! command lines give byte-identical files.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "needle", version, about = "Point charges on a conducting needle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the equilibrium of n charges.
    Solve(SolveArgs),
    /// Integrate the Newtonian or gradient-flow dynamics.
    Simulate(SimulateArgs),
    /// Produce one of the summary tables.
    Table(TableArgs),
    /// Evaluate a field on a grid in the z = 0 plane.
    Fieldmap(FieldmapArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Hybrid,
    GradientDescent,
    FixedPoint,
    GradientFlow,
}

#[derive(clap::Args, Serialize)]
pub struct SolveArgs {
    /// Number of charges, ends included.
    #[arg(long)]
    pub n: usize,
    /// Force tolerance (displacement tolerance for fixed-point); defaults
    /// to a size-dependent value.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value = "hybrid")]
    pub method: MethodArg,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemArg {
    Newton,
    Flow,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    Equispaced,
    HalfNeedle,
    Shifted,
    File,
}

#[derive(clap::Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub system: SystemArg,
    /// Number of charges; taken from the file with `--init file`.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "equispaced")]
    pub init: InitArg,
    /// Positions file (one per line) for `--init file`.
    #[arg(long)]
    pub init_file: Option<PathBuf>,
    #[arg(long)]
    pub horizon: f64,
    /// Sampling step of the recorded trajectory.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Times at which to write the distribution function.
    #[arg(long, value_delimiter = ',')]
    pub cdf_snapshots: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    /// Positions of the charges at fixed dyadic fractions, n = 2^k + 1.
    Dyadic,
    /// Second-charge ratio X(n, 2) / X(2n - 1, 2).
    Ratio,
    /// Extreme gaps and distance to the uniform law, n = 2^k + 1.
    Gaps,
    /// Equispaced sums and their closed forms.
    Qfactors,
}

#[derive(clap::Args, Serialize)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub kind: TableKind,
    /// Dyadic fractions for `dyadic`.
    #[arg(long, value_delimiter = ',', default_value = "1/4,5/8")]
    pub gammas: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub min_k: u32,
    #[arg(long, default_value_t = 8)]
    pub max_k: u32,
    /// Sizes for `ratio` and levels for `qfactors`: a list such as
    /// `5,9,17` or ranges such as `2..8` (inclusive).
    #[arg(long)]
    pub ns: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long, default_value_t = 1)]
    pub s: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    Continuous,
    DiscreteEquilibrium,
    DiscreteUniform,
}

#[derive(clap::Args, Serialize)]
pub struct FieldmapArgs {
    #[arg(long, value_enum)]
    pub source: SourceArg,
    /// Number of charges for the discrete sources.
    #[arg(long)]
    pub n: Option<usize>,
    /// `x0:x1,y0:y1`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: String,
    /// `NXxNY` grid points.
    #[arg(long, default_value = "40x20")]
    pub res: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Table(a) => commands::table(a),
        Command::Fieldmap(a) => commands::fieldmap(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
