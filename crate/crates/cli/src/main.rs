//! `dipole`: command-line front end for the dipole-spectrum library.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dipole_spectrum::bounds::RearrangementArgument;
use dipole_spectrum::channels::Boundary;
use dipole_spectrum::{Error, Tolerances};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "dipole",
    version,
    about = "Bound states of inverse-square dipole potentials"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, default_value_t = 7, global = true)]
    pub seed: u64,
    #[arg(long = "tol-eig", default_value_t = 1e-10, global = true)]
    pub tol_eig: f64,
    #[arg(long = "tol-root", default_value_t = 1e-12, global = true)]
    pub tol_root: f64,
    #[arg(long = "tol-quad", default_value_t = 1e-12, global = true)]
    pub tol_quad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Dirichlet,
    Neumann,
}

impl From<Bc> for Boundary {
    fn from(bc: Bc) -> Self {
        match bc {
            Bc::Dirichlet => Boundary::Dirichlet,
            Bc::Neumann => Boundary::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Argument {
    Area,
    Radius,
}

impl From<Argument> for RearrangementArgument {
    fn from(a: Argument) -> Self {
        match a {
            Argument::Area => RearrangementArgument::Area,
            Argument::Radius => RearrangementArgument::Radius,
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Lowest eigenvalues of the angular Mathieu operator.
    Mathieu(MathieuArgs),
    /// Zeros of K_{iν} in the small-argument region.
    Zeros(ZerosArgs),
    /// Eigenvalue counts below E.
    Count(CountArgs),
    /// Accumulation slope of the counting function.
    Slope(SlopeArgs),
    /// Shargorodsky functional, bound-state counts and sum rules.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct MathieuArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Threshold for the open-channel trace.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    /// Emit tr √((M_b - a)₋) instead of the eigenvalue table.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ZerosArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub nu: f64,
    /// Index `k` or inclusive range `lo..hi`.
    #[arg(long, default_value = "1..6")]
    pub n: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    /// Single energy (negative).
    #[arg(long = "E", allow_hyphen_values = true, conflicts_with = "e_range")]
    pub e: Option<f64>,
    /// Energy magnitudes `lo..hi`, log-uniform.
    #[arg(long = "E-range", allow_hyphen_values = true)]
    pub e_range: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Bc::Dirichlet)]
    pub bc: Bc,
    /// Add finite-difference oracle columns and their discrepancy.
    #[arg(long)]
    pub oracle: bool,
    /// Oracle grid length in ln r (default: sized from E).
    #[arg(long)]
    pub length: Option<f64>,
    /// Oracle grid interior nodes (used with --length).
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SlopeArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    #[arg(
        long = "E-range",
        default_value = "1e-24..1e-6",
        allow_hyphen_values = true
    )]
    pub e_range: String,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Bc::Dirichlet)]
    pub bc: Bc,
    /// Dirac accumulation rate for dipole strength B instead.
    #[arg(long, value_name = "B")]
    pub dirac: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    /// Depths α of the unit-disk wells `-α·1_{r<1}`.
    #[arg(long, value_delimiter = ',', num_args = 1.., required_unless_present = "sum_rules")]
    pub well: Vec<f64>,
    /// Run the sum-rule checks instead.
    #[arg(long = "sum-rules", conflicts_with = "well")]
    pub sum_rules: bool,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Reading of the rearrangement argument.
    #[arg(long, value_enum, default_value_t = Argument::Area)]
    pub argument: Argument,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } => 1,
        Error::GridInadequate { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let tol = match Tolerances::new(cli.global.tol_eig, cli.global.tol_root, cli.global.tol_quad) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = match commands::run(&cli, &tol) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let text = match cli.global.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(&cli),
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
