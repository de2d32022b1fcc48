use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "kncs", version, about = "Data for K-quantum nonlinear coherent states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattice coefficients ln|g(m,0)|², with or without the ξ^m factor.
    Coeffs(CoeffsArgs),
    /// Photon-number distribution P(n) on the occupied lattice.
    Distribution(StateRun),
    /// Distribution of the mixed state prepared from a coherent state |α⟩.
    Mixed(MixedArgs),
    /// Critical |ξ| against η.
    PhaseDiagram(PhaseArgs),
    /// Mandel parameter against |ξ|.
    MandelSweep(SweepArgs),
    /// Squeezing parameter against |ξ|.
    SqueezeSweep(SweepArgs),
    /// Null vectors of the single red-sideband dark-state system.
    DarkState(DarkArgs),
    /// ⟨a|b⟩ from the closed form and from the truncated amplitudes.
    Overlap(OverlapArgs),
    /// Single-quantum branch decomposition of a state.
    Decompose(StateRun),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FKind {
    Identity,
    TrappedIon,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// The state `|ξ; Kj, f⟩`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct StateArgs {
    #[arg(long = "K", default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    #[arg(long = "xi-mag")]
    pub xi_mag: Option<f64>,
    /// Argument of ξ in radians.
    #[arg(long = "xi-phase", default_value_t = 0.0, allow_negative_numbers = true)]
    pub xi_phase: f64,
    /// Lamb-Dicke parameter of the trapped-ion nonlinearity.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long = "f-kind", value_enum, default_value_t = FKind::TrappedIon)]
    pub f_kind: FKind,
    /// Values f(0), f(1), ... one per line, for `--f-kind tabulated`.
    #[arg(long = "f-table")]
    pub f_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; `-` writes to standard output. Relative paths resolve
    /// against `KNCS_OUTPUT_DIR` when it is set.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StateRun {
    #[command(flatten)]
    pub state: StateArgs,
    /// Truncation tolerance on the dropped probability mass.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Number of lattice sites to emit.
    #[arg(long = "n-max", default_value_t = 200)]
    pub n_max: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MixedArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long = "alpha-mag")]
    pub alpha_mag: f64,
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhaseArgs {
    #[arg(long = "K", default_value_t = 1)]
    pub k: u32,
    /// Largest η; the grid is uniform on (0, eta-max].
    #[arg(long = "eta-max", default_value_t = 1.0)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Bracket width, relative to the critical value, at which bisection stops.
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Largest |ξ|; the grid is uniform on (0, xi-max].
    #[arg(long = "xi-max")]
    pub xi_max: f64,
    #[arg(long, default_value_t = 256)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DarkArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Truncated Fock dimension; chosen from the closed-form state if absent.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Tolerance for the closed-form comparison state.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OverlapArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long = "j2")]
    pub j2: Option<u32>,
    #[arg(long = "xi2-mag")]
    pub xi2_mag: f64,
    #[arg(long = "xi2-phase", default_value_t = 0.0, allow_negative_numbers = true)]
    pub xi2_phase: f64,
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}
