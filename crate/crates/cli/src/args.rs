use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use combtn_core::verify::Grid;
use combtn_core::{Basis, NetworkParams};

#[derive(Debug, Parser)]
#[command(name = "combtn", version, about = "Contraction cost laboratory for compression-layer MPS and comb tensor networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form costs of both geometries with a term-by-term breakdown.
    Cost(CostArgs),
    /// Roots of the MPS-vs-comb threshold quadratic.
    Threshold(ThresholdArgs),
    /// Threshold roots over a range of compressed dimensions, as CSV and optional SVG.
    Sweep(SweepArgs),
    /// Check measured counts, oracle values and threshold identities over a parameter grid.
    Verify(VerifyArgs),
    /// Build and contract one network, reporting the scalar and measured counts.
    Contract(ContractArgs),
    /// Wall-clock timing of both schedules over a list of bond dimensions.
    Bench(BenchArgs),
}

/// Network dimensions shared by several subcommands (bond dimension excluded).
#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// M, number of teeth (>= 2)
    #[arg(long)]
    pub teeth: usize,
    /// N, tensors per tooth
    #[arg(long)]
    pub tooth_len: usize,
    /// D, raw physical dimension
    #[arg(long)]
    pub dim_raw: usize,
    /// d, compressed physical dimension (<= D)
    #[arg(long)]
    pub dim_comp: usize,
}

impl ShapeArgs {
    pub fn params(&self, bond: usize) -> combtn_core::Result<NetworkParams> {
        NetworkParams::new(self.dim_raw, self.dim_comp, bond, self.teeth, self.tooth_len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum BasisArg {
    Printed,
    #[default]
    Schedule,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Printed => Basis::Printed,
            BasisArg::Schedule => Basis::Schedule,
        }
    }
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// x, bond dimension
    #[arg(long)]
    pub bond: usize,
    #[arg(long, value_enum, default_value_t)]
    pub basis: BasisArg,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub teeth: usize,
    /// d; real values are accepted
    #[arg(long)]
    pub dim_comp: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub teeth: usize,
    #[arg(long)]
    pub d_min: f64,
    #[arg(long)]
    pub d_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum GridArg {
    #[default]
    Small,
    Full,
}

impl From<GridArg> for Grid {
    fn from(g: GridArg) -> Self {
        match g {
            GridArg::Small => Grid::Small,
            GridArg::Full => Grid::Full,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t)]
    pub grid: GridArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Mps,
    Comb,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long)]
    pub bond: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Data matrix CSV: no header, M·N rows of D values, in site order
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Replace the Gaussian compression matrices by ones with orthonormal columns
    #[arg(long)]
    pub orthonormal_u: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Comma-separated bond dimensions
    #[arg(long, value_delimiter = ',', required = true)]
    pub bond_list: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}
