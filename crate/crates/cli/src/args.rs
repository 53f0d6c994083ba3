use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qretarget", version, about = "Difficulty-increase attack simulator for Grover-accelerated miners")]
#[command(args_override_self = true)]
pub struct Cli {
    /// key=value file merged under the command-line flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an attack schedule and print it as CSV
    Attack(AttackArgs),
    /// Race a schedule against the honest network
    Race(RaceArgs),
    /// Estimate the speed ratio and attack length from hardware figures
    Feasibility(FeasibilityArgs),
    /// Check a schedule CSV against the retarget rule
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantId {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    Revenue,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    /// Blocks per retarget epoch
    #[arg(long, default_value_t = 2016)]
    pub epoch_length: u64,
    /// Minutes per block
    #[arg(long, default_value_t = 10.0)]
    pub block_time: f64,
    /// Maximum per-epoch difficulty change factor (unclamped if absent)
    #[arg(long)]
    pub clamp: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Speed ratio of the quantum miner [default: 0.25; inferred from a schedule file]
    #[arg(long)]
    pub r: Option<f64>,
    /// Epochs at the top difficulty (variant 3, default 3; variant 4, default 3)
    #[arg(long)]
    pub n_top: Option<u32>,
    /// Revenue shortfall target (revenue variant)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Per-epoch difficulty step (variant 4)
    #[arg(long)]
    pub step: Option<f64>,
    /// Ramp-up steps (variant 4)
    #[arg(long)]
    pub n_up: Option<u32>,
    /// Ramp-down steps (variant 4)
    #[arg(long)]
    pub n_down: Option<u32>,
    /// Stop the easy tail once the lag is at most this many epoch-times (variant 4)
    #[arg(long)]
    pub lag_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long, value_enum)]
    pub variant: VariantId,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Write the CSV here instead of standard output
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Deterministic,
    Mc,
}

#[derive(Debug, Args)]
pub struct RaceArgs {
    #[arg(long, value_enum, conflicts_with_all = ["schedule", "counterexample"])]
    pub variant: Option<VariantId>,
    /// Race a schedule read from CSV
    #[arg(long, value_name = "FILE", conflicts_with = "counterexample")]
    pub schedule: Option<PathBuf>,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = Mode::Deterministic)]
    pub mode: Mode,
    /// Monte Carlo trials (default 10000)
    #[arg(long)]
    pub trials: Option<u64>,
    /// Monte Carlo seed (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of honest work that lands on the main chain
    #[arg(long, default_value_t = 1.0)]
    pub efficiency: f64,

    /// Compare fork-choice rules on the longest-chain counterexample
    #[arg(long)]
    pub counterexample: bool,
    /// Hard epochs on the honest chain (counterexample)
    #[arg(long, default_value_t = 10, requires = "counterexample")]
    pub n: u64,
    /// Attacker share of the honest hash power (counterexample)
    #[arg(long, default_value_t = 0.002, requires = "counterexample")]
    pub power: f64,
    /// Honest difficulty after the first epoch (counterexample)
    #[arg(long, default_value_t = 1000.0, requires = "counterexample")]
    pub hard: f64,
}

#[derive(Debug, Args)]
pub struct FeasibilityArgs {
    /// Network hash rate in hashes per second
    #[arg(long, default_value_t = 5e20)]
    pub hashrate: f64,
    /// Seconds per block
    #[arg(long, default_value_t = 600.0)]
    pub block_seconds: f64,
    /// Gate layers per hash evaluation
    #[arg(long, default_value_t = 1600)]
    pub depth: u64,
    /// Quantum clock speed in Hz
    #[arg(long, default_value_t = 1e10)]
    pub clock: f64,
    /// Machines running Grover search in parallel
    #[arg(long, default_value_t = 1)]
    pub machines: u64,
    /// Multiplier on the circuit depth
    #[arg(long, default_value_t = 1.0)]
    pub overhead: f64,
    /// Blocks per retarget epoch
    #[arg(long, default_value_t = 2016)]
    pub epoch_length: u64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Schedule CSV
    pub file: PathBuf,
    /// Miner speed; inferred from the first row if absent
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub chain: ChainArgs,
}
