//! Command-line interface definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levelk_core::{NormalizationVariant, PairConvention};

#[derive(Parser, Debug)]
#[command(
    name = "levelk",
    version,
    about = "Entropy-gated level-k game experiments on synthetic driving scenes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run gated and ungated games over a suite; writes levels.csv and
    /// summary.csv with the eval-reduction percentage
    Run(RunArgs),
    /// Mean/std trajectory entropy per game level, gated and ungated;
    /// writes entropy_profile.csv
    EntropyProfile(RunArgs),
    /// Re-run the same suite under several gate threshold schedules;
    /// writes sweep.csv
    Sweep(SweepArgs),
    /// Per-agent entropy and gate verdicts for an external MTP file
    Audit(AuditArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Suite: a generator spec (straight:N | intersection:N | mixed:N), a
    /// scene file, or a directory of scene files
    #[arg(long, default_value = "mixed:20")]
    pub suite: String,

    /// Game depth K; defaults to the threshold count plus one
    #[arg(long)]
    pub levels: Option<usize>,

    /// Gate thresholds, comma separated, applied before levels 1..K
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thresholds: Option<Vec<f64>>,

    /// Threshold preset name; `--thresholds` overrides (default: synthetic)
    #[arg(long, conflicts_with = "thresholds")]
    pub preset: Option<String>,

    #[arg(long, value_enum, default_value_t = NormalizationArg::UnitStepSquared)]
    pub normalization: NormalizationArg,

    #[arg(long, value_enum, default_value_t = PairsArg::Unordered)]
    pub pairs: PairsArg,

    /// Seed for suite generation and the policy
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Parallel scenario workers
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Disable the entropy gate (the gated run degenerates to the ungated one)
    #[arg(long)]
    pub no_gate: bool,

    /// Fan policy parameter file (JSON); its seed is overridden by --seed
    #[arg(long)]
    pub policy: Option<PathBuf>,

    /// Keep only the N lowest-id agents of each scene
    #[arg(long)]
    pub max_agents: Option<usize>,

    /// Horizon in timesteps for generated suites
    #[arg(long, default_value_t = 30)]
    pub horizon: usize,

    /// Timestep in seconds for generated suites
    #[arg(long, default_value_t = 0.5)]
    pub dt: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Threshold schedules separated by ';', e.g. "50,25;80,40"; defaults to
    /// six built-in schedules (three constant, three decreasing)
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct AuditArgs {
    /// External MTP file (JSON)
    pub mtp: PathBuf,

    /// Gate threshold: agents with entropy strictly below it are inactive
    #[arg(long)]
    pub threshold: f64,

    #[arg(long, value_enum, default_value_t = NormalizationArg::UnitStepSquared)]
    pub normalization: NormalizationArg,

    #[arg(long, value_enum, default_value_t = PairsArg::Unordered)]
    pub pairs: PairsArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationArg {
    #[value(name = "unit-step-squared")]
    UnitStepSquared,
    #[value(name = "unit-step")]
    UnitStep,
    #[value(name = "cumulative")]
    Cumulative,
    #[value(name = "final")]
    Final,
}

impl From<NormalizationArg> for NormalizationVariant {
    fn from(arg: NormalizationArg) -> Self {
        match arg {
            NormalizationArg::UnitStepSquared => NormalizationVariant::UnitStepSquared,
            NormalizationArg::UnitStep => NormalizationVariant::UnitStepLinear,
            NormalizationArg::Cumulative => NormalizationVariant::CumulativeAtStep,
            NormalizationArg::Final => NormalizationVariant::FinalLength,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairsArg {
    #[value(name = "unordered")]
    Unordered,
    #[value(name = "ordered")]
    Ordered,
}

impl From<PairsArg> for PairConvention {
    fn from(arg: PairsArg) -> Self {
        match arg {
            PairsArg::Unordered => PairConvention::Unordered,
            PairsArg::Ordered => PairConvention::Ordered,
        }
    }
}
