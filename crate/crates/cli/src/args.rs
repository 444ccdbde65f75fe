//! Command-line grammar. Every command derives `Serialize` so that the
//! resolved invocation can be embedded in the artifacts it writes and
//! replayed later.

use std::path::PathBuf;

use bevt::model::EffectKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "bevt", version, about = "Bayesian extreme-value analysis of block maxima and threshold exceedances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Extract block maxima or threshold exceedances from a CSV series.
    Extract(ExtractArgs),
    /// Fit a GEV or GPD model to an extracted sample.
    Fit(FitArgs),
    /// Posterior return levels, VaR or ES from a fitted chain.
    Risk(RiskArgs),
    /// Prior persistence.
    Prior(PriorArgs),
    /// Run a replicated simulation study from a scenario file.
    Simulate(SimulateArgs),
    /// Write a daily series CSV for a block-maxima scenario.
    Generate(GenerateArgs),
    /// Quantile-plot and return-level-plot data for a fitted sample.
    Report(ReportArgs),
    /// Re-run the command embedded in an artifact.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractMethod {
    Bm,
    Pot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitFamily {
    Gev,
    Gpd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMeasure {
    Rl,
    Var,
    Es,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorAction {
    Export,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReKind {
    None,
    Location,
    LocationScale,
}

impl From<ReKind> for EffectKind {
    fn from(k: ReKind) -> Self {
        match k {
            ReKind::None => EffectKind::None,
            ReKind::Location => EffectKind::Location,
            ReKind::LocationScale => EffectKind::LocationScale,
        }
    }
}

/// Where the output directory is; never embedded, so replays into another
/// directory reproduce the same bytes.
#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 3000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 20000)]
    pub draws: usize,
    #[arg(long, default_value_t = 5)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExtractArgs {
    #[arg(value_enum)]
    pub method: ExtractMethod,
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "value")]
    pub value_col: String,
    #[arg(long, default_value = "date")]
    pub date_col: String,
    /// Column of series labels; each label becomes a separate series.
    #[arg(long)]
    pub group_col: Option<String>,
    /// `year` for calendar years or `n:<int>` for fixed-length blocks.
    #[arg(long, default_value = "year")]
    pub block: String,
    /// Random-effect groups: a label column, or `every:<M>` blocks.
    #[arg(long)]
    pub group_by: Option<String>,
    /// Threshold for `pot`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Keep calendar years `A:B` (inclusive) only.
    #[arg(long)]
    pub years: Option<String>,
    /// Analyse minima (as negated maxima) instead of maxima.
    #[arg(long)]
    pub minima: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[arg(value_enum)]
    pub family: FitFamily,
    /// Sample JSON written by `extract`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    pub re: ReKind,
    /// Prior JSON file, or `flat`.
    #[arg(long, default_value = "flat")]
    pub prior: String,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RiskArgs {
    #[arg(value_enum)]
    pub measure: RiskMeasure,
    /// Chain CSV written by `fit`.
    #[arg(long)]
    pub input: PathBuf,
    /// Return periods for `rl`.
    #[arg(long, default_values_t = [10u32])]
    pub k: Vec<u32>,
    /// Tail probability for `var` and `es`.
    #[arg(long, default_value_t = 0.05)]
    pub p: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PriorArgs {
    #[arg(value_enum)]
    pub action: PriorAction,
    /// Chain CSV written by `fit`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Scenario JSON tagged by `"study"`.
    pub scenario: PathBuf,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Root seed; overrides the scenario's own seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    /// Block-maxima scenario JSON.
    pub scenario: PathBuf,
    /// Calendar year of the first simulated year.
    #[arg(long, default_value_t = 1961)]
    pub first_year: i32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Sample JSON written by `extract`.
    #[arg(long)]
    pub input: PathBuf,
    /// Chain CSV written by `fit`.
    #[arg(long)]
    pub chain: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Any JSON or CSV artifact written by this tool.
    pub artifact: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Command {
    pub fn set_out_dir(&mut self, dir: PathBuf) {
        let slot = match self {
            Command::Extract(a) => &mut a.out.out,
            Command::Fit(a) => &mut a.out.out,
            Command::Risk(a) => &mut a.out.out,
            Command::Prior(a) => &mut a.out.out,
            Command::Simulate(a) => &mut a.out.out,
            Command::Generate(a) => &mut a.out.out,
            Command::Report(a) => &mut a.out.out,
            Command::Replay(a) => &mut a.out.out,
        };
        *slot = dir;
    }
}
