//! Command-line surface. Every value flag is optional so that a missing flag
//! falls through to its `RALLYSHAP_*` environment variable, then to the
//! config file, then to the built-in default.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "rallyshap", version, about = "Shapley attribution for rally stroke forecasters")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML config file.
    #[arg(long, global = true, env = "RALLYSHAP_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "RALLYSHAP_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (defaults to available cores).
    #[arg(long, global = true, env = "RALLYSHAP_THREADS")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "RALLYSHAP_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and its train/test split.
    Synth(SynthArgs),
    /// Fit a forecaster.
    Fit(FitArgs),
    /// Evaluate a forecaster (CE, best-of-K MSE and MAE).
    Eval(EvalArgs),
    /// Shapley attributions for every rally.
    Attribute(AttributeArgs),
    /// Retrain without player or past-stroke information and compare.
    Ablate(AblateArgs),
    /// Render global or single-rally reports from attribution output.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Style,
    Markov,
    Blend,
    Uniform,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameArg {
    Past,
    Player,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Exact,
    Sampled,
    Loo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentArg {
    Type,
    Area,
    Macro,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodingArg {
    Greedy,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetArg {
    Player,
    Past,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    Global,
    Local,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_rallies: Option<usize>,
    #[arg(long)]
    pub n_players: Option<usize>,
    /// Probability that a stroke follows the previous stroke rather than the hitter's style.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub termination_prob: Option<f64>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub short_serve_prob: Option<f64>,
    #[arg(long)]
    pub concentration: Option<f64>,
    /// Fraction of rallies in the training split.
    #[arg(long)]
    pub split: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub kind: Option<ModelKind>,
    /// Additive smoothing of shot counts.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Grid bins per axis for Markov states.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Blend weight of the Markov component.
    #[arg(long = "blend-lambda")]
    pub blend_lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Fit only on strokes after this many given strokes.
    #[arg(long)]
    pub tau: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Given strokes; comma-separated list.
    #[arg(long, env = "RALLYSHAP_TAU", value_delimiter = ',')]
    pub tau: Option<Vec<usize>>,
    /// Sampled rollouts for best-of-K.
    #[arg(long, env = "RALLYSHAP_K")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AttributeArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, env = "RALLYSHAP_TAU", value_delimiter = ',')]
    pub tau: Option<Vec<usize>>,
    #[arg(long, env = "RALLYSHAP_GAME", value_enum)]
    pub game: Option<GameArg>,
    #[arg(long, env = "RALLYSHAP_METHOD", value_enum)]
    pub method: Option<MethodArg>,
    /// Permutations for the sampled method.
    #[arg(long, env = "RALLYSHAP_SAMPLES")]
    pub samples: Option<usize>,
    /// Components written to the record and global files.
    #[arg(long, env = "RALLYSHAP_COMPONENT", value_enum)]
    pub component: Option<ComponentArg>,
    #[arg(long, env = "RALLYSHAP_IMPUTE_FEEDBACK", action = clap::ArgAction::Set)]
    pub impute_feedback: Option<bool>,
    #[arg(long, env = "RALLYSHAP_DECODING", value_enum)]
    pub decoding: Option<DecodingArg>,
    /// Rollouts averaged per payoff under sampled decoding.
    #[arg(long, env = "RALLYSHAP_K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub exact_cap: Option<usize>,
    /// Bootstrap resamples for global intervals.
    #[arg(long)]
    pub resamples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub target: Option<TargetArg>,
    #[arg(long, env = "RALLYSHAP_TAU", value_delimiter = ',')]
    pub tau: Option<Vec<usize>>,
    #[arg(long, env = "RALLYSHAP_K")]
    pub k: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub resamples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ReportArgs {
    /// Directory written by `attribute`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ReportMode>,
    #[arg(long)]
    pub rally_id: Option<String>,
    /// Selects one tau when the records hold several.
    #[arg(long)]
    pub tau: Option<usize>,
}
