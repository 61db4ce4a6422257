use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ideaflow::features::FeatureSet;

#[derive(Debug, Parser)]
#[command(name = "ideaflow", version, about = "Conversational flow analysis of debate transcripts")]
pub struct Cli {
    /// Worker threads; outputs do not depend on this value.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus directory and summarize it.
    Ingest(IngestArgs),
    /// Write a synthetic corpus directory.
    Synth(SynthArgs),
    /// Per-side talking points of the introduction round.
    TalkingPoints(AnalysisArgs),
    /// Coverage by round, coverage drops and adoption counts.
    Flow(AnalysisArgs),
    /// Words introduced in the discussion and taken up by the other side.
    DiscussionPoints(AnalysisArgs),
    /// Labeled feature table, one row per debate.
    Features(FeaturesArgs),
    /// Leave-one-out winner prediction.
    Predict(PredictArgs),
    /// Paired significance tests between winners and losers.
    Stats(AnalysisArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// Directory of debate JSON files.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// A single debate JSON file.
    #[arg(long)]
    pub debate: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TermArgs {
    /// Talking points per side.
    #[arg(long, default_value_t = ideaflow::divergence::DEFAULT_K)]
    pub k: usize,
    /// Dirichlet prior mass per vocabulary term.
    #[arg(long, default_value_t = ideaflow::divergence::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// One stopword per line; replaces the built-in English list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to create; must be empty or absent.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub n_debates: usize,
    #[arg(long, default_value_t = 500)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 20)]
    pub planted_tp: usize,
    #[arg(long, default_value_t = 6.0)]
    pub boost: f64,
    #[arg(long, default_value_t = 6)]
    pub planted_dp: usize,
    /// How often the flow pattern follows the winner, in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub signal: f64,
}

#[derive(Debug, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub terms: TermArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_parser = parse_feature_set)]
    pub feature_set: FeatureSet,
    /// Term list, one per line; required for the bag-of-words table.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[command(flatten)]
    pub terms: TermArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_parser = parse_feature_set)]
    pub feature_set: FeatureSet,
    /// Grid overrides, e.g. "penalty=l2;C=1e-2..1e2;m=1..5;standardize=false".
    #[arg(long, default_value = "")]
    pub grid: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub terms: TermArgs,
    #[command(flatten)]
    pub output: Output,
}

fn parse_feature_set(s: &str) -> Result<FeatureSet, String> {
    s.parse()
}
