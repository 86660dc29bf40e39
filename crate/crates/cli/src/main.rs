mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "tabgraph",
    version,
    about = "Table type classification with visibility graphs and a GCN"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a record file and write a dataset manifest.
    Ingest(IngestArgs),
    /// Build visibility graphs for the records of a manifest.
    BuildGraphs(BuildGraphsArgs),
    /// Build the training split and grow it with augmented graphs.
    Augment(AugmentArgs),
    /// Train a GCN on a graph file and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a labeled graph file.
    Eval(EvalArgs),
    /// Print `<id>\t<label>\t<confidence>` for every record of a record file.
    Predict(PredictArgs),
    /// Split, augment, train and evaluate in one reproducible run.
    RunExperiment(ExperimentArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Record file (JSON array of table records).
    #[arg(long)]
    pub records: PathBuf,
    /// Manifest file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed of the stratified train/test split.
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// Share of each class assigned to training.
    #[arg(long, default_value_t = 0.2)]
    pub train_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmbedderSpec {
    Hash,
    Vectors(PathBuf),
}

fn parse_embedder(s: &str) -> Result<EmbedderSpec, String> {
    match s {
        "hash" => Ok(EmbedderSpec::Hash),
        _ => match s.strip_prefix("vectors:") {
            Some(path) if !path.is_empty() => Ok(EmbedderSpec::Vectors(path.into())),
            _ => Err(format!("expected `hash` or `vectors:PATH`, got `{s}`")),
        },
    }
}

#[derive(Args, Clone)]
pub struct EmbedderArgs {
    /// Word embedder: `hash` or `vectors:PATH` (text vector file).
    #[arg(long, default_value = "hash", value_parser = parse_embedder)]
    pub embedder: EmbedderSpec,
    /// Dimension of the hash embedder (ignored for vector files).
    #[arg(long, default_value_t = 32)]
    pub embed_dim: usize,
    /// Seed of the hash embedder.
    #[arg(long, default_value_t = 0)]
    pub embed_seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitPart {
    All,
    Train,
    Test,
}

#[derive(Args)]
pub struct BuildGraphsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub embedder: EmbedderArgs,
    /// Which records of the manifest split to build.
    #[arg(long, value_enum, default_value_t = SplitPart::All)]
    pub split: SplitPart,
    /// Graph file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AugPreset {
    /// No augmentation.
    None,
    /// Column and row swaps.
    Rc,
    /// Node removal, edge removal, column and row swaps.
    All,
}

#[derive(Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub embedder: EmbedderArgs,
    #[arg(long, value_enum)]
    pub aug: AugPreset,
    /// Size of the training set after augmentation.
    #[arg(long)]
    pub target_size: usize,
    /// Augmentation seed.
    #[arg(long)]
    pub seed: u64,
    /// Smallest fraction of nodes or edges removed.
    #[arg(long, default_value_t = 0.01)]
    pub min_fraction: f64,
    /// Largest fraction of nodes or edges removed.
    #[arg(long, default_value_t = 0.20)]
    pub max_fraction: f64,
    /// Graph file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Args, Clone)]
pub struct TrainingArgs {
    /// Seed for initialization and shuffling.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Hidden width of both GCN layers.
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, value_enum, default_value_t = OptimizerKind::Adam)]
    pub optimizer: OptimizerKind,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Labeled graph file.
    #[arg(long)]
    pub graphs: PathBuf,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Checkpoint file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled graph file.
    #[arg(long)]
    pub graphs: PathBuf,
    /// Optional JSON file for the confusion matrix and metrics.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Record file; labels, if present, are ignored.
    #[arg(long)]
    pub records: PathBuf,
    #[command(flatten)]
    pub embedder: EmbedderArgs,
}

#[derive(Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub embedder: EmbedderArgs,
    #[arg(long, value_enum, default_value_t = AugPreset::None)]
    pub aug: AugPreset,
    /// Training set size after augmentation (required unless `--aug none`).
    #[arg(long)]
    pub target_size: Option<usize>,
    /// Standardize node features with training-set statistics.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Report file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the trained checkpoint here.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::BuildGraphs(a) => commands::build_graphs(&a),
        Command::Augment(a) => commands::augment(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::RunExperiment(a) => commands::run_experiment(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
