use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use tabgraph_core::augment::{augment_to_size, AugmentConfig, AugmentOp, Source};
use tabgraph_core::dataset::{class_distribution, parse_record_file, stratified_split};
use tabgraph_core::eval::{confusion, metrics_from_confusion, ConfusionMatrix, Metrics};
use tabgraph_core::experiment::{self, usable_records, AugmentPlan, ExperimentConfig};
use tabgraph_core::gnn::{predict_with_confidence, ModelParams};
use tabgraph_core::graph::{
    self, build_inference_graph, load_vector_table, Embedder, HashEmbedder, GEOM_DIM,
};
use tabgraph_core::train::{train_with_history, Optimizer, TrainConfig};
use tabgraph_core::{ClassLabel, DatasetManifest, Error, TableGraph, TableRecord};

use crate::{
    AugPreset, AugmentArgs, BuildGraphsArgs, EmbedderArgs, EmbedderSpec, EvalArgs, ExperimentArgs,
    IngestArgs, OptimizerKind, PredictArgs, SplitPart, TrainArgs, TrainingArgs,
};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

type CliResult = Result<(), CliError>;

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => usage(format!("file not found: {}", path.display())),
        _ => usage(format!("cannot read {}: {e}", path.display())),
    })
}

fn write_output(path: &Path, body: &str) -> CliResult {
    fs::write(path, body).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn read_manifest(path: &Path) -> Result<DatasetManifest, CliError> {
    Ok(DatasetManifest::from_json(&read_input(path)?)?)
}

fn read_graphs(path: &Path) -> Result<Vec<TableGraph>, CliError> {
    let graphs: Vec<TableGraph> =
        serde_json::from_slice(&read_input(path)?).map_err(Error::from)?;
    for g in &graphs {
        g.validate()?;
    }
    Ok(graphs)
}

fn write_graphs(path: &Path, graphs: &[TableGraph]) -> CliResult {
    let body = serde_json::to_string(graphs).map_err(Error::from)?;
    write_output(path, &body)
}

fn read_model(path: &Path) -> Result<ModelParams, CliError> {
    Ok(ModelParams::from_json(&read_input(path)?)?)
}

fn make_embedder(args: &EmbedderArgs) -> Result<(Box<dyn Embedder>, String), CliError> {
    match &args.embedder {
        EmbedderSpec::Hash => {
            if args.embed_dim == 0 {
                return Err(usage("--embed-dim must be positive"));
            }
            let name = format!("hash(dim={}, seed={})", args.embed_dim, args.embed_seed);
            Ok((
                Box::new(HashEmbedder::new(args.embed_dim, args.embed_seed)),
                name,
            ))
        }
        EmbedderSpec::Vectors(path) => {
            if !path.exists() {
                return Err(usage(format!("file not found: {}", path.display())));
            }
            let table = load_vector_table(path)?;
            Ok((Box::new(table), format!("vectors:{}", path.display())))
        }
    }
}

fn ops(preset: AugPreset) -> Option<&'static [AugmentOp]> {
    match preset {
        AugPreset::None => None,
        AugPreset::Rc => Some(&AugmentOp::ROWS_COLUMNS),
        AugPreset::All => Some(&AugmentOp::ALL),
    }
}

fn train_config(args: &TrainingArgs) -> TrainConfig {
    TrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        optimizer: match args.optimizer {
            OptimizerKind::Adam => Optimizer::ADAM,
            OptimizerKind::Sgd => Optimizer::Sgd,
        },
        seed: args.seed,
        hidden_dim: args.hidden,
        class_weights: None,
    }
}

fn split(manifest: &DatasetManifest) -> Result<(Vec<TableRecord>, Vec<TableRecord>), CliError> {
    let usable = usable_records(&manifest.records);
    Ok(stratified_split(
        &usable,
        manifest.train_fraction,
        manifest.split_seed,
    )?)
}

pub fn ingest(args: &IngestArgs) -> CliResult {
    let records = parse_record_file(&read_input(&args.records)?)?;
    let manifest = DatasetManifest::new(records, args.split_seed, args.train_fraction)?;
    write_output(&args.out, &manifest.to_json()?)?;

    let usable = usable_records(&manifest.records);
    let dist = class_distribution(&manifest.records);
    let mut out = String::new();
    for c in ClassLabel::ALL {
        let _ = writeln!(out, "{}\t{}", c.name(), dist[&c]);
    }
    let _ = writeln!(
        out,
        "unlabeled or empty\t{}",
        manifest.records.len() - usable.len()
    );
    let _ = writeln!(out, "total\t{}", manifest.records.len());
    print!("{out}");
    Ok(())
}

pub fn build_graphs(args: &BuildGraphsArgs) -> CliResult {
    let manifest = read_manifest(&args.manifest)?;
    let (embedder, _) = make_embedder(&args.embedder)?;
    let records = match args.split {
        SplitPart::All => usable_records(&manifest.records),
        SplitPart::Train => split(&manifest)?.0,
        SplitPart::Test => split(&manifest)?.1,
    };
    let graphs = graph::build_graphs(&records, embedder.as_ref())?;
    write_graphs(&args.out, &graphs)?;
    println!(
        "{} graphs, feature dim {}",
        graphs.len(),
        GEOM_DIM + embedder.embed_dim()
    );
    Ok(())
}

pub fn augment(args: &AugmentArgs) -> CliResult {
    let manifest = read_manifest(&args.manifest)?;
    let (embedder, _) = make_embedder(&args.embedder)?;
    let (train_records, _) = split(&manifest)?;
    let graphs = graph::build_graphs(&train_records, embedder.as_ref())?;
    let out = match ops(args.aug) {
        None => graphs,
        Some(ops) => {
            let cfg = AugmentConfig {
                removal_fraction_min: args.min_fraction,
                removal_fraction_max: args.max_fraction,
                ops_enabled: ops.to_vec(),
                seed: args.seed,
            };
            let sources: Vec<Source<'_>> = graphs
                .iter()
                .zip(&train_records)
                .map(|(graph, record)| Source { graph, record })
                .collect();
            augment_to_size(&sources, args.target_size, &cfg)?
        }
    };
    write_graphs(&args.out, &out)?;
    let counts = experiment::ClassCounts::of_graphs(&out);
    for c in ClassLabel::ALL {
        println!("{}\t{}", c.name(), counts.get(c));
    }
    println!("total\t{}", out.len());
    Ok(())
}

pub fn train(args: &TrainArgs) -> CliResult {
    let graphs = read_graphs(&args.graphs)?;
    let outcome = train_with_history(&graphs, &train_config(&args.training))?;
    write_output(&args.out, &outcome.params.to_json()?)?;
    if let (Some(first), Some(last)) = (outcome.epoch_losses.first(), outcome.epoch_losses.last()) {
        println!(
            "trained {} epochs on {} graphs, loss {first:.4} -> {last:.4}",
            outcome.epoch_losses.len(),
            graphs.len()
        );
    }
    Ok(())
}

fn metrics_table(m: &Metrics, cm: &ConfusionMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<20} {:>6} {:>6} {:>6}", "Classes (#)", "P", "R", "F1");
    for c in ClassLabel::ALL {
        let cls = &m.per_class[c.index()];
        let name = format!("{} ({})", c.name(), cls.support);
        let _ = writeln!(
            s,
            "{:<20} {:>6.2} {:>6.2} {:>6.2}",
            name, cls.prf.precision, cls.prf.recall, cls.prf.f1
        );
    }
    let rows = [("All", &m.macro_avg), ("Micro", &m.micro_avg)];
    for (label, prf) in rows {
        let name = format!("{label} ({})", cm.total());
        let _ = writeln!(
            s,
            "{:<20} {:>6.2} {:>6.2} {:>6.2}",
            name, prf.precision, prf.recall, prf.f1
        );
    }
    s
}

pub fn eval(args: &EvalArgs) -> CliResult {
    let model = read_model(&args.model)?;
    let graphs = read_graphs(&args.graphs)?;
    let cm = confusion(&model, &graphs)?;
    let metrics = metrics_from_confusion(&cm);
    if let Some(path) = &args.out {
        let body = serde_json::json!({ "confusion": cm, "metrics": metrics });
        let text = serde_json::to_string_pretty(&body).map_err(Error::from)? + "\n";
        write_output(path, &text)?;
    }
    print!("{}", metrics_table(&metrics, &cm));
    Ok(())
}

pub fn predict(args: &PredictArgs) -> CliResult {
    let model = read_model(&args.model)?;
    let records = parse_record_file(&read_input(&args.records)?)?;
    let (embedder, _) = make_embedder(&args.embedder)?;
    let dim = GEOM_DIM + embedder.embed_dim();
    if model.input_dim() != dim {
        return Err(Error::Shape(format!(
            "checkpoint expects feature dim {}, embedder produces {dim}",
            model.input_dim()
        ))
        .into());
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for record in &records {
        let g = build_inference_graph(record, embedder.as_ref())?;
        let (label, confidence) = predict_with_confidence(&g, &model)?;
        writeln!(out, "{}\t{}\t{confidence:.6}", record.id, label.name())?;
    }
    Ok(())
}

pub fn run_experiment(args: &ExperimentArgs) -> CliResult {
    let manifest = read_manifest(&args.manifest)?;
    let (embedder, name) = make_embedder(&args.embedder)?;
    let augment = match (ops(args.aug), args.target_size) {
        (None, None) => None,
        (None, Some(_)) => return Err(usage("--target-size requires --aug rc or --aug all")),
        (Some(_), None) => return Err(usage("--aug rc/all requires --target-size")),
        (Some(ops), Some(target_size)) => Some(AugmentPlan {
            config: AugmentConfig::new(ops, args.training.seed),
            target_size,
        }),
    };
    let cfg = ExperimentConfig {
        embedder: name,
        augment,
        train: train_config(&args.training),
        standardize: args.standardize,
    };
    let output = experiment::run_experiment(&manifest, embedder.as_ref(), &cfg)?;
    write_output(&args.out, &output.report.to_json()?)?;
    if let Some(path) = &args.model_out {
        write_output(path, &output.model.to_json()?)?;
    }
    print!("{}", output.report.text_table());
    Ok(())
}
