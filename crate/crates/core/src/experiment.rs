//! End-to-end run: split, optional augmentation, training, evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::augment::{augment_to_size, AugmentConfig, Source};
use crate::dataset::{
    class_distribution, stratified_split, ClassLabel, DatasetManifest, TableRecord,
};
use crate::error::{Error, Result};
use crate::eval::{confusion, metrics_from_confusion, ClassMetrics, ConfusionMatrix, Prf};
use crate::gnn::ModelParams;
use crate::graph::{build_graphs, Embedder, Standardizer, TableGraph};
use crate::train::{train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentPlan {
    pub config: AugmentConfig,
    pub target_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Free-form description of the embedder, echoed in the report.
    pub embedder: String,
    pub augment: Option<AugmentPlan>,
    pub train: TrainConfig,
    /// Standardize node features with statistics of the training graphs.
    pub standardize: bool,
}

/// Per-class counts keyed by class name, in class-code order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct ClassCounts {
    pub observation: usize,
    pub input: usize,
    pub example: usize,
    pub other: usize,
}

impl ClassCounts {
    pub fn from_map(m: &BTreeMap<ClassLabel, usize>) -> Self {
        let get = |c| m.get(&c).copied().unwrap_or(0);
        ClassCounts {
            observation: get(ClassLabel::Observation),
            input: get(ClassLabel::Input),
            example: get(ClassLabel::Example),
            other: get(ClassLabel::Other),
        }
    }

    pub fn of_graphs(graphs: &[TableGraph]) -> Self {
        let mut m = BTreeMap::new();
        for label in graphs.iter().filter_map(|g| g.label) {
            *m.entry(label).or_insert(0) += 1;
        }
        ClassCounts::from_map(&m)
    }

    pub fn get(&self, c: ClassLabel) -> usize {
        match c {
            ClassLabel::Observation => self.observation,
            ClassLabel::Input => self.input,
            ClassLabel::Example => self.example,
            ClassLabel::Other => self.other,
        }
    }

    pub fn total(&self) -> usize {
        self.observation + self.input + self.example + self.other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub all: ClassCounts,
    pub train: ClassCounts,
    pub test: ClassCounts,
    /// Records dropped before splitting (unlabeled or without words).
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct PerClass {
    pub observation: ClassMetrics,
    pub input: ClassMetrics,
    pub example: ClassMetrics,
    pub other: ClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    pub split_seed: u64,
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ReportConfig,
    pub class_distribution: Distribution,
    pub train_size: usize,
    pub test_size: usize,
    pub confusion: ConfusionMatrix,
    pub per_class: PerClass,
    #[serde(rename = "macro")]
    pub macro_avg: Prf,
    #[serde(rename = "micro")]
    pub micro_avg: Prf,
    pub test_ids: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn class_metrics(&self, c: ClassLabel) -> &ClassMetrics {
        match c {
            ClassLabel::Observation => &self.per_class.observation,
            ClassLabel::Input => &self.per_class.input,
            ClassLabel::Example => &self.per_class.example,
            ClassLabel::Other => &self.per_class.other,
        }
    }

    /// Plain-text table: one row per class with its test support, then the
    /// macro average.
    pub fn text_table(&self) -> String {
        let mut s = String::new();
        let aug = match &self.config.experiment.augment {
            None => "No Aug.".to_string(),
            Some(plan) => format!("{:?}", plan.config.ops_enabled),
        };
        let _ = writeln!(
            s,
            "{aug} | {} | train size: {}",
            self.config.experiment.embedder, self.train_size
        );
        let _ = writeln!(s, "{:<20} {:>6} {:>6} {:>6}", "Classes (#)", "P", "R", "F1");
        for c in ClassLabel::ALL {
            let m = self.class_metrics(c);
            let name = format!("{} ({})", c.name(), m.support);
            let _ = writeln!(
                s,
                "{:<20} {:>6.2} {:>6.2} {:>6.2}",
                name, m.prf.precision, m.prf.recall, m.prf.f1
            );
        }
        let all = format!("All ({})", self.test_size);
        let _ = writeln!(
            s,
            "{:<20} {:>6.2} {:>6.2} {:>6.2}",
            all, self.macro_avg.precision, self.macro_avg.recall, self.macro_avg.f1
        );
        s
    }
}

/// Everything a run produces besides the report.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: Report,
    pub model: ModelParams,
    pub standardizer: Option<Standardizer>,
}

/// Labeled records that have at least one word.
pub fn usable_records(records: &[TableRecord]) -> Vec<TableRecord> {
    records
        .iter()
        .filter(|r| r.label.is_some() && !r.words.is_empty())
        .cloned()
        .collect()
}

pub fn run_experiment(
    manifest: &DatasetManifest,
    embedder: &dyn Embedder,
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutput> {
    manifest.validate()?;
    cfg.train.validate()?;
    let usable = usable_records(&manifest.records);
    let discarded = manifest.records.len() - usable.len();
    if usable.is_empty() {
        return Err(Error::Config(
            "manifest contains no usable labeled records".into(),
        ));
    }
    let (train_records, test_records) =
        stratified_split(&usable, manifest.train_fraction, manifest.split_seed)?;
    if test_records.is_empty() {
        return Err(Error::Config("split left no records for testing".into()));
    }

    let train_graphs = build_graphs(&train_records, embedder)?;
    let test_graphs = build_graphs(&test_records, embedder)?;

    let mut train_set = match &cfg.augment {
        None => train_graphs,
        Some(plan) => {
            let sources: Vec<Source<'_>> = train_graphs
                .iter()
                .zip(&train_records)
                .map(|(graph, record)| Source { graph, record })
                .collect();
            augment_to_size(&sources, plan.target_size, &plan.config)?
        }
    };
    let mut test_set = test_graphs;

    let standardizer = if cfg.standardize {
        let s = Standardizer::fit(&train_set)?;
        train_set = train_set
            .iter()
            .map(|g| s.apply(g))
            .collect::<Result<_>>()?;
        test_set = test_set.iter().map(|g| s.apply(g)).collect::<Result<_>>()?;
        Some(s)
    } else {
        None
    };

    let model = train(&train_set, &cfg.train)?;
    let cm = confusion(&model, &test_set)?;
    let metrics = metrics_from_confusion(&cm);
    let [observation, input, example, other] = metrics.per_class;

    let report = Report {
        config: ReportConfig {
            experiment: cfg.clone(),
            split_seed: manifest.split_seed,
            train_fraction: manifest.train_fraction,
        },
        class_distribution: Distribution {
            all: ClassCounts::from_map(&class_distribution(&usable)),
            train: ClassCounts::of_graphs(&train_set),
            test: ClassCounts::from_map(&class_distribution(&test_records)),
            discarded,
        },
        train_size: train_set.len(),
        test_size: test_set.len(),
        confusion: cm,
        per_class: PerClass {
            observation,
            input,
            example,
            other,
        },
        macro_avg: metrics.macro_avg,
        micro_avg: metrics.micro_avg,
        test_ids: test_records.iter().map(|r| r.id.clone()).collect(),
    };
    Ok(ExperimentOutput {
        report,
        model,
        standardizer,
    })
}
