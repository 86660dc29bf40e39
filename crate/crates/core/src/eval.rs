//! Confusion matrices and precision / recall / F1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::ClassLabel;
use crate::error::Result;
use crate::gnn::{predict, ModelParams};
use crate::graph::TableGraph;

const K: usize = ClassLabel::COUNT;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub [[u64; K]; K]);

impl ConfusionMatrix {
    pub fn record(&mut self, truth: ClassLabel, predicted: ClassLabel) {
        self.0[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn true_positives(&self, c: usize) -> u64 {
        self.0[c][c]
    }

    /// Predicted as `c` but belonging elsewhere.
    pub fn false_positives(&self, c: usize) -> u64 {
        (0..K).filter(|&r| r != c).map(|r| self.0[r][c]).sum()
    }

    /// Belonging to `c` but predicted elsewhere.
    pub fn false_negatives(&self, c: usize) -> u64 {
        (0..K).filter(|&p| p != c).map(|p| self.0[c][p]).sum()
    }

    pub fn support(&self, c: usize) -> u64 {
        self.0[c].iter().sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    #[serde(rename = "P")]
    pub precision: f64,
    #[serde(rename = "R")]
    pub recall: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    #[serde(flatten)]
    pub prf: Prf,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Indexed by class code.
    pub per_class: [ClassMetrics; K],
    /// Unweighted mean over the four classes.
    pub macro_avg: Prf,
    /// Pooled counts; equals accuracy for single-label predictions.
    pub micro_avg: Prf,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Per-class, macro and micro P/R/F1. Zero denominators yield 0.
pub fn metrics_from_confusion(cm: &ConfusionMatrix) -> Metrics {
    let per_class: [ClassMetrics; K] = std::array::from_fn(|c| {
        let tp = cm.true_positives(c);
        let precision = ratio(tp, tp + cm.false_positives(c));
        let recall = ratio(tp, tp + cm.false_negatives(c));
        ClassMetrics {
            prf: Prf {
                precision,
                recall,
                f1: f1(precision, recall),
            },
            support: cm.support(c),
        }
    });
    let mean = |f: fn(&Prf) -> f64| per_class.iter().map(|m| f(&m.prf)).sum::<f64>() / K as f64;
    let macro_avg = Prf {
        precision: mean(|p| p.precision),
        recall: mean(|p| p.recall),
        f1: mean(|p| p.f1),
    };
    let tp: u64 = (0..K).map(|c| cm.true_positives(c)).sum();
    let fp: u64 = (0..K).map(|c| cm.false_positives(c)).sum();
    let fn_: u64 = (0..K).map(|c| cm.false_negatives(c)).sum();
    let (mp, mr) = (ratio(tp, tp + fp), ratio(tp, tp + fn_));
    Metrics {
        per_class,
        macro_avg,
        micro_avg: Prf {
            precision: mp,
            recall: mr,
            f1: f1(mp, mr),
        },
    }
}

/// Evaluates `model` on labeled graphs.
pub fn confusion(model: &ModelParams, graphs: &[TableGraph]) -> Result<ConfusionMatrix> {
    let pairs: Vec<(ClassLabel, ClassLabel)> = graphs
        .par_iter()
        .map(|g| Ok((g.require_label()?, predict(g, model)?)))
        .collect::<Result<_>>()?;
    let mut cm = ConfusionMatrix::default();
    for (t, p) in pairs {
        cm.record(t, p);
    }
    Ok(cm)
}
