//! Table records to graphs: one node per word, visibility edges, and node
//! features made of normalized box geometry followed by a text embedding.

pub mod embed;
pub mod features;
pub mod visibility;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Rect, TableRecord};
use crate::error::{Error, Result};
use crate::gnn::Matrix;

pub use embed::{load_vector_table, Embedder, HashEmbedder, OovPolicy, VectorTable};
pub use features::{geom_features, GeomFeatures, GEOM_DIM};
pub use visibility::visibility_edges;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableGraph {
    pub record_id: String,
    /// `None` only for graphs built for inference.
    pub label: Option<ClassLabel>,
    /// `n × (6 + embed_dim)`, one row per word in record order.
    pub features: Matrix,
    /// Undirected, `i < j`, sorted, no duplicates.
    pub edges: Vec<(usize, usize)>,
}

impl TableGraph {
    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// Checks edge-list and feature invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let mut prev: Option<(usize, usize)> = None;
        for &(i, j) in &self.edges {
            if i >= j || j >= n {
                return Err(Error::Shape(format!(
                    "graph `{}`: bad edge ({i}, {j}) for n = {n}",
                    self.record_id
                )));
            }
            if prev.is_some_and(|p| p >= (i, j)) {
                return Err(Error::Shape(format!(
                    "graph `{}`: edges not sorted or duplicated at ({i}, {j})",
                    self.record_id
                )));
            }
            prev = Some((i, j));
        }
        if self.features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape(format!(
                "graph `{}`: non-finite feature",
                self.record_id
            )));
        }
        Ok(())
    }

    pub fn require_label(&self) -> Result<ClassLabel> {
        self.label
            .ok_or_else(|| Error::Unlabeled(self.record_id.clone()))
    }
}

/// Builds the graph of a labeled, non-empty record.
pub fn build_graph(record: &TableRecord, embedder: &dyn Embedder) -> Result<TableGraph> {
    if record.label.is_none() {
        return Err(Error::Unlabeled(record.id.clone()));
    }
    build_inference_graph(record, embedder)
}

/// Like [`build_graph`] but accepts unlabeled records.
pub fn build_inference_graph(record: &TableRecord, embedder: &dyn Embedder) -> Result<TableGraph> {
    if record.words.is_empty() {
        return Err(Error::EmptyRecord(record.id.clone()));
    }
    let dim = GEOM_DIM + embedder.embed_dim();
    let mut data = Vec::with_capacity(record.words.len() * dim);
    for word in &record.words {
        data.extend(geom_features(&word.bbox, &record.table_bbox)?.to_array());
        let v = embedder.embed(&word.text)?;
        if v.len() != embedder.embed_dim() {
            return Err(Error::Shape(format!(
                "embedder returned {} values for `{}`, expected {}",
                v.len(),
                word.text,
                embedder.embed_dim()
            )));
        }
        data.extend(v);
    }
    let boxes: Vec<Rect> = record.words.iter().map(|w| w.bbox).collect();
    Ok(TableGraph {
        record_id: record.id.clone(),
        label: record.label,
        features: Matrix::from_vec(record.words.len(), dim, data)?,
        edges: visibility_edges(&boxes),
    })
}

/// Builds graphs for many labeled records in parallel, preserving order.
pub fn build_graphs(records: &[TableRecord], embedder: &dyn Embedder) -> Result<Vec<TableGraph>> {
    records
        .par_iter()
        .map(|r| build_graph(r, embedder))
        .collect()
}

/// Per-column standardization fitted on a set of graphs.
///
/// Off by default in experiments; columns with zero variance are only centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(graphs: &[TableGraph]) -> Result<Self> {
        let dim = graphs
            .first()
            .map(TableGraph::feature_dim)
            .ok_or_else(|| Error::Config("cannot fit a standardizer on zero graphs".into()))?;
        let mut sum = vec![0.0; dim];
        let mut sq = vec![0.0; dim];
        let mut count = 0usize;
        for g in graphs {
            if g.feature_dim() != dim {
                return Err(Error::Shape("inconsistent feature dimensions".into()));
            }
            for r in 0..g.n() {
                for (c, &v) in g.features.row(r).iter().enumerate() {
                    sum[c] += v;
                    sq[c] += v * v;
                }
                count += 1;
            }
        }
        let n = count as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let var = (s / n - m * m).max(0.0);
                if var > 1e-24 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, g: &TableGraph) -> Result<TableGraph> {
        if g.feature_dim() != self.mean.len() {
            return Err(Error::Shape(format!(
                "standardizer fitted on dim {}, graph has {}",
                self.mean.len(),
                g.feature_dim()
            )));
        }
        let mut out = g.clone();
        for r in 0..out.n() {
            for (c, v) in out.features.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[c]) / self.std[c];
            }
        }
        Ok(out)
    }
}
