use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TableGraph;

/// Bounds of the fraction of nodes or edges removed in one augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemovalRange {
    pub min: f64,
    pub max: f64,
}

impl Default for RemovalRange {
    fn default() -> Self {
        RemovalRange {
            min: 0.01,
            max: 0.20,
        }
    }
}

impl RemovalRange {
    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.min && self.min <= self.max && self.max < 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "removal fractions must satisfy 0 < min <= max < 1, got [{}, {}]",
                self.min, self.max
            )))
        }
    }

    /// Draws `f` uniformly from `[min, max]` and returns `max(1, round(f * total))`.
    pub fn sample_count(&self, total: usize, rng: &mut impl Rng) -> usize {
        let f = rng.gen_range(self.min..=self.max);
        ((f * total as f64).round() as usize).max(1)
    }
}

/// Drops a random subset of nodes together with their incident edges.
///
/// Surviving nodes keep their relative order. No edges are added. Graphs with
/// fewer than two nodes are returned unchanged.
pub fn remove_random_nodes(g: &TableGraph, range: RemovalRange, rng: &mut impl Rng) -> TableGraph {
    let n = g.n();
    if n < 2 {
        return g.clone();
    }
    let k = range.sample_count(n, rng).min(n - 1);
    let mut removed = vec![false; n];
    for i in sample(rng, n, k) {
        removed[i] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| !removed[i]).collect();
    let mut new_index = vec![usize::MAX; n];
    for (new, &old) in keep.iter().enumerate() {
        new_index[old] = new;
    }
    let edges = g
        .edges
        .iter()
        .filter(|&&(i, j)| !removed[i] && !removed[j])
        .map(|&(i, j)| (new_index[i], new_index[j]))
        .collect();
    TableGraph {
        record_id: g.record_id.clone(),
        label: g.label,
        features: g.features.select_rows(&keep),
        edges,
    }
}

/// Drops a random subset of edges; nodes and features are untouched.
pub fn remove_random_edges(g: &TableGraph, range: RemovalRange, rng: &mut impl Rng) -> TableGraph {
    let m = g.edges.len();
    if m == 0 {
        return g.clone();
    }
    let k = range.sample_count(m, rng).min(m);
    let mut removed = vec![false; m];
    for i in sample(rng, m, k) {
        removed[i] = true;
    }
    TableGraph {
        edges: g
            .edges
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(&e, _)| e)
            .collect(),
        ..g.clone()
    }
}
