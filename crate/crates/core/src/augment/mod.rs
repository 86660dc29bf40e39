//! Label-preserving graph augmentation and training-set expansion.

mod removal;
mod structure;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, TableRecord};
use crate::error::{Error, Result};
use crate::graph::TableGraph;
use crate::seed::rng_from;

pub use removal::{remove_random_edges, remove_random_nodes, RemovalRange};
pub use structure::{
    column_members, detect_columns, detect_rows, swap_columns, swap_rows, ColumnSpans, RowGroups,
    DEFAULT_RESOLUTION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AugmentOp {
    NodeRemoval,
    EdgeRemoval,
    ColumnSwap,
    RowSwap,
}

impl AugmentOp {
    pub const ALL: [AugmentOp; 4] = [
        AugmentOp::NodeRemoval,
        AugmentOp::EdgeRemoval,
        AugmentOp::ColumnSwap,
        AugmentOp::RowSwap,
    ];
    /// Row and column inversion only.
    pub const ROWS_COLUMNS: [AugmentOp; 2] = [AugmentOp::ColumnSwap, AugmentOp::RowSwap];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub removal_fraction_min: f64,
    pub removal_fraction_max: f64,
    pub ops_enabled: Vec<AugmentOp>,
    pub seed: u64,
}

impl AugmentConfig {
    pub fn new(ops_enabled: &[AugmentOp], seed: u64) -> Self {
        let r = RemovalRange::default();
        AugmentConfig {
            removal_fraction_min: r.min,
            removal_fraction_max: r.max,
            ops_enabled: ops_enabled.to_vec(),
            seed,
        }
    }

    pub fn removal_range(&self) -> RemovalRange {
        RemovalRange {
            min: self.removal_fraction_min,
            max: self.removal_fraction_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.removal_range().validate()?;
        if self.ops_enabled.is_empty() {
            return Err(Error::Config(
                "at least one augmentation op must be enabled".into(),
            ));
        }
        Ok(())
    }
}

/// A graph paired with the record it was built from.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub graph: &'a TableGraph,
    pub record: &'a TableRecord,
}

fn valid_pairs(groups: &[Vec<usize>]) -> Vec<usize> {
    groups
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(i, _)| i)
        .collect()
}

/// Applies `op` to a source graph. Returns `None` when the op cannot change
/// this graph (too few nodes, edges, or populated columns/rows).
pub fn apply_op(
    op: AugmentOp,
    src: Source<'_>,
    range: RemovalRange,
    rng: &mut impl Rng,
) -> Result<Option<TableGraph>> {
    let g = src.graph;
    let out = match op {
        AugmentOp::NodeRemoval => (g.n() >= 2).then(|| remove_random_nodes(g, range, rng)),
        AugmentOp::EdgeRemoval => (!g.edges.is_empty()).then(|| remove_random_edges(g, range, rng)),
        AugmentOp::ColumnSwap => {
            let spans = detect_columns(src.record, DEFAULT_RESOLUTION);
            let candidates = valid_pairs(&column_members(src.record, &spans));
            match candidates
                .choose_multiple(rng, 2)
                .copied()
                .collect::<Vec<_>>()[..]
            {
                [i, j] => Some(swap_columns(g, src.record, &spans, i, j)?),
                _ => None,
            }
        }
        AugmentOp::RowSwap => {
            let rows = detect_rows(src.record);
            let candidates = valid_pairs(&rows.0);
            match candidates
                .choose_multiple(rng, 2)
                .copied()
                .collect::<Vec<_>>()[..]
            {
                [i, j] => Some(swap_rows(g, src.record, &rows, i, j)?),
                _ => None,
            }
        }
    };
    Ok(out)
}

/// Assigns `extra` new samples to classes, always topping up the currently
/// smallest class (ties to the lower class index).
fn allocate(counts: &BTreeMap<ClassLabel, usize>, extra: usize) -> Vec<ClassLabel> {
    let mut counts = counts.clone();
    let mut schedule = Vec::with_capacity(extra);
    for _ in 0..extra {
        let (&class, count) = counts
            .iter_mut()
            .min_by_key(|(c, n)| (**n, c.index()))
            .expect("at least one class");
        *count += 1;
        schedule.push(class);
    }
    schedule
}

/// Grows a training set to `target` graphs.
///
/// Originals are kept first. New graphs go preferentially to the smallest
/// classes; within a class, sources are used round-robin. Each new graph
/// applies one op drawn uniformly from the enabled ops that can change the
/// source, using a generator seeded from `(cfg.seed, source id, index)`.
pub fn augment_to_size(
    train: &[Source<'_>],
    target: usize,
    cfg: &AugmentConfig,
) -> Result<Vec<TableGraph>> {
    cfg.validate()?;
    if target < train.len() {
        return Err(Error::Config(format!(
            "target size {target} is smaller than the training set ({})",
            train.len()
        )));
    }
    let mut by_class: BTreeMap<ClassLabel, Vec<usize>> = BTreeMap::new();
    for (i, s) in train.iter().enumerate() {
        by_class
            .entry(s.graph.require_label()?)
            .or_default()
            .push(i);
    }
    let mut out: Vec<TableGraph> = train.iter().map(|s| s.graph.clone()).collect();
    if target == train.len() {
        return Ok(out);
    }
    if by_class.is_empty() {
        return Err(Error::Config("cannot augment an empty training set".into()));
    }
    let counts = by_class.iter().map(|(c, v)| (*c, v.len())).collect();
    let mut cursor: BTreeMap<ClassLabel, usize> = BTreeMap::new();
    let range = cfg.removal_range();

    for (k, class) in allocate(&counts, target - train.len())
        .into_iter()
        .enumerate()
    {
        let members = &by_class[&class];
        let turn = cursor.entry(class).or_default();
        let src = train[members[*turn % members.len()]];
        *turn += 1;

        let mut rng = rng_from(
            cfg.seed,
            &[src.graph.record_id.as_bytes(), &(k as u64).to_le_bytes()],
        );
        let mut ops = cfg.ops_enabled.clone();
        ops.sort();
        ops.dedup();
        ops.shuffle(&mut rng);
        let mut produced = None;
        for op in ops {
            if let Some(g) = apply_op(op, src, range, &mut rng)? {
                produced = Some(g);
                break;
            }
        }
        let mut g = produced.unwrap_or_else(|| src.graph.clone());
        g.record_id = format!("{}#aug{k}", src.graph.record_id);
        out.push(g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Rect, WordBox};
    use crate::graph::{build_graph, HashEmbedder};

    fn grid_record(id: &str, label: ClassLabel, cols: usize, rows: usize) -> TableRecord {
        let mut words = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let (x, y) = (c as f64 * 20.0, r as f64 * 15.0);
                words.push(WordBox::new(
                    format!("{id}{r}{c}"),
                    Rect::new(x, y, x + 12.0, y + 10.0),
                ));
            }
        }
        TableRecord {
            id: id.into(),
            doc_id: "d".into(),
            page: 0,
            table_bbox: Rect::new(0.0, 0.0, cols as f64 * 20.0, rows as f64 * 15.0),
            label: Some(label),
            words,
        }
    }

    fn sample_set() -> (Vec<TableRecord>, Vec<TableGraph>) {
        let e = HashEmbedder::new(3, 0);
        let mut records = Vec::new();
        for i in 0..9 {
            records.push(grid_record(&format!("o{i}"), ClassLabel::Observation, 3, 3));
        }
        records.push(grid_record("i0", ClassLabel::Input, 2, 4));
        records.push(grid_record("e0", ClassLabel::Example, 4, 2));
        let graphs = records
            .iter()
            .map(|r| build_graph(r, &e).unwrap())
            .collect();
        (records, graphs)
    }

    fn sources<'a>(records: &'a [TableRecord], graphs: &'a [TableGraph]) -> Vec<Source<'a>> {
        graphs
            .iter()
            .zip(records)
            .map(|(graph, record)| Source { graph, record })
            .collect()
    }

    #[test]
    fn target_equal_to_size_is_identity() {
        let (r, g) = sample_set();
        let out = augment_to_size(
            &sources(&r, &g),
            g.len(),
            &AugmentConfig::new(&AugmentOp::ALL, 1),
        )
        .unwrap();
        assert_eq!(out, g);
    }

    #[test]
    fn grows_to_target_and_rebalances() {
        let (r, g) = sample_set();
        let out = augment_to_size(
            &sources(&r, &g),
            30,
            &AugmentConfig::new(&AugmentOp::ALL, 1),
        )
        .unwrap();
        assert_eq!(out.len(), 30);
        assert_eq!(&out[..g.len()], &g[..]);
        let mut per_class = BTreeMap::new();
        for a in &out[g.len()..] {
            let base = a.record_id.split('#').next().unwrap();
            let src = g.iter().find(|s| s.record_id == base).unwrap();
            assert_eq!(a.label, src.label);
            *per_class.entry(a.label.unwrap()).or_insert(0) += 1;
        }
        // 9/1/1 topped up with 19: minority classes are filled first.
        assert_eq!(per_class[&ClassLabel::Input], 9);
        assert_eq!(per_class[&ClassLabel::Example], 9);
        assert_eq!(
            per_class
                .get(&ClassLabel::Observation)
                .copied()
                .unwrap_or(0),
            1
        );
    }

    #[test]
    fn deterministic_under_seed() {
        let (r, g) = sample_set();
        let cfg = AugmentConfig::new(&AugmentOp::ALL, 42);
        let a = augment_to_size(&sources(&r, &g), 40, &cfg).unwrap();
        let b = augment_to_size(&sources(&r, &g), 40, &cfg).unwrap();
        assert_eq!(a, b);
        let c = augment_to_size(
            &sources(&r, &g),
            40,
            &AugmentConfig::new(&AugmentOp::ALL, 43),
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_small_target_and_empty_ops() {
        let (r, g) = sample_set();
        assert!(
            augment_to_size(&sources(&r, &g), 3, &AugmentConfig::new(&AugmentOp::ALL, 0)).is_err()
        );
        assert!(augment_to_size(&sources(&r, &g), 20, &AugmentConfig::new(&[], 0)).is_err());
    }

    #[test]
    fn row_column_ops_only_permute_features() {
        let (r, g) = sample_set();
        let out = augment_to_size(
            &sources(&r, &g),
            25,
            &AugmentConfig::new(&AugmentOp::ROWS_COLUMNS, 5),
        )
        .unwrap();
        for a in &out[g.len()..] {
            let base = a.record_id.split('#').next().unwrap();
            let src = g.iter().find(|s| s.record_id == base).unwrap();
            assert_eq!(a.edges, src.edges);
            let mut x: Vec<Vec<u64>> = (0..a.n())
                .map(|i| a.features.row(i).iter().map(|v| v.to_bits()).collect())
                .collect();
            let mut y: Vec<Vec<u64>> = (0..src.n())
                .map(|i| src.features.row(i).iter().map(|v| v.to_bits()).collect())
                .collect();
            x.sort();
            y.sort();
            assert_eq!(x, y);
            assert_ne!(a.features, src.features);
        }
    }
}
