//! Approximate table structure (columns and rows) and feature swaps between
//! structural groups.
//!
//! Columns come from a horizontal projection profile of the word boxes; rows
//! come from the extractor's reading order, where a word that starts left of
//! its predecessor opens a new row.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::TableRecord;
use crate::error::{Error, Result};
use crate::graph::TableGraph;

/// Default projection resolution in points per bin.
pub const DEFAULT_RESOLUTION: f64 = 1.0;

/// Half-open `[start, end)` x-intervals in table coordinates, sorted and disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpans(pub Vec<(f64, f64)>);

impl ColumnSpans {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the span containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        self.0.iter().position(|&(a, b)| a <= x && x < b)
    }
}

/// Groups of node indices, one per detected row, in reading order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowGroups(pub Vec<Vec<usize>>);

impl RowGroups {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Projection-profile column detection.
///
/// An occupancy vector of `ceil(width / resolution)` bins is filled with 1
/// wherever a word's `[x1, x2]` extent falls; maximal runs of 1s become
/// columns.
pub fn detect_columns(record: &TableRecord, resolution: f64) -> ColumnSpans {
    let tb = record.table_bbox;
    let bins = (tb.width() / resolution).ceil().max(0.0) as usize;
    let mut occupied = vec![false; bins];
    for w in &record.words {
        let lo = ((w.bbox.x1 - tb.x1) / resolution).floor().max(0.0) as usize;
        let hi = (((w.bbox.x2 - tb.x1) / resolution).ceil().max(0.0) as usize).min(bins);
        for cell in occupied.iter_mut().take(hi).skip(lo) {
            *cell = true;
        }
    }
    let to_x = |bin: usize| tb.x1 + bin as f64 * resolution;
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &on) in occupied.iter().enumerate() {
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push((to_x(s), to_x(i)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((to_x(s), to_x(bins)));
    }
    ColumnSpans(spans)
}

/// Reading-order row detection: word `k` opens a row when its `x1` is lower
/// than the previous word's, or when it lies entirely below the previous
/// word (single-column tables never move left).
pub fn detect_rows(record: &TableRecord) -> RowGroups {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (k, w) in record.words.iter().enumerate() {
        let new_row = k == 0 || {
            let prev = &record.words[k - 1].bbox;
            w.bbox.x1 < prev.x1 || w.bbox.y1 >= prev.y2
        };
        if new_row {
            rows.push(vec![k]);
        } else if let Some(last) = rows.last_mut() {
            last.push(k);
        }
    }
    RowGroups(rows)
}

/// Node indices whose box center lies in each span.
pub fn column_members(record: &TableRecord, spans: &ColumnSpans) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); spans.len()];
    for (i, w) in record.words.iter().enumerate() {
        if let Some(s) = spans.locate(w.bbox.center().0) {
            members[s].push(i);
        }
    }
    members
}

fn check_alignment(g: &TableGraph, record: &TableRecord) -> Result<()> {
    if g.n() != record.words.len() {
        return Err(Error::Shape(format!(
            "graph `{}` has {} nodes but record `{}` has {} words",
            g.record_id,
            g.n(),
            record.id,
            record.words.len()
        )));
    }
    Ok(())
}

fn check_pair(i: usize, j: usize, len: usize, what: &str) -> Result<()> {
    if i == j || i >= len || j >= len {
        return Err(Error::Config(format!(
            "invalid {what} pair ({i}, {j}) for {len} {what}s"
        )));
    }
    Ok(())
}

/// Exchanges whole feature rows between two node groups, pairing by rank.
/// Surplus nodes of the longer group keep their rows.
fn swap_groups(g: &TableGraph, a: &[usize], b: &[usize]) -> TableGraph {
    let mut out = g.clone();
    for (&x, &y) in a.iter().zip(b) {
        out.features.swap_rows(x, y);
    }
    out
}

fn by_position(
    record: &TableRecord,
    key: fn(f64, f64) -> (f64, f64),
) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&p, &q| {
        let (px, py) = record.words[p].bbox.center();
        let (qx, qy) = record.words[q].bbox.center();
        key(px, py)
            .partial_cmp(&key(qx, qy))
            .unwrap_or(Ordering::Equal)
            .then(p.cmp(&q))
    }
}

/// Swaps the contents of columns `i` and `j`.
///
/// Inside each column nodes are ranked top-to-bottom then left-to-right by
/// box center; nodes of equal rank exchange feature rows. Edges are kept.
/// Returns an unchanged copy when either column holds no node center.
pub fn swap_columns(
    g: &TableGraph,
    record: &TableRecord,
    spans: &ColumnSpans,
    i: usize,
    j: usize,
) -> Result<TableGraph> {
    check_alignment(g, record)?;
    check_pair(i, j, spans.len(), "column")?;
    let mut members = column_members(record, spans);
    let order = by_position(record, |x, y| (y, x));
    members[i].sort_by(&order);
    members[j].sort_by(&order);
    if members[i].is_empty() || members[j].is_empty() {
        return Ok(g.clone());
    }
    Ok(swap_groups(g, &members[i], &members[j]))
}

/// Swaps the contents of rows `i` and `j`, pairing nodes by left-to-right rank.
pub fn swap_rows(
    g: &TableGraph,
    record: &TableRecord,
    rows: &RowGroups,
    i: usize,
    j: usize,
) -> Result<TableGraph> {
    check_alignment(g, record)?;
    check_pair(i, j, rows.len(), "row")?;
    let order = by_position(record, |x, _| (x, 0.0));
    let mut a = rows.0[i].clone();
    let mut b = rows.0[j].clone();
    if a.is_empty() || b.is_empty() {
        return Ok(g.clone());
    }
    if a.iter().chain(&b).any(|&v| v >= g.n()) {
        return Err(Error::Shape("row group refers to a missing node".into()));
    }
    a.sort_by(&order);
    b.sort_by(&order);
    Ok(swap_groups(g, &a, &b))
}
