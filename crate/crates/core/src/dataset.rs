//! Table records: the on-disk word-box format, validation, class counts and
//! the stratified train/test split.
//!
//! Coordinates are PDF points with the origin at the top-left of the page
//! and y growing downward.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Slack allowed between a word box and its table box, per edge.
pub const BBOX_SLACK: f64 = 2.0;

/// Axis-aligned rectangle `(x1, y1, x2, y2)`. Serialized as a 4-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Rect {
    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Rect { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.y1.is_finite() && self.x2.is_finite() && self.y2.is_finite()
    }

    /// True when `other` lies inside `self` grown by `slack` on every edge.
    pub fn contains_with_slack(&self, other: &Rect, slack: f64) -> bool {
        other.x1 >= self.x1 - slack
            && other.y1 >= self.y1 - slack
            && other.x2 <= self.x2 + slack
            && other.y2 <= self.y2 + slack
    }
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x1, r.y1, r.x2, r.y2]
    }
}

/// One extracted word and its bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordBox {
    pub text: String,
    pub bbox: Rect,
}

impl WordBox {
    pub fn new(text: impl Into<String>, bbox: Rect) -> Self {
        WordBox {
            text: text.into(),
            bbox,
        }
    }
}

/// Table type. The integer codes index rows and columns of the confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    Observation = 0,
    Input = 1,
    Example = 2,
    Other = 3,
}

impl ClassLabel {
    pub const COUNT: usize = 4;
    pub const ALL: [ClassLabel; 4] = [
        ClassLabel::Observation,
        ClassLabel::Input,
        ClassLabel::Example,
        ClassLabel::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ClassLabel> {
        ClassLabel::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Observation => "Observation",
            ClassLabel::Input => "Input",
            ClassLabel::Example => "Example",
            ClassLabel::Other => "Other",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ClassLabel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown class label `{s}`"))
    }
}

/// A table region with its words in extractor reading order.
///
/// `label` is `None` for unclassified tables; those are kept by the parser
/// but never used for training or evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub id: String,
    pub doc_id: String,
    pub page: u32,
    pub table_bbox: Rect,
    pub label: Option<ClassLabel>,
    pub words: Vec<WordBox>,
}

impl TableRecord {
    /// Checks the per-record invariants. Empty word lists are allowed here.
    pub fn validate(&self) -> Result<()> {
        let id = self.id.as_str();
        if id.is_empty() {
            return Err(Error::validation(id, "id", "must be non-empty"));
        }
        let tb = &self.table_bbox;
        if !tb.is_finite() {
            return Err(Error::validation(
                id,
                "table_bbox",
                "coordinates must be finite",
            ));
        }
        if !(tb.x1 < tb.x2 && tb.y1 < tb.y2) {
            return Err(Error::validation(
                id,
                "table_bbox",
                format!(
                    "requires x1 < x2 and y1 < y2, got {:?}",
                    <[f64; 4]>::from(*tb)
                ),
            ));
        }
        for (i, w) in self.words.iter().enumerate() {
            let field = format!("words[{i}]");
            if w.text.trim().is_empty() {
                return Err(Error::validation(id, format!("{field}.text"), "empty text"));
            }
            let b = &w.bbox;
            if !b.is_finite() {
                return Err(Error::validation(
                    id,
                    format!("{field}.bbox"),
                    "coordinates must be finite",
                ));
            }
            if !(b.x1 < b.x2 && b.y1 < b.y2) {
                return Err(Error::validation(
                    id,
                    format!("{field}.bbox"),
                    format!(
                        "requires x1 < x2 and y1 < y2, got {:?}",
                        <[f64; 4]>::from(*b)
                    ),
                ));
            }
            if !tb.contains_with_slack(b, BBOX_SLACK) {
                return Err(Error::validation(
                    id,
                    format!("{field}.bbox"),
                    "word box lies outside the table box",
                ));
            }
        }
        Ok(())
    }
}

/// A validated record set plus the parameters of its train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub split_seed: u64,
    pub train_fraction: f64,
    pub records: Vec<TableRecord>,
}

impl DatasetManifest {
    pub fn new(records: Vec<TableRecord>, split_seed: u64, train_fraction: f64) -> Result<Self> {
        let m = DatasetManifest {
            split_seed,
            train_fraction,
            records,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_fraction(self.train_fraction)?;
        validate_records(&self.records)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let m: DatasetManifest =
            serde_json::from_slice(bytes).map_err(|e| json_error(bytes, &e))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "train_fraction must lie in (0, 1), got {f}"
        )))
    }
}

fn validate_records(records: &[TableRecord]) -> Result<()> {
    let mut seen = HashSet::with_capacity(records.len());
    for r in records {
        r.validate()?;
        if !seen.insert(r.id.as_str()) {
            return Err(Error::validation(
                &r.id,
                "id",
                format!("duplicate record id `{}`", r.id),
            ));
        }
    }
    Ok(())
}

/// Converts a serde_json line/column position into a byte offset.
fn json_error(bytes: &[u8], e: &serde_json::Error) -> Error {
    let (line, column) = (e.line(), e.column());
    let mut offset = 0usize;
    if line > 0 {
        let mut current = 1usize;
        for (i, &b) in bytes.iter().enumerate() {
            if current == line {
                offset = i;
                break;
            }
            if b == b'\n' {
                current += 1;
                offset = i + 1;
            }
        }
        offset = (offset + column.saturating_sub(1)).min(bytes.len());
    }
    Error::Parse {
        offset,
        message: e.to_string(),
    }
}

/// Parses a UTF-8 JSON record file.
///
/// Malformed JSON yields [`Error::Parse`] with a byte offset; schema or
/// invariant violations yield [`Error::Validation`] naming the record and
/// the offending field.
pub fn parse_record_file(bytes: &[u8]) -> Result<Vec<TableRecord>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        offset: e.valid_up_to(),
        message: "input is not valid UTF-8".into(),
    })?;
    if text.starts_with('\u{feff}') {
        return Err(Error::Parse {
            offset: 0,
            message: "byte order mark is not allowed".into(),
        });
    }
    let root: Value = serde_json::from_str(text).map_err(|e| json_error(bytes, &e))?;
    let Value::Array(items) = root else {
        return Err(Error::validation(
            "<root>",
            "<root>",
            "expected a JSON array of records",
        ));
    };
    let mut records = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        records.push(record_from_value(i, item)?);
    }
    validate_records(&records)?;
    Ok(records)
}

fn record_from_value(index: usize, v: Value) -> Result<TableRecord> {
    let id = match v.get("id") {
        Some(Value::String(s)) => s.clone(),
        _ => {
            return Err(Error::validation(
                format!("#{index}"),
                "id",
                "missing or not a string",
            ))
        }
    };
    let obj = v
        .as_object()
        .ok_or_else(|| Error::validation(&id, "<record>", "expected an object"))?;
    for field in ["doc_id", "page", "table_bbox", "label", "words"] {
        if !obj.contains_key(field) {
            return Err(Error::validation(&id, field, "missing field"));
        }
    }
    if let Some(label) = obj.get("label") {
        match label {
            Value::Null => {}
            Value::String(s) => {
                s.parse::<ClassLabel>()
                    .map_err(|m| Error::validation(&id, "label", m))?;
            }
            _ => return Err(Error::validation(&id, "label", "must be a string or null")),
        }
    }
    serde_json::from_value(v.clone()).map_err(|e| {
        let msg = e.to_string();
        let field = ["doc_id", "page", "table_bbox", "words"]
            .into_iter()
            .find(|f| obj_field_bad(obj, f))
            .unwrap_or("<record>");
        Error::validation(&id, field, msg)
    })
}

fn obj_field_bad(obj: &serde_json::Map<String, Value>, field: &str) -> bool {
    let Some(v) = obj.get(field) else { return true };
    match field {
        "doc_id" => !v.is_string(),
        "page" => v.as_u64().is_none_or(|p| p > u32::MAX as u64),
        "table_bbox" => serde_json::from_value::<Rect>(v.clone()).is_err(),
        "words" => serde_json::from_value::<Vec<WordBox>>(v.clone()).is_err(),
        _ => false,
    }
}

/// Serializes records in the record-file schema.
pub fn write_record_file(records: &[TableRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

/// Counts labeled records per class; unlabeled records are ignored.
pub fn class_distribution(records: &[TableRecord]) -> BTreeMap<ClassLabel, usize> {
    let mut counts: BTreeMap<ClassLabel, usize> = ClassLabel::ALL.iter().map(|&c| (c, 0)).collect();
    for label in records.iter().filter_map(|r| r.label) {
        *counts.entry(label).or_default() += 1;
    }
    counts
}

/// Number of training records drawn from a class of `n` records.
pub fn train_quota(n: usize, train_fraction: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let k = (train_fraction * n as f64).round() as usize;
    k.clamp(1, n)
}

/// Splits labeled records so each class keeps its share in the training part.
///
/// Class `c` with `n_c` records contributes `max(1, round(fraction * n_c))`
/// records to train, sampled uniformly under `seed`. Both halves keep the
/// input order.
pub fn stratified_split(
    records: &[TableRecord],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<TableRecord>, Vec<TableRecord>)> {
    check_fraction(train_fraction)?;
    if let Some(r) = records.iter().find(|r| r.label.is_none()) {
        return Err(Error::Unlabeled(r.id.clone()));
    }
    let mut in_train = vec![false; records.len()];
    for class in ClassLabel::ALL {
        let mut members: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label == Some(class))
            .map(|(i, _)| i)
            .collect();
        let quota = train_quota(members.len(), train_fraction);
        let mut rng = rng_from(seed, &[b"split", class.name().as_bytes()]);
        members.shuffle(&mut rng);
        for &i in &members[..quota] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<_>, Vec<_>) =
        records.iter().cloned().zip(in_train).partition(|(_, t)| *t);
    Ok((
        train.into_iter().map(|(r, _)| r).collect(),
        test.into_iter().map(|(r, _)| r).collect(),
    ))
}
