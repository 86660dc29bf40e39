//! Synthetic tables with known structure, for tests and demo runs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{ClassLabel, Rect, TableRecord, WordBox};
use crate::error::Result;
use crate::gnn::Matrix;
use crate::graph::{visibility_edges, TableGraph};
use crate::seed::rng_from;

/// Layout parameters for [`grid_table`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub cols: usize,
    pub rows: usize,
    /// Minimum horizontal and vertical gap between neighbouring cells.
    pub min_gap: f64,
}

/// A table with one word per cell in a `rows × cols` grid, listed in reading
/// order (row by row, left to right).
///
/// Column slots are separated by at least `min_gap` points and every word of
/// a column overlaps the middle of its slot, so a projection profile sees
/// exactly `cols` runs. Rows are separated the same way vertically.
pub fn grid_table(
    id: &str,
    label: Option<ClassLabel>,
    spec: GridSpec,
    texts: &mut dyn FnMut(usize, usize) -> String,
    rng: &mut impl Rng,
) -> TableRecord {
    let origin = (rng.gen_range(40.0..120.0), rng.gen_range(80.0..500.0));
    let mut xs = Vec::with_capacity(spec.cols);
    let mut x = origin.0;
    for _ in 0..spec.cols {
        let w: f64 = rng.gen_range(25.0..70.0);
        xs.push((x, w));
        x += w + spec.min_gap + rng.gen_range(0.0..12.0);
    }
    let mut ys = Vec::with_capacity(spec.rows);
    let mut y = origin.1;
    for _ in 0..spec.rows {
        let h: f64 = rng.gen_range(8.0..12.0);
        ys.push((y, h));
        y += h + spec.min_gap + rng.gen_range(0.0..4.0);
    }
    let mut words = Vec::with_capacity(spec.cols * spec.rows);
    for (r, &(y0, h)) in ys.iter().enumerate() {
        for (c, &(x0, w)) in xs.iter().enumerate() {
            let x1 = x0 + rng.gen_range(0.0..0.3) * w;
            let x2 = x0 + rng.gen_range(0.6..1.0) * w;
            let y1 = y0 + rng.gen_range(0.0..0.15) * h;
            let y2 = y0 + rng.gen_range(0.85..1.0) * h;
            words.push(WordBox::new(texts(r, c), Rect::new(x1, y1, x2, y2)));
        }
    }
    let (last_x, last_w) = xs.last().copied().unwrap_or((origin.0, 0.0));
    let (last_y, last_h) = ys.last().copied().unwrap_or((origin.1, 0.0));
    TableRecord {
        id: id.to_string(),
        doc_id: format!("doc-{id}"),
        page: 0,
        table_bbox: Rect::new(origin.0, origin.1, last_x + last_w, last_y + last_h),
        label,
        words,
    }
}

/// Graphs whose class is written into the last four feature columns as a
/// one-hot code; the first six columns are random geometry.
pub fn separable_graphs(count: usize, seed: u64) -> Result<Vec<TableGraph>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = rng_from(seed, &[b"separable", &(i as u64).to_le_bytes()]);
        let label = ClassLabel::ALL[i % ClassLabel::COUNT];
        let spec = GridSpec {
            cols: rng.gen_range(1..=4),
            rows: rng.gen_range(1..=4),
            min_gap: 2.0,
        };
        let record = grid_table(
            &format!("sep-{i}"),
            Some(label),
            spec,
            &mut |_, _| "x".into(),
            &mut rng,
        );
        let boxes: Vec<Rect> = record.words.iter().map(|w| w.bbox).collect();
        let mut rows = Vec::with_capacity(boxes.len());
        for _ in &boxes {
            let mut row: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
            row.extend((0..4).map(|c| if c == label.index() { 1.0 } else { 0.0 }));
            rows.push(row);
        }
        out.push(TableGraph {
            record_id: record.id,
            label: Some(label),
            features: Matrix::from_rows(&rows)?,
            edges: visibility_edges(&boxes),
        });
    }
    Ok(out)
}

const SHARED_VOCAB: [&str; 24] = [
    "the", "of", "and", "a", "in", "to", "for", "with", "on", "by", "is", "as", "table", "set",
    "value", "mean", "total", "case", "type", "group", "n", "all", "none", "(%)",
];

fn class_vocab(label: ClassLabel) -> &'static [&'static str] {
    match label {
        ClassLabel::Observation => &[
            "accuracy",
            "f1",
            "precision",
            "recall",
            "0.91",
            "0.87",
            "bleu",
            "error",
            "baseline",
            "ours",
            "score",
            "±",
        ],
        ClassLabel::Input => &[
            "dataset", "samples", "train", "test", "size", "classes", "tokens", "images", "split",
            "domain", "features", "#",
        ],
        ClassLabel::Example => &[
            "sentence", "example", "input:", "output:", "query", "\"the", "answer", "question",
            "text", "label:", "gold", "→",
        ],
        ClassLabel::Other => &[
            "parameter",
            "symbol",
            "description",
            "notation",
            "rate",
            "layer",
            "epochs",
            "default",
            "lr",
            "batch",
            "hidden",
            "λ",
        ],
    }
}

fn class_shape(label: ClassLabel) -> ((usize, usize), (usize, usize)) {
    // ((min cols, max cols), (min rows, max rows))
    match label {
        ClassLabel::Observation => ((3, 6), (4, 8)),
        ClassLabel::Input => ((2, 5), (3, 7)),
        ClassLabel::Example => ((1, 3), (2, 5)),
        ClassLabel::Other => ((2, 4), (2, 8)),
    }
}

/// Labeled tables with class-dependent shape and vocabulary.
///
/// Each word comes from its class vocabulary with probability
/// `class_word_prob`, otherwise from a shared vocabulary, so classes overlap
/// and are only separable on average.
pub fn themed_corpus(counts: [usize; 4], class_word_prob: f64, seed: u64) -> Vec<TableRecord> {
    let mut out = Vec::new();
    for (label, &n) in ClassLabel::ALL.iter().zip(&counts) {
        for i in 0..n {
            let id = format!("{}-{i:03}", label.name().to_lowercase());
            let mut rng = rng_from(seed, &[b"themed", id.as_bytes()]);
            let ((c0, c1), (r0, r1)) = class_shape(*label);
            let spec = GridSpec {
                cols: rng.gen_range(c0..=c1),
                rows: rng.gen_range(r0..=r1),
                min_gap: 2.0,
            };
            let mut word_rng = rng_from(seed, &[b"words", id.as_bytes()]);
            let mut texts = |_: usize, _: usize| {
                let pool: &[&str] = if word_rng.gen_bool(class_word_prob) {
                    class_vocab(*label)
                } else {
                    &SHARED_VOCAB
                };
                pool.choose(&mut word_rng)
                    .copied()
                    .unwrap_or("x")
                    .to_string()
            };
            out.push(grid_table(&id, Some(*label), spec, &mut texts, &mut rng));
        }
    }
    out
}
