mod common;

use std::collections::BTreeSet;
use std::io::Write;

use proptest::prelude::*;

use tabgraph_core::augment::{AugmentConfig, AugmentOp};
use tabgraph_core::dataset::{parse_record_file, stratified_split, write_record_file};
use tabgraph_core::experiment::{run_experiment, AugmentPlan, ExperimentConfig};
use tabgraph_core::gnn::{cross_entropy, forward};
use tabgraph_core::graph::{build_graph, build_graphs, load_vector_table, Embedder, HashEmbedder};
use tabgraph_core::synthetic::themed_corpus;
use tabgraph_core::train::{initial_params, train_with_history, TrainConfig};
use tabgraph_core::{ClassLabel, DatasetManifest, Error, Rect, TableRecord, WordBox};

fn config(aug: Option<usize>, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        embedder: "hash:8".into(),
        augment: aug.map(|target_size| AugmentPlan {
            config: AugmentConfig::new(&AugmentOp::ALL, seed),
            target_size,
        }),
        train: TrainConfig {
            epochs: 10,
            hidden_dim: 8,
            seed,
            ..TrainConfig::default()
        },
        standardize: false,
    }
}

fn small_manifest(seed: u64) -> DatasetManifest {
    DatasetManifest::new(themed_corpus([18, 6, 3, 5], 0.4, seed), seed, 0.3).unwrap()
}

#[test]
fn experiment_reports_are_byte_identical() {
    let m = small_manifest(1);
    let e = HashEmbedder::new(8, 0);
    for aug in [None, Some(30)] {
        let a = run_experiment(&m, &e, &config(aug, 4)).unwrap();
        let b = run_experiment(&m, &e, &config(aug, 4)).unwrap();
        assert_eq!(a.report.to_json().unwrap(), b.report.to_json().unwrap());
        assert_eq!(a.report.text_table(), b.report.text_table());
    }
}

#[test]
fn augmented_graphs_never_reach_the_test_set() {
    let m = small_manifest(2);
    let e = HashEmbedder::new(8, 0);
    let (train, test) = stratified_split(&m.records, m.train_fraction, m.split_seed).unwrap();
    let train_ids: BTreeSet<&str> = train.iter().map(|r| r.id.as_str()).collect();
    for aug in [None, Some(40)] {
        let out = run_experiment(&m, &e, &config(aug, 2)).unwrap();
        let r = &out.report;
        assert_eq!(r.test_size, test.len());
        assert!(r
            .test_ids
            .iter()
            .all(|id| !train_ids.contains(id.as_str()) && !id.contains("#aug")));
        assert_eq!(r.confusion.total() as usize, test.len());
        assert_eq!(r.train_size, aug.unwrap_or(train.len()));
    }
}

#[test]
fn split_counts_for_320_table_corpus() {
    let records = themed_corpus([235, 43, 13, 29], 0.3, 0);
    let (train, test) = stratified_split(&records, 0.2, 42).unwrap();
    let count = |rs: &[TableRecord], c| rs.iter().filter(|r| r.label == Some(c)).count();
    let train_counts: Vec<_> = ClassLabel::ALL.iter().map(|&c| count(&train, c)).collect();
    let test_counts: Vec<_> = ClassLabel::ALL.iter().map(|&c| count(&test, c)).collect();
    assert_eq!(train_counts, [47, 9, 3, 6]);
    assert_eq!(test_counts, [188, 34, 10, 23]);
    assert_eq!((train.len(), test.len()), (65, 255));
}

#[test]
fn initial_loss_is_near_uniform() {
    let records = themed_corpus([10, 10, 10, 10], 0.4, 3);
    let e = HashEmbedder::new(16, 1);
    let graphs = build_graphs(&records, &e).unwrap();
    let cfg = TrainConfig::default();
    let p = initial_params(graphs[0].feature_dim(), &cfg);
    let mean: f64 = graphs
        .iter()
        .map(|g| cross_entropy(&forward(g, &p).unwrap().0, g.label.unwrap()))
        .sum::<f64>()
        / graphs.len() as f64;
    assert!((mean - 4f64.ln()).abs() < 0.2, "{mean}");

    let out = train_with_history(&graphs, &TrainConfig { epochs: 40, ..cfg }).unwrap();
    assert!(out.epoch_losses.last().unwrap() < &out.epoch_losses[0]);
}

#[test]
fn vector_file_feeds_graph_builder() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "3 4").unwrap();
    writeln!(f, "accuracy 0.1 0.2 0.3 0.4").unwrap();
    writeln!(f, "dataset -1 0 1 2.5e-1").unwrap();
    writeln!(f, "±  1 1 1 1").unwrap();
    let table = load_vector_table(f.path()).unwrap();
    assert_eq!((table.len(), table.embed_dim()), (3, 4));

    let record = TableRecord {
        id: "v".into(),
        doc_id: "d".into(),
        page: 2,
        table_bbox: Rect::new(0.0, 0.0, 100.0, 20.0),
        label: Some(ClassLabel::Observation),
        words: vec![
            WordBox::new("Accuracy", Rect::new(0.0, 0.0, 40.0, 10.0)),
            WordBox::new("unknown", Rect::new(50.0, 0.0, 90.0, 10.0)),
        ],
    };
    let g = build_graph(&record, &table).unwrap();
    assert_eq!(g.feature_dim(), 10);
    assert_eq!(&g.features.row(0)[6..], &[0.1, 0.2, 0.3, 0.4]);
    assert_eq!(&g.features.row(1)[6..], &[0.0; 4]);
}

#[test]
fn vector_file_errors_name_the_line() {
    for (body, line) in [
        ("2 3\na 1 2 3\nb 1 2\n", 3),
        ("2 2\na 1 x\n", 2),
        ("1\n", 1),
        ("3 1\na 1\n", 3),
    ] {
        match tabgraph_core::graph::VectorTable::from_reader(body.as_bytes()) {
            Err(Error::VectorFile { line: l, .. }) => assert_eq!(l, line, "{body:?}"),
            other => panic!("{body:?}: {other:?}"),
        }
    }
}

#[test]
fn invalid_records_are_rejected_with_their_id() {
    let bad = r#"[{"id": "t7", "doc_id": "d", "page": 1, "table_bbox": [0, 0, 10, 10], "label": null,
        "words": [{"text": "far", "bbox": [50, 50, 60, 60]}]}]"#;
    match parse_record_file(bad.as_bytes()) {
        Err(Error::Validation { record, field, .. }) => {
            assert_eq!(record, "t7");
            assert_eq!(field, "words[0].bbox");
        }
        other => panic!("{other:?}"),
    }
}

fn arb_record(i: usize) -> impl Strategy<Value = TableRecord> {
    let word = (
        "[a-z±→0-9.]{1,8}",
        0.0..80.0f64,
        0.0..40.0f64,
        1.0..20.0f64,
        1.0..10.0f64,
    )
        .prop_map(|(text, x, y, w, h)| WordBox::new(text, Rect::new(x, y, x + w, y + h)));
    (
        proptest::collection::vec(word, 0..6),
        proptest::option::of(0usize..4),
        0u32..50,
    )
        .prop_map(move |(words, label, page)| TableRecord {
            id: format!("rec-{i}"),
            doc_id: format!("doc-{}", i % 3),
            page,
            table_bbox: Rect::new(0.0, 0.0, 100.0, 50.0),
            label: label.and_then(ClassLabel::from_index),
            words,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn record_file_round_trips(records in (0usize..5).prop_flat_map(|n| {
        (0..n).map(arb_record).collect::<Vec<_>>()
    })) {
        let text = write_record_file(&records).unwrap();
        prop_assert_eq!(parse_record_file(text.as_bytes()).unwrap(), records);
    }
}
