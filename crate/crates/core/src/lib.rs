//! Table type classification over word-box visibility graphs.
//!
//! The pipeline is: parse word-box table records ([`dataset`]), turn each
//! table into a graph with geometric and text-embedding node features
//! ([`graph`]), optionally grow the training set with structure-preserving
//! graph edits ([`augment`]), then train and evaluate a two-layer graph
//! convolutional classifier ([`gnn`], [`train`], [`eval`]). [`experiment`]
//! wires those steps into a single reproducible run.

pub mod augment;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod gnn;
pub mod graph;
pub mod seed;
pub mod synthetic;
pub mod train;

pub use dataset::{ClassLabel, DatasetManifest, Rect, TableRecord, WordBox};
pub use error::{Error, Result};
pub use graph::TableGraph;
