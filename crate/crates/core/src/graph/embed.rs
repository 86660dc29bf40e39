//! Text embedders for node features.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Maps a word to a fixed-length vector. Implementations must be deterministic.
pub trait Embedder: Send + Sync {
    fn embed_dim(&self) -> usize;

    fn embed(&self, text: &str) -> Result<Vec<f64>>;
}

/// Pseudo-random vectors derived from a hash of the lowercased text.
///
/// Components are uniform in `[-1, 1]`. Stands in for pretrained vectors in
/// tests and synthetic runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub embed_dim: usize,
    pub seed: u64,
}

impl HashEmbedder {
    pub fn new(embed_dim: usize, seed: u64) -> Self {
        HashEmbedder { embed_dim, seed }
    }
}

impl Embedder for HashEmbedder {
    fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let key = text.to_lowercase();
        let mut rng = rng_from(
            self.seed,
            &[&(self.embed_dim as u64).to_le_bytes(), key.as_bytes()],
        );
        Ok((0..self.embed_dim)
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect())
    }
}

/// What a [`VectorTable`] returns for unknown tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    #[default]
    Zero,
    /// Fall back to a [`HashEmbedder`] with this seed and the table's dimension.
    HashFallback { seed: u64 },
}

/// Static word vectors keyed by lowercased token.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    embed_dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    pub oov: OovPolicy,
}

impl VectorTable {
    pub fn new(embed_dim: usize) -> Self {
        VectorTable {
            embed_dim,
            vectors: HashMap::new(),
            oov: OovPolicy::Zero,
        }
    }

    pub fn with_oov(mut self, oov: OovPolicy) -> Self {
        self.oov = oov;
        self
    }

    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.embed_dim {
            return Err(Error::Shape(format!(
                "vector for `{token}` has {} values, expected {}",
                vector.len(),
                self.embed_dim
            )));
        }
        self.vectors.insert(token.to_lowercase(), vector);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(&token.to_lowercase()).map(Vec::as_slice)
    }

    /// Parses the text vector format: a `<vocab_size> <embed_dim>` header
    /// followed by one `<token> v1 .. vd` line per token.
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => {
                return Err(Error::VectorFile {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        let header_err = |message: &str| Error::VectorFile {
            line: 1,
            message: message.into(),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [vocab, dim] = fields.as_slice() else {
            return Err(header_err("header must be `<vocab_size> <embed_dim>`"));
        };
        let vocab: usize = vocab.parse().map_err(|_| header_err("bad vocab_size"))?;
        let dim: usize = dim.parse().map_err(|_| header_err("bad embed_dim"))?;
        if dim == 0 {
            return Err(header_err("embed_dim must be positive"));
        }

        let mut table = VectorTable::new(dim);
        let mut rows = 0usize;
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap_or_default();
            let values = parts
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::VectorFile {
                    line: line_no,
                    message: format!("bad value: {e}"),
                })?;
            if values.len() != dim {
                return Err(Error::VectorFile {
                    line: line_no,
                    message: format!("expected {dim} values, found {}", values.len()),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::VectorFile {
                    line: line_no,
                    message: "non-finite value".into(),
                });
            }
            table.vectors.entry(token.to_lowercase()).or_insert(values);
            rows += 1;
        }
        if rows != vocab {
            return Err(Error::VectorFile {
                line: rows + 2,
                message: format!("header declares {vocab} tokens, found {rows}"),
            });
        }
        Ok(table)
    }
}

pub fn load_vector_table(path: impl AsRef<Path>) -> Result<VectorTable> {
    VectorTable::from_reader(File::open(path)?)
}

impl Embedder for VectorTable {
    fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        if let Some(v) = self.get(text) {
            return Ok(v.to_vec());
        }
        match self.oov {
            OovPolicy::Zero => Ok(vec![0.0; self.embed_dim]),
            OovPolicy::HashFallback { seed } => HashEmbedder::new(self.embed_dim, seed).embed(text),
        }
    }
}
