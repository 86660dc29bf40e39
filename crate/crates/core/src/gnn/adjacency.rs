use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::Matrix;

/// Symmetrically normalized adjacency with self-loops,
/// `D̃^(-1/2) (A + I) D̃^(-1/2)`, stored as sorted `(row, col, value)` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormAdjacency {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl NormAdjacency {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m.set(i, j, v);
        }
        m
    }

    /// `Â · h`. Each output row sums its neighbours in ascending column order.
    pub fn apply(&self, h: &Matrix) -> Result<Matrix> {
        if h.rows() != self.n {
            return Err(Error::Shape(format!(
                "adjacency is {0}×{0} but features have {1} rows",
                self.n,
                h.rows()
            )));
        }
        let mut out = Matrix::zeros(self.n, h.cols());
        for &(i, j, v) in &self.entries {
            let src = h.row(j).to_vec();
            for (o, s) in out.row_mut(i).iter_mut().zip(src) {
                *o += v * s;
            }
        }
        Ok(out)
    }
}

/// Normalizes an undirected edge list over `n` nodes.
///
/// Degrees count each distinct neighbour once plus the self-loop, so isolated
/// nodes get weight 1 on the diagonal.
pub fn normalize_adjacency(edges: &[(usize, usize)], n: usize) -> Result<NormAdjacency> {
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in edges {
        if i >= n || j >= n {
            return Err(Error::Shape(format!(
                "edge ({i}, {j}) out of range for n = {n}"
            )));
        }
        if i == j {
            return Err(Error::Shape(format!("self-loop at node {i}")));
        }
        neighbours[i].push(j);
        neighbours[j].push(i);
    }
    for (i, list) in neighbours.iter_mut().enumerate() {
        list.push(i);
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<f64> = neighbours.iter().map(|l| l.len() as f64).collect();
    let entries = neighbours
        .iter()
        .enumerate()
        .flat_map(|(i, list)| {
            let degree = &degree;
            list.iter()
                .map(move |&j| (i, j, 1.0 / (degree[i] * degree[j]).sqrt()))
        })
        .collect();
    Ok(NormAdjacency { n, entries })
}
