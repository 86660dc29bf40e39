//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tabgraph_core::gnn::{cross_entropy, forward, Matrix, ModelParams};
use tabgraph_core::{ClassLabel, Rect, TableGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random layout of up to `max_n` boxes with pairwise disjoint interiors.
pub fn random_layout(rng: &mut impl Rng, max_n: usize) -> Vec<Rect> {
    let target = rng.gen_range(1..=max_n);
    let mut boxes: Vec<Rect> = Vec::with_capacity(target);
    let mut attempts = 0;
    while boxes.len() < target && attempts < 10_000 {
        attempts += 1;
        // Coarse integer grid makes equal gaps and exact alignments common.
        let x1 = rng.gen_range(0..40) as f64 * 2.5;
        let y1 = rng.gen_range(0..40) as f64 * 2.5;
        let w = rng.gen_range(1..8) as f64 * 2.5;
        let h = rng.gen_range(1..4) as f64 * 2.5;
        let b = Rect::new(x1, y1, x1 + w, y1 + h);
        let clash = boxes
            .iter()
            .any(|o| b.x1 < o.x2 && o.x1 < b.x2 && b.y1 < o.y2 && o.y1 < b.y2);
        if !clash {
            boxes.push(b);
        }
    }
    boxes
}

/// Disjoint boxes at continuous random positions: gap ties have probability zero.
pub fn general_position_layout(rng: &mut impl Rng, max_n: usize) -> Vec<Rect> {
    let target = rng.gen_range(1..=max_n);
    let mut boxes: Vec<Rect> = Vec::with_capacity(target);
    let mut attempts = 0;
    while boxes.len() < target && attempts < 10_000 {
        attempts += 1;
        let x1 = rng.gen_range(0.0..100.0);
        let y1 = rng.gen_range(0.0..100.0);
        let b = Rect::new(
            x1,
            y1,
            x1 + rng.gen_range(1.0..20.0),
            y1 + rng.gen_range(1.0..8.0),
        );
        let clash = boxes
            .iter()
            .any(|o| b.x1 < o.x2 && o.x1 < b.x2 && b.y1 < o.y2 && o.y1 < b.y2);
        if !clash {
            boxes.push(b);
        }
    }
    boxes
}

/// O(n³) visibility: for every ordered pair and direction, `v` is linked to
/// `u` when it lies strictly on that side with positive perpendicular
/// overlap, no other such box is strictly nearer (or equally near with a
/// lower index), and no third box enters the open corridor between them.
pub fn brute_force_visibility(boxes: &[Rect]) -> BTreeSet<(usize, usize)> {
    // (dx, dy): side of u to look at.
    let sides = [(1i32, 0i32), (-1, 0), (0, 1), (0, -1)];
    let along = |u: &Rect, v: &Rect, side: (i32, i32)| -> Option<(f64, Rect)> {
        match side {
            (1, 0) | (-1, 0) => {
                let lo = u.y1.max(v.y1);
                let hi = u.y2.min(v.y2);
                if hi - lo <= 0.0 {
                    return None;
                }
                if side.0 == 1 && v.x1 >= u.x2 {
                    Some((v.x1 - u.x2, Rect::new(u.x2, lo, v.x1, hi)))
                } else if side.0 == -1 && v.x2 <= u.x1 {
                    Some((u.x1 - v.x2, Rect::new(v.x2, lo, u.x1, hi)))
                } else {
                    None
                }
            }
            _ => {
                let lo = u.x1.max(v.x1);
                let hi = u.x2.min(v.x2);
                if hi - lo <= 0.0 {
                    return None;
                }
                if side.1 == 1 && v.y1 >= u.y2 {
                    Some((v.y1 - u.y2, Rect::new(lo, u.y2, hi, v.y1)))
                } else if side.1 == -1 && v.y2 <= u.y1 {
                    Some((u.y1 - v.y2, Rect::new(lo, v.y2, hi, u.y1)))
                } else {
                    None
                }
            }
        }
    };
    let open_overlap =
        |a: &Rect, b: &Rect| a.x1 < b.x2 && b.x1 < a.x2 && a.y1 < b.y2 && b.y1 < a.y2;

    let mut out = BTreeSet::new();
    for u in 0..boxes.len() {
        for v in 0..boxes.len() {
            if u == v {
                continue;
            }
            for side in sides {
                let Some((gap, lane)) = along(&boxes[u], &boxes[v], side) else {
                    continue;
                };
                let beaten = (0..boxes.len()).any(|w| {
                    w != u
                        && w != v
                        && along(&boxes[u], &boxes[w], side)
                            .is_some_and(|(gw, _)| gw < gap || (gw == gap && w < v))
                });
                let blocked =
                    (0..boxes.len()).any(|w| w != u && w != v && open_overlap(&lane, &boxes[w]));
                if !beaten && !blocked {
                    out.insert((u.min(v), u.max(v)));
                }
            }
        }
    }
    out
}

/// Random connected-ish graph with `n` nodes and `d` features.
pub fn random_graph(rng: &mut impl Rng, n: usize, d: usize) -> TableGraph {
    let mut edges = BTreeSet::new();
    for j in 1..n {
        if rng.gen_bool(0.8) {
            let i = rng.gen_range(0..j);
            edges.insert((i, j));
        }
    }
    for _ in 0..n {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let data = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TableGraph {
        record_id: "random".into(),
        label: Some(ClassLabel::ALL[rng.gen_range(0..4)]),
        features: Matrix::from_vec(n, d, data).unwrap(),
        edges: edges.into_iter().collect(),
    }
}

/// Relabels nodes: node `i` of `g` becomes node `perm[i]`.
pub fn permute_graph(g: &TableGraph, perm: &[usize]) -> TableGraph {
    let n = g.n();
    let mut rows = vec![Vec::new(); n];
    for (i, &p) in perm.iter().enumerate() {
        rows[p] = g.features.row(i).to_vec();
    }
    let mut edges: Vec<(usize, usize)> = g
        .edges
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (perm[i], perm[j]);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    TableGraph {
        record_id: g.record_id.clone(),
        label: g.label,
        features: Matrix::from_rows(&rows).unwrap(),
        edges,
    }
}

/// Dense `D̃^(-1/2) (A + I) D̃^(-1/2)` built from scratch.
pub fn dense_norm_adjacency(edges: &[(usize, usize)], n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0;
    }
    for &(i, j) in edges {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    for i in 0..n {
        for j in 0..n {
            a[i][j] /= (deg[i] * deg[j]).sqrt();
        }
    }
    a
}

pub fn dense_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            out[i][j] = (0..k).map(|t| a[i][t] * b[t][j]).sum();
        }
    }
    out
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

/// Central finite differences of the cross-entropy loss for every parameter,
/// in `ModelParams::blocks` order.
pub fn finite_difference_grads(
    g: &TableGraph,
    p: &ModelParams,
    label: ClassLabel,
    eps: f64,
) -> Vec<f64> {
    let loss = |q: &ModelParams| cross_entropy(&forward(g, q).unwrap().0, label);
    let mut out = Vec::with_capacity(p.num_params());
    let mut q = p.clone();
    for block in 0..6 {
        let len = p.blocks()[block].len();
        for i in 0..len {
            let orig = q.blocks()[block][i];
            q.blocks_mut()[block][i] = orig + eps;
            let up = loss(&q);
            q.blocks_mut()[block][i] = orig - eps;
            let down = loss(&q);
            q.blocks_mut()[block][i] = orig;
            out.push((up - down) / (2.0 * eps));
        }
    }
    out
}

/// Smallest |pre-activation| over both GCN layers; small values mean a
/// finite-difference step could cross a ReLU kink.
pub fn min_abs_preactivation(g: &TableGraph, p: &ModelParams) -> f64 {
    let (_, t) = forward(g, p).unwrap();
    t.layer1
        .pre_activation
        .as_slice()
        .iter()
        .chain(t.layer2.pre_activation.as_slice())
        .fold(f64::INFINITY, |m, v| m.min(v.abs()))
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
