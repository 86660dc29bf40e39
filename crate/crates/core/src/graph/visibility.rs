//! Visibility edges between word boxes.
//!
//! A box sees, in each of the four axis directions, the nearest box whose
//! projection on the perpendicular axis overlaps its own by a positive
//! length. The pair is connected when the corridor between them (spanning
//! the projection overlap) crosses no third box's interior.

use std::collections::BTreeSet;

use crate::dataset::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Left,
        Direction::Right,
        Direction::Up,
        Direction::Down,
    ];
}

/// Gap from `u` to `v` when `v` lies strictly in direction `dir` of `u` with
/// positive perpendicular overlap.
pub fn directional_gap(u: &Rect, v: &Rect, dir: Direction) -> Option<f64> {
    let (overlap, gap) = match dir {
        Direction::Right => (y_overlap(u, v), (v.x1 >= u.x2).then_some(v.x1 - u.x2)),
        Direction::Left => (y_overlap(u, v), (v.x2 <= u.x1).then_some(u.x1 - v.x2)),
        Direction::Down => (x_overlap(u, v), (v.y1 >= u.y2).then_some(v.y1 - u.y2)),
        Direction::Up => (x_overlap(u, v), (v.y2 <= u.y1).then_some(u.y1 - v.y2)),
    };
    if overlap > 0.0 {
        gap
    } else {
        None
    }
}

fn x_overlap(a: &Rect, b: &Rect) -> f64 {
    a.x2.min(b.x2) - a.x1.max(b.x1)
}

fn y_overlap(a: &Rect, b: &Rect) -> f64 {
    a.y2.min(b.y2) - a.y1.max(b.y1)
}

/// Open rectangle between `u` and `v` (which must satisfy `directional_gap`).
/// Empty when the boxes touch.
pub fn corridor(u: &Rect, v: &Rect, dir: Direction) -> Rect {
    match dir {
        Direction::Right => Rect::new(u.x2, u.y1.max(v.y1), v.x1, u.y2.min(v.y2)),
        Direction::Left => Rect::new(v.x2, u.y1.max(v.y1), u.x1, u.y2.min(v.y2)),
        Direction::Down => Rect::new(u.x1.max(v.x1), u.y2, u.x2.min(v.x2), v.y1),
        Direction::Up => Rect::new(u.x1.max(v.x1), v.y2, u.x2.min(v.x2), u.y1),
    }
}

/// Whether two open rectangles share a point.
pub fn interiors_intersect(a: &Rect, b: &Rect) -> bool {
    a.x1 < b.x2 && b.x1 < a.x2 && a.y1 < b.y2 && b.y1 < a.y2
}

/// Undirected visibility edges `(i, j)` with `i < j`, sorted and deduplicated.
///
/// Ties in gap distance go to the lower index.
pub fn visibility_edges(boxes: &[Rect]) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for (u, ub) in boxes.iter().enumerate() {
        for dir in Direction::ALL {
            let mut nearest: Option<(f64, usize)> = None;
            for (v, vb) in boxes.iter().enumerate() {
                if v == u {
                    continue;
                }
                if let Some(gap) = directional_gap(ub, vb, dir) {
                    if nearest.is_none_or(|(g, _)| gap < g) {
                        nearest = Some((gap, v));
                    }
                }
            }
            let Some((_, v)) = nearest else { continue };
            let lane = corridor(ub, &boxes[v], dir);
            let blocked = boxes
                .iter()
                .enumerate()
                .any(|(w, wb)| w != u && w != v && interiors_intersect(&lane, wb));
            if !blocked {
                edges.insert((u.min(v), u.max(v)));
            }
        }
    }
    edges.into_iter().collect()
}
