use serde::{Deserialize, Serialize};

use crate::dataset::Rect;
use crate::error::{Error, Result};

/// Number of geometric values at the start of every node feature row.
pub const GEOM_DIM: usize = 6;

/// Box geometry normalized by the table box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeomFeatures {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub rx1: f64,
    pub ry1: f64,
}

impl GeomFeatures {
    pub fn to_array(&self) -> [f64; GEOM_DIM] {
        [self.cx, self.cy, self.w, self.h, self.rx1, self.ry1]
    }
}

pub fn geom_features(word: &Rect, table: &Rect) -> Result<GeomFeatures> {
    let tw = table.width();
    let th = table.height();
    if !(tw > 0.0 && th > 0.0) {
        return Err(Error::Geometry(format!(
            "table box has zero area: {:?}",
            <[f64; 4]>::from(*table)
        )));
    }
    let (cx, cy) = word.center();
    Ok(GeomFeatures {
        cx: (cx - table.x1) / tw,
        cy: (cy - table.y1) / th,
        w: word.width() / tw,
        h: word.height() / th,
        rx1: (word.x1 - table.x1) / tw,
        ry1: (word.y1 - table.y1) / th,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_table_box() {
        let t = Rect::new(10.0, 20.0, 110.0, 70.0);
        let g = geom_features(&t, &t).unwrap();
        assert_eq!(g.to_array(), [0.5, 0.5, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn top_left_quarter_of_unit_table() {
        let t = Rect::new(0.0, 0.0, 1.0, 1.0);
        let g = geom_features(&Rect::new(0.0, 0.0, 0.5, 0.5), &t).unwrap();
        assert_eq!(g.to_array(), [0.25, 0.25, 0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn matches_direct_recomputation() {
        let t = Rect::new(72.5, 300.25, 512.0, 455.75);
        let w = Rect::new(100.125, 310.5, 160.0, 322.0);
        let g = geom_features(&w, &t).unwrap();
        let (tw, th) = (512.0 - 72.5, 455.75 - 300.25);
        let expect = [
            (0.5 * (100.125 + 160.0) - 72.5) / tw,
            (0.5 * (310.5 + 322.0) - 300.25) / th,
            (160.0 - 100.125) / tw,
            (322.0 - 310.5) / th,
            (100.125 - 72.5) / tw,
            (310.5 - 300.25) / th,
        ];
        for (a, b) in g.to_array().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_area_table_is_an_error() {
        let t = Rect::new(0.0, 0.0, 0.0, 10.0);
        assert!(geom_features(&Rect::new(0.0, 0.0, 1.0, 1.0), &t).is_err());
    }
}
