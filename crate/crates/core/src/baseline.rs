//! Hard-mask decoding: binarize, keep the largest 8-connected component and
//! return its minimum-area rotated rectangle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{min_area_rect, Point2, Quad};
use crate::pyramid_label::SoftMask;

pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "expected {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// An 8-connected set of cells, listed in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// `(col, row)` pairs.
    pub cells: Vec<(usize, usize)>,
}

impl Component {
    pub fn area(&self) -> usize {
        self.cells.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    /// Cells with score strictly above this are foreground.
    pub threshold: f64,
    /// Use cell corners instead of cell centers, so the rectangle covers the
    /// component's pixels completely.
    pub inflate_half_cell: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_BINARIZE_THRESHOLD,
            inflate_half_cell: false,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "binarization threshold {} must lie in (0, 1)",
                self.threshold
            )));
        }
        Ok(())
    }
}

pub fn binarize(mask: &SoftMask, threshold: f64) -> BinaryMask {
    BinaryMask {
        width: mask.width(),
        height: mask.height(),
        bits: mask.scores().iter().map(|&s| s > threshold).collect(),
    }
}

/// Flood fill in row-major seed order, so components come out sorted by
/// their first cell.
pub fn connected_components(bm: &BinaryMask) -> Vec<Component> {
    let (w, h) = (bm.width, bm.height);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !bm.bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut cells = Vec::new();
        while let Some(idx) = stack.pop() {
            let (col, row) = (idx % w, idx / w);
            cells.push(idx);
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (nc, nr) = (col as isize + dc, row as isize + dr);
                    if nc < 0 || nr < 0 || nc >= w as isize || nr >= h as isize {
                        continue;
                    }
                    let n = nr as usize * w + nc as usize;
                    if bm.bits[n] && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        cells.sort_unstable();
        out.push(Component {
            cells: cells.into_iter().map(|i| (i % w, i / w)).collect(),
        });
    }
    out
}

/// Largest component; on equal areas the one whose first cell comes first in
/// row-major order.
pub fn largest_component(components: &[Component]) -> Option<&Component> {
    components
        .iter()
        .fold(None, |best: Option<&Component>, c| match best {
            Some(b) if b.area() >= c.area() => Some(b),
            _ => Some(c),
        })
}

/// Baseline decode: the output never leaves the mask's box.
pub fn decode_baseline(mask: &SoftMask, cfg: &BaselineConfig) -> Result<Quad> {
    cfg.validate()?;
    let components = connected_components(&binarize(mask, cfg.threshold));
    let best = largest_component(&components).ok_or(Error::EmptyMask)?;
    let (hw, hh) = (0.5 * mask.cell_width(), 0.5 * mask.cell_height());
    let mut points: Vec<Point2> = Vec::with_capacity(best.area() * 4);
    for &(col, row) in &best.cells {
        let c = mask.cell_center(col, row);
        if cfg.inflate_half_cell {
            points.extend([
                Point2::new(c.x - hw, c.y - hh),
                Point2::new(c.x + hw, c.y - hh),
                Point2::new(c.x + hw, c.y + hh),
                Point2::new(c.x - hw, c.y + hh),
            ]);
        } else {
            points.push(c);
        }
    }
    min_area_rect(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_iou;
    use crate::geometry::Rect;
    use crate::pyramid_label::rasterize_label;

    fn bm(rows: &[&str]) -> BinaryMask {
        let w = rows[0].len();
        let bits = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '#'))
            .collect();
        BinaryMask::new(w, rows.len(), bits).unwrap()
    }

    #[test]
    fn binarize_is_strict() {
        let r = Rect::new(0., 0., 2., 2.).unwrap();
        let m = SoftMask::new(2, 2, vec![0.6; 4], r).unwrap();
        assert!(binarize(&m, 0.5).bits().iter().all(|&b| b));
        let m = SoftMask::new(2, 2, vec![0.5; 4], r).unwrap();
        assert!(binarize(&m, 0.5).bits().iter().all(|&b| !b));
    }

    #[test]
    fn binarize_matches_scalar_loop() {
        let r = Rect::new(0., 0., 1., 1.).unwrap();
        let scores: Vec<f64> = (0..35).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let m = SoftMask::new(7, 5, scores.clone(), r).unwrap();
        let b = binarize(&m, 0.42);
        for row in 0..5 {
            for col in 0..7 {
                assert_eq!(b.get(col, row), scores[row * 7 + col] > 0.42);
            }
        }
    }

    #[test]
    fn component_examples() {
        let two = connected_components(&bm(&["##..##", "##..##", "......"]));
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|c| c.area() == 4));

        let diag = connected_components(&bm(&["#.", ".#"]));
        assert_eq!(diag.len(), 1);
        assert_eq!(diag[0].area(), 2);

        assert!(connected_components(&bm(&["...", "..."])).is_empty());
    }

    #[test]
    fn largest_component_tie_prefers_first() {
        let comps = connected_components(&bm(&["#..#", "#..#"]));
        assert_eq!(largest_component(&comps).unwrap().cells[0], (0, 0));
    }

    #[test]
    fn filled_subrectangle() {
        let r = Rect::new(0., 0., 20., 10.).unwrap();
        let mut m = SoftMask::zeros(20, 10, r).unwrap();
        for row in 2..6 {
            for col in 3..15 {
                m.set(col, row, 1.0);
            }
        }
        let q = decode_baseline(&m, &BaselineConfig::default()).unwrap();
        // Centers span [3.5, 14.5] x [2.5, 5.5].
        let want = Rect::new(3.5, 2.5, 14.5, 5.5).unwrap().to_quad().unwrap();
        assert!(polygon_iou(&q, &want).unwrap() > 1.0 - 1e-9);

        let cfg = BaselineConfig {
            inflate_half_cell: true,
            ..BaselineConfig::default()
        };
        let q = decode_baseline(&m, &cfg).unwrap();
        let want = Rect::new(3., 2., 15., 6.).unwrap().to_quad().unwrap();
        assert!(polygon_iou(&q, &want).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn large_blob_wins() {
        let r = Rect::new(0., 0., 12., 12.).unwrap();
        let mut m = SoftMask::zeros(12, 12, r).unwrap();
        m.set(0, 0, 1.0);
        m.set(1, 0, 1.0);
        m.set(0, 1, 1.0);
        for row in 5..10 {
            for col in 4..11 {
                m.set(col, row, 0.9);
            }
        }
        let q = decode_baseline(&m, &BaselineConfig::default()).unwrap();
        let want = Rect::new(4.5, 5.5, 10.5, 9.5).unwrap().to_quad().unwrap();
        assert!(polygon_iou(&q, &want).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn half_level_set_of_square_pyramid() {
        // The 0.5 level set of a square pyramid is the square shrunk by half
        // about its center: IoU = (1/2)^2.
        let q = Quad::from_flat(&[10., 10., 50., 10., 50., 50., 10., 50.]).unwrap();
        let r = Rect::new(6., 6., 54., 54.).unwrap();
        let m = rasterize_label(&q, 96, 96, r).unwrap();
        let out = decode_baseline(&m, &BaselineConfig::default()).unwrap();
        let iou = polygon_iou(&out, &q).unwrap();
        assert!((iou - 0.25).abs() < 0.02, "iou {iou}");
    }

    #[test]
    fn errors() {
        let r = Rect::new(0., 0., 4., 4.).unwrap();
        let mut m = SoftMask::zeros(4, 4, r).unwrap();
        assert_eq!(
            decode_baseline(&m, &BaselineConfig::default()),
            Err(Error::EmptyMask)
        );
        m.set(1, 1, 1.0);
        m.set(2, 2, 1.0);
        assert!(matches!(
            decode_baseline(&m, &BaselineConfig::default()),
            Err(Error::DegenerateInput(_))
        ));
        let bad = BaselineConfig {
            threshold: 1.0,
            ..BaselineConfig::default()
        };
        assert!(decode_baseline(&m, &bad).is_err());
    }
}
