//! Soft pyramid labels.
//!
//! A quadrilateral is lifted to a pyramid whose apex (height 1) sits over the
//! vertex centroid and whose base is the quadrilateral itself. The label of a
//! pixel is the pyramid height above its center. The four lateral faces are
//! the cones between consecutive center-to-vertex rays; inside a cone the
//! offset from the center is written in the basis of the two bounding rays and
//! the height is `1 - (alpha + beta)`, clamped at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{decompose, quad_center, Point2, Quad, Rect};

/// Default mask resolution (per side).
pub const DEFAULT_MASK_SIZE: usize = 28;

/// Slack on the non-negativity test for the ray coefficients, so points that
/// sit exactly on a ray are not lost to round-off.
const REGION_EPS: f64 = 1e-12;

/// A `height x width` grid of scores in `[0, 1]` covering `rect`.
///
/// Cell `(col, row)` stands for the continuous point `(col + 0.5, row + 0.5)`
/// in mask-local units, mapped linearly onto `rect`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftMask {
    width: usize,
    height: usize,
    scores: Vec<f64>,
    #[serde(rename = "box")]
    rect: Rect,
}

impl SoftMask {
    pub fn new(width: usize, height: usize, scores: Vec<f64>, rect: Rect) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidArgument(format!(
                "mask must be at least 2x2, got {width}x{height}"
            )));
        }
        if scores.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "expected {} scores, got {}",
                width * height,
                scores.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidArgument(format!(
                "score {bad} outside [0, 1]"
            )));
        }
        rect.validate()?;
        Ok(Self {
            width,
            height,
            scores,
            rect,
        })
    }

    /// Like [`SoftMask::new`] but clamps scores into `[0, 1]` first; NaN maps
    /// to 0.
    pub fn from_raw_clamped(
        width: usize,
        height: usize,
        mut scores: Vec<f64>,
        rect: Rect,
    ) -> Result<Self> {
        for s in &mut scores {
            *s = if s.is_nan() { 0.0 } else { s.clamp(0.0, 1.0) };
        }
        Self::new(width, height, scores, rect)
    }

    pub fn zeros(width: usize, height: usize, rect: Rect) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height], rect)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.scores[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        assert!((0.0..=1.0).contains(&value), "score {value} outside [0, 1]");
        self.scores[row * self.width + col] = value;
    }

    pub fn cell_width(&self) -> f64 {
        self.rect.width() / self.width as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.rect.height() / self.height as f64
    }

    /// Image coordinates of the center of cell `(col, row)`.
    pub fn cell_center(&self, col: usize, row: usize) -> Point2 {
        cell_center(&self.rect, self.width, self.height, col, row)
    }

    /// Scores snapped to the 16-bit grid `k / 65535`, which is exactly what a
    /// 16-bit PGM stores.
    pub fn quantized(&self) -> SoftMask {
        let scores = self
            .scores
            .iter()
            .map(|&s| f64::from(quantize_score(s)) / 65535.0)
            .collect();
        SoftMask {
            scores,
            ..self.clone()
        }
    }
}

pub(crate) fn quantize_score(s: f64) -> u16 {
    (s.clamp(0.0, 1.0) * 65535.0).round() as u16
}

fn cell_center(rect: &Rect, width: usize, height: usize, col: usize, row: usize) -> Point2 {
    Point2::new(
        rect.x0 + (col as f64 + 0.5) * rect.width() / width as f64,
        rect.y0 + (row as f64 + 0.5) * rect.height() / height as f64,
    )
}

/// The four lateral faces, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegionId {
    Oab,
    Obc,
    Ocd,
    Oda,
}

impl RegionId {
    pub const ALL: [RegionId; 4] = [RegionId::Oab, RegionId::Obc, RegionId::Ocd, RegionId::Oda];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Cone between the rays from the center through `m` and through `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidRegion {
    pub id: RegionId,
    pub m: Point2,
    pub n: Point2,
}

impl PyramidRegion {
    pub fn of(q: &Quad, id: RegionId) -> Self {
        let i = id.index();
        Self {
            id,
            m: q.vertex(i),
            n: q.vertex(i + 1),
        }
    }
}

/// Picks the cone containing `p` and returns its ray coefficients.
///
/// A point on a shared ray qualifies for two cones; the first in
/// [`RegionId::ALL`] order wins. The center itself lands in `Oab` with zero
/// coefficients.
pub fn select_region(q: &Quad, p: Point2) -> Result<(PyramidRegion, f64, f64)> {
    let o = quad_center(q);
    let mut fallback: Option<(PyramidRegion, f64, f64)> = None;
    for id in RegionId::ALL {
        let region = PyramidRegion::of(q, id);
        let (alpha, beta) = decompose(o, region.m, region.n, p)
            .map_err(|_| Error::DegenerateQuad("center coincides with a vertex"))?;
        if alpha >= -REGION_EPS && beta >= -REGION_EPS {
            return Ok((region, alpha.max(0.0), beta.max(0.0)));
        }
        let worst = alpha.min(beta);
        if fallback.as_ref().is_none_or(|(_, a, b)| worst > a.min(*b)) {
            fallback = Some((region, alpha, beta));
        }
    }
    // Unreachable for star-shaped quads: the cones cover the plane.
    fallback.ok_or(Error::DegenerateQuad("no region"))
}

/// Pyramid height over `p`: 1 at the center, 0 on and outside the boundary.
pub fn pyramid_score(q: &Quad, p: Point2) -> Result<f64> {
    let (_, alpha, beta) = select_region(q, p)?;
    Ok((1.0 - (alpha + beta)).clamp(0.0, 1.0))
}

/// Samples the pyramid label of `q` on a `mask_width x mask_height` grid over
/// `rect`.
pub fn rasterize_label(
    q: &Quad,
    mask_width: usize,
    mask_height: usize,
    rect: Rect,
) -> Result<SoftMask> {
    rect.validate()?;
    if mask_width < 2 || mask_height < 2 {
        return Err(Error::InvalidArgument(format!(
            "mask must be at least 2x2, got {mask_width}x{mask_height}"
        )));
    }
    let mut scores = Vec::with_capacity(mask_width * mask_height);
    for row in 0..mask_height {
        for col in 0..mask_width {
            let c = cell_center(&rect, mask_width, mask_height, col, row);
            scores.push(pyramid_score(q, c)?);
        }
    }
    SoftMask::new(mask_width, mask_height, scores, rect)
}

/// Mean absolute per-cell difference.
pub fn l1_mask_distance(m1: &SoftMask, m2: &SoftMask) -> Result<f64> {
    if m1.width != m2.width || m1.height != m2.height {
        return Err(Error::DimensionMismatch(
            m1.width, m1.height, m2.width, m2.height,
        ));
    }
    let total: f64 = m1
        .scores
        .iter()
        .zip(&m2.scores)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / m1.scores.len() as f64)
}
