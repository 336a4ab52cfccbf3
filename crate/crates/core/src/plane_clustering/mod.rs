//! Plane clustering: recover the pyramid behind a soft mask and read the
//! quadrilateral off its base.
//!
//! Every cell above the positive threshold becomes a 3D point `(x, y, score)`.
//! Four supporting planes are seeded from the box corners and an apex of
//! height 1 over the mean positive location, then refined by alternating
//! nearest-plane assignment with a robust refit of each cluster. The traces
//! of the final planes on `z = 0` bound the decoded quad; since they are
//! planes rather than pixel boundaries, the quad may reach past the box.

mod robust;

pub use robust::{bisquare_weight, fit_plane_robust, mean_squared_distance, weighted_plane};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    line_intersection, plane_base_intersection, plane_through, Line2, Plane, Point3, Quad, Rect,
};
use crate::pyramid_label::SoftMask;

/// Adjacent base lines closer than this angle are treated as parallel.
const MIN_CORNER_ANGLE_DEG: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    /// Cells with score strictly above this become positive points.
    pub positive_threshold: f64,
    pub max_iter: usize,
    /// Stop once the pooled mean squared plane distance is at or below this.
    pub residual_threshold: f64,
    pub irls_iterations: usize,
    /// Bisquare tuning constant, in units of the robust scale.
    pub irls_tuning_constant: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            positive_threshold: 0.1,
            max_iter: 10,
            residual_threshold: 1e-4,
            irls_iterations: 20,
            irls_tuning_constant: 4.685,
        }
    }
}

impl ClusteringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.positive_threshold > 0.0 && self.positive_threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "positive_threshold {} must lie in (0, 1)",
                self.positive_threshold
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if self.residual_threshold.is_nan() || self.residual_threshold <= 0.0 {
            return Err(Error::InvalidArgument(
                "residual_threshold must be positive".into(),
            ));
        }
        if self.irls_tuning_constant.is_nan() || self.irls_tuning_constant <= 0.0 {
            return Err(Error::InvalidArgument(
                "irls_tuning_constant must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// State of the four supporting planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PyramidFit {
    /// Planes seeded from box edges top, right, bottom, left (in that order).
    pub planes: [Plane; 4],
    /// Apex used for initialization.
    pub apex: Point3,
    pub iterations_run: usize,
    /// Pooled mean squared perpendicular distance of the clustered points.
    pub final_residual: f64,
    pub cluster_sizes: [usize; 4],
    /// Pooled residual after each iteration.
    pub residual_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub quad: Quad,
    pub fit: PyramidFit,
    pub positive_count: usize,
}

/// Positive points in image coordinates.
pub fn select_positive(mask: &SoftMask, cfg: &ClusteringConfig) -> Result<Vec<Point3>> {
    let mut out = Vec::new();
    for row in 0..mask.height() {
        for col in 0..mask.width() {
            let z = mask.get(col, row);
            if z > cfg.positive_threshold {
                let c = mask.cell_center(col, row);
                out.push(Point3::new(c.x, c.y, z));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(out)
}

/// Index of the plane at the smallest perpendicular distance; lowest index
/// on ties.
pub fn nearest_plane(p: Point3, planes: &[Plane; 4]) -> usize {
    let mut best = 0;
    let mut best_d = planes[0].distance(p);
    for (i, pl) in planes.iter().enumerate().skip(1) {
        let d = pl.distance(p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn assign(positives: &[Point3], planes: &[Plane; 4]) -> [Vec<Point3>; 4] {
    let mut groups: [Vec<Point3>; 4] = Default::default();
    for &p in positives {
        groups[nearest_plane(p, planes)].push(p);
    }
    groups
}

fn pooled_residual(groups: &[Vec<Point3>; 4], planes: &[Plane; 4]) -> f64 {
    let n: usize = groups.iter().map(Vec::len).sum();
    if n == 0 {
        return 0.0;
    }
    let total: f64 = groups
        .iter()
        .zip(planes)
        .map(|(g, pl)| mean_squared_distance(g, pl) * g.len() as f64)
        .sum();
    total / n as f64
}

/// Seeds the pyramid: apex at the mean positive location with height 1, base
/// at the corners of `bbox`.
pub fn init_planes(positives: &[Point3], bbox: &Rect) -> Result<PyramidFit> {
    if positives.is_empty() {
        return Err(Error::EmptyMask);
    }
    bbox.validate()?;
    let n = positives.len() as f64;
    let apex = Point3::new(
        positives.iter().map(|p| p.x).sum::<f64>() / n,
        positives.iter().map(|p| p.y).sum::<f64>() / n,
        1.0,
    );
    let corners = bbox.corners();
    let mut planes = [Plane::new(0.0, 0.0, 0.0); 4];
    for (i, plane) in planes.iter_mut().enumerate() {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        *plane = plane_through(apex, Point3::new(a.x, a.y, 0.0), Point3::new(b.x, b.y, 0.0))?;
    }
    let groups = assign(positives, &planes);
    Ok(PyramidFit {
        planes,
        apex,
        iterations_run: 0,
        final_residual: pooled_residual(&groups, &planes),
        cluster_sizes: groups.each_ref().map(Vec::len),
        residual_trace: Vec::new(),
    })
}

/// Alternates nearest-plane assignment and robust refits until the pooled
/// residual drops to the threshold or `max_iter` rounds have run.
pub fn cluster_planes(
    positives: &[Point3],
    bbox: &Rect,
    cfg: &ClusteringConfig,
) -> Result<PyramidFit> {
    cfg.validate()?;
    let mut fit = init_planes(positives, bbox)?;
    let mut residual = f64::INFINITY;
    while fit.iterations_run < cfg.max_iter && residual > cfg.residual_threshold {
        let groups = assign(positives, &fit.planes);
        let mut total = 0.0;
        for (k, group) in groups.iter().enumerate() {
            let (plane, res) = fit_plane_robust(group, cfg, fit.planes[k]);
            fit.planes[k] = plane;
            total += res * group.len() as f64;
        }
        residual = total / positives.len() as f64;
        fit.cluster_sizes = groups.each_ref().map(Vec::len);
        fit.iterations_run += 1;
        fit.residual_trace.push(residual);
    }
    fit.final_residual = residual;
    Ok(fit)
}

fn footprint_is_collinear(points: &[Point3]) -> bool {
    if points.len() < 3 {
        return true;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let my = points.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    !(sxx > 0.0 && syy > 0.0) || sxx * syy - sxy * sxy <= 1e-10 * sxx * syy
}

/// Reads the quad off the base of a fitted pyramid. Corner `i` is where the
/// traces of planes `i` and `i + 1` meet.
pub fn base_quad(planes: &[Plane; 4]) -> Result<Quad> {
    let mut lines = [Line2 {
        p: 1.0,
        q: 0.0,
        r: 0.0,
    }; 4];
    for (line, plane) in lines.iter_mut().zip(planes) {
        *line = plane_base_intersection(plane)
            .map_err(|_| Error::DegenerateQuad("supporting plane is horizontal"))?;
    }
    let min_sin = MIN_CORNER_ANGLE_DEG.to_radians().sin();
    let mut corners = [crate::geometry::Point2::default(); 4];
    for i in 0..4 {
        let (l1, l2) = (&lines[i], &lines[(i + 1) % 4]);
        if l1.normal().cross(l2.normal()).abs() < min_sin {
            return Err(Error::DegenerateQuad(
                "adjacent base lines are nearly parallel",
            ));
        }
        corners[i] = line_intersection(l1, l2)
            .map_err(|_| Error::DegenerateQuad("adjacent base lines are parallel"))?;
    }
    Quad::new(corners)
}

/// Full pyramid decode of one mask against its predicted box.
pub fn decode_pyramid(
    mask: &SoftMask,
    bbox: &Rect,
    cfg: &ClusteringConfig,
) -> Result<DecodeResult> {
    cfg.validate()?;
    let positives = select_positive(mask, cfg)?;
    if footprint_is_collinear(&positives) {
        // No lateral face can be resolved from a line of samples.
        return Err(Error::DegenerateQuad("positive cells are collinear"));
    }
    let fit = cluster_planes(&positives, bbox, cfg)?;
    let quad = base_quad(&fit.planes)?;
    Ok(DecodeResult {
        quad,
        fit,
        positive_count: positives.len(),
    })
}
