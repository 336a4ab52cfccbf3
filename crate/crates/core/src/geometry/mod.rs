//! Planar and spatial primitives shared by the label generator, the decoders
//! and the evaluator.
//!
//! Coordinates follow the image convention: `x` grows to the right and `y`
//! grows downward. A [`Quad`] is always stored in canonical order: positive
//! shoelace area in raw image coordinates (top edge left-to-right, i.e.
//! clockwise on screen), starting at the vertex with the smallest `(y, x)`.

mod clip;
mod hull;

pub use clip::{convex_intersection, polygon_area, polygon_iou};
pub use hull::{convex_hull, min_area_rect};

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Determinants (normalized to the sine of the spanned angle) at or below this
/// are treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;
/// Geometric coincidence threshold.
pub const COINCIDENCE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// A location with a mask score attached as `z`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xy(self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let r = Self { x0, y0, x1, y1 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.y0, self.x1, self.y1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x1 <= self.x0 || self.y1 <= self.y0 {
            return Err(Error::InvalidArgument(format!(
                "box ({}, {}, {}, {}) must be finite with positive extent",
                self.x0, self.y0, self.x1, self.y1
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Corners in canonical quad order: top-left, top-right, bottom-right,
    /// bottom-left.
    pub fn corners(&self) -> [Point2; 4] {
        [
            Point2::new(self.x0, self.y0),
            Point2::new(self.x1, self.y0),
            Point2::new(self.x1, self.y1),
            Point2::new(self.x0, self.y1),
        ]
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        p.x >= self.x0 - tol && p.x <= self.x1 + tol && p.y >= self.y0 - tol && p.y <= self.y1 + tol
    }

    pub fn inflate(&self, dx: f64, dy: f64) -> Rect {
        Rect {
            x0: self.x0 - dx,
            y0: self.y0 - dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }

    /// Smallest rectangle containing every point. `None` for an empty slice.
    pub fn bounding(points: &[Point2]) -> Option<Rect> {
        let first = points.first()?;
        let mut r = Rect {
            x0: first.x,
            y0: first.y,
            x1: first.x,
            y1: first.y,
        };
        for p in &points[1..] {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        Some(r)
    }

    pub fn to_quad(&self) -> Result<Quad> {
        Quad::new(self.corners())
    }
}

/// Signed shoelace area; positive for canonical quad order.
pub fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

/// A quadrilateral in canonical vertex order.
///
/// Construction rejects anything that is not star-shaped with respect to the
/// vertex centroid: every edge must subtend a strictly positive angle at the
/// centroid. Four positive sector angles that close around the centroid sum
/// to exactly one turn, so this also rules out self-intersection and zero
/// area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    vertices: [Point2; 4],
}

impl Quad {
    pub fn new(vertices: [Point2; 4]) -> Result<Self> {
        if !vertices.iter().all(|v| v.is_finite()) {
            return Err(Error::DegenerateQuad("non-finite vertex"));
        }
        let mut v = vertices;
        let area = signed_area(&v);
        if area == 0.0 {
            return Err(Error::DegenerateQuad("zero area"));
        }
        if area < 0.0 {
            v.reverse();
        }
        let start = (0..4)
            .min_by(|&i, &j| v[i].y.total_cmp(&v[j].y).then(v[i].x.total_cmp(&v[j].x)))
            .unwrap_or(0);
        v.rotate_left(start);

        let center = mean_point(&v);
        for i in 0..4 {
            let a = v[i] - center;
            let b = v[(i + 1) % 4] - center;
            let (la, lb) = (a.norm(), b.norm());
            if la <= COINCIDENCE_EPS || lb <= COINCIDENCE_EPS {
                return Err(Error::DegenerateQuad("center coincides with a vertex"));
            }
            if a.cross(b) / (la * lb) <= COINCIDENCE_EPS {
                return Err(Error::DegenerateQuad(
                    "not star-shaped with respect to its center",
                ));
            }
        }
        Ok(Self { vertices: v })
    }

    /// Parses `[x1, y1, ..., x4, y4]`.
    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if coords.len() != 8 {
            return Err(Error::InvalidArgument(format!(
                "a quad needs 8 coordinates, got {}",
                coords.len()
            )));
        }
        Quad::new([
            Point2::new(coords[0], coords[1]),
            Point2::new(coords[2], coords[3]),
            Point2::new(coords[4], coords[5]),
            Point2::new(coords[6], coords[7]),
        ])
    }

    pub fn to_flat(&self) -> [f64; 8] {
        let v = &self.vertices;
        [
            v[0].x, v[0].y, v[1].x, v[1].y, v[2].x, v[2].y, v[3].x, v[3].y,
        ]
    }

    pub fn vertices(&self) -> &[Point2; 4] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i % 4]
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bounding_rect(&self) -> Rect {
        // Non-empty by construction.
        Rect::bounding(&self.vertices).expect("quad has four vertices")
    }

    /// True when every interior angle is at most 180 degrees.
    pub fn is_convex(&self) -> bool {
        (0..4).all(|i| {
            let e0 = self.vertex(i + 1) - self.vertex(i);
            let e1 = self.vertex(i + 2) - self.vertex(i + 1);
            e0.cross(e1) >= -COINCIDENCE_EPS * e0.norm() * e1.norm()
        })
    }
}

fn mean_point(points: &[Point2; 4]) -> Point2 {
    Point2::new(
        (points[0].x + points[1].x + points[2].x + points[3].x) / 4.0,
        (points[0].y + points[1].y + points[2].y + points[3].y) / 4.0,
    )
}

/// Arithmetic mean of the four vertices; the apex location of the pyramid.
pub fn quad_center(q: &Quad) -> Point2 {
    mean_point(&q.vertices)
}

/// Solves `OP = alpha * OM + beta * ON` for `(alpha, beta)`.
pub fn decompose(o: Point2, m: Point2, n: Point2, p: Point2) -> Result<(f64, f64)> {
    let om = m - o;
    let on = n - o;
    let op = p - o;
    let det = om.cross(on);
    let scale = om.norm() * on.norm();
    if scale == 0.0 || (det / scale).abs() <= SINGULAR_EPS {
        return Err(Error::SingularDecomposition);
    }
    // Cramer's rule on [om on] [alpha beta]^T = op.
    let alpha = op.cross(on) / det;
    let beta = om.cross(op) / det;
    Ok((alpha, beta))
}

/// Supporting plane `a*x + b*y + z + d = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl Plane {
    pub const fn new(a: f64, b: f64, d: f64) -> Self {
        Self { a, b, d }
    }

    /// Height of the plane above `(x, y)`.
    pub fn z_at(&self, x: f64, y: f64) -> f64 {
        -self.a * x - self.b * y - self.d
    }

    /// Signed algebraic residual `a*x + b*y + z + d`.
    pub fn residual(&self, p: Point3) -> f64 {
        self.a * p.x + self.b * p.y + p.z + self.d
    }

    pub fn distance(&self, p: Point3) -> f64 {
        self.residual(p).abs() / (self.a * self.a + self.b * self.b + 1.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.d.is_finite()
    }
}

/// The unique plane with unit z-coefficient through three points.
pub fn plane_through(p1: Point3, p2: Point3, p3: Point3) -> Result<Plane> {
    let e1 = p2.xy() - p1.xy();
    let e2 = p3.xy() - p1.xy();
    let det = e1.cross(e2);
    let scale = e1.norm() * e2.norm();
    // Collinear points and vertical planes both collapse the xy-projection.
    if scale == 0.0 || (det / scale).abs() <= SINGULAR_EPS {
        return Err(Error::DegeneratePlane);
    }
    let dz1 = p2.z - p1.z;
    let dz2 = p3.z - p1.z;
    // a*e1.x + b*e1.y = -dz1 ; a*e2.x + b*e2.y = -dz2
    let a = (-dz1 * e2.y + dz2 * e1.y) / det;
    let b = (-dz2 * e1.x + dz1 * e2.x) / det;
    let d = -p1.z - a * p1.x - b * p1.y;
    let plane = Plane::new(a, b, d);
    if !plane.is_finite() {
        return Err(Error::DegeneratePlane);
    }
    Ok(plane)
}

/// Line `p*x + q*y + r = 0` with `p^2 + q^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2 {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Line2 {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        let n = p.hypot(q);
        if n.is_nan() || n <= SINGULAR_EPS || !r.is_finite() {
            return Err(Error::InvalidArgument(
                "line normal must be non-zero".into(),
            ));
        }
        Ok(Self {
            p: p / n,
            q: q / n,
            r: r / n,
        })
    }

    pub fn through(a: Point2, b: Point2) -> Result<Self> {
        let dir = b - a;
        Line2::new(-dir.y, dir.x, dir.y * a.x - dir.x * a.y)
    }

    pub fn signed_distance(&self, pt: Point2) -> f64 {
        self.p * pt.x + self.q * pt.y + self.r
    }

    pub fn normal(&self) -> Point2 {
        Point2::new(self.p, self.q)
    }
}

/// Trace of a supporting plane on the base plane `z = 0`.
pub fn plane_base_intersection(pl: &Plane) -> Result<Line2> {
    if pl.a.hypot(pl.b) <= SINGULAR_EPS {
        return Err(Error::HorizontalPlane);
    }
    Line2::new(pl.a, pl.b, pl.d)
}

pub fn line_intersection(l1: &Line2, l2: &Line2) -> Result<Point2> {
    let cross = l1.p * l2.q - l2.p * l1.q;
    if cross.abs() <= COINCIDENCE_EPS {
        return Err(Error::ParallelLines);
    }
    Ok(Point2::new(
        (l1.q * l2.r - l2.q * l1.r) / cross,
        (l1.r * l2.p - l2.r * l1.p) / cross,
    ))
}
