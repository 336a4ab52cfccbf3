use std::cmp::Ordering;

use super::{signed_area, Point2, Quad};
use crate::error::{Error, Result};

/// Absolute shoelace area of a simple polygon.
pub fn polygon_area(vertices: &[Point2]) -> f64 {
    signed_area(vertices).abs()
}

/// Sutherland-Hodgman: clips `subject` against the convex, positively
/// oriented `clipper`.
pub fn convex_intersection(subject: &[Point2], clipper: &[Point2]) -> Vec<Point2> {
    let mut output = subject.to_vec();
    let n = clipper.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clipper[i];
        let b = clipper[(i + 1) % n];
        let edge = b - a;
        let side = |p: Point2| edge.cross(p - a);

        let input = std::mem::take(&mut output);
        let mut prev = *input.last().expect("non-empty");
        let mut prev_side = side(prev);
        for &cur in &input {
            let cur_side = side(cur);
            if cur_side >= 0.0 {
                if prev_side < 0.0 {
                    output.push(crossing(prev, cur, prev_side, cur_side));
                }
                output.push(cur);
            } else if prev_side >= 0.0 {
                output.push(crossing(prev, cur, prev_side, cur_side));
            }
            prev = cur;
            prev_side = cur_side;
        }
    }
    output
}

fn crossing(p: Point2, q: Point2, sp: f64, sq: f64) -> Point2 {
    let t = sp / (sp - sq);
    p + (q - p) * t
}

fn cmp_quads(a: &Quad, b: &Quad) -> Ordering {
    a.to_flat()
        .iter()
        .zip(b.to_flat().iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Intersection over union of two convex quads.
///
/// The pair is put in a fixed order before clipping so the result is exactly
/// symmetric in its arguments.
pub fn polygon_iou(q1: &Quad, q2: &Quad) -> Result<f64> {
    if !q1.is_convex() || !q2.is_convex() {
        return Err(Error::NonConvexInput);
    }
    let (subject, clipper) = match cmp_quads(q1, q2) {
        Ordering::Greater => (q2, q1),
        _ => (q1, q2),
    };
    let inter = polygon_area(&convex_intersection(subject.vertices(), clipper.vertices()));
    let union = q1.area() + q2.area() - inter;
    if union <= 0.0 {
        return Ok(0.0);
    }
    Ok((inter / union).clamp(0.0, 1.0))
}
