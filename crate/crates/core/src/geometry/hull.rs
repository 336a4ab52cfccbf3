use super::{Point2, Quad, COINCIDENCE_EPS};
use crate::error::{Error, Result};

/// Andrew's monotone chain. Returns the hull in positive (canonical)
/// orientation without collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);

    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Minimum-area enclosing rotated rectangle (rotating calipers over the hull
/// edges).
pub fn min_area_rect(points: &[Point2]) -> Result<Quad> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput("fewer than 3 points"));
    }
    if !points.iter().all(|p| p.is_finite()) {
        return Err(Error::DegenerateInput("non-finite point"));
    }
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::DegenerateInput("points are collinear"));
    }
    let extent = super::Rect::bounding(&hull).expect("non-empty hull");
    let scale = extent.width().max(extent.height());
    if super::signed_area(&hull) <= COINCIDENCE_EPS * scale * scale {
        return Err(Error::DegenerateInput("points are collinear"));
    }

    let n = hull.len();
    let mut best: Option<(f64, [Point2; 4])> = None;
    for i in 0..n {
        let edge = hull[(i + 1) % n] - hull[i];
        let len = edge.norm();
        if len == 0.0 {
            continue;
        }
        let u = edge * (1.0 / len);
        let v = Point2::new(-u.y, u.x);
        let (mut umin, mut umax, mut vmin, mut vmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &p in &hull {
            let d = p - hull[i];
            let (pu, pv) = (d.dot(u), d.dot(v));
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let area = (umax - umin) * (vmax - vmin);
        if best.as_ref().is_none_or(|(a, _)| area < *a) {
            let at = |s: f64, t: f64| hull[i] + u * s + v * t;
            best = Some((
                area,
                [
                    at(umin, vmin),
                    at(umax, vmin),
                    at(umax, vmax),
                    at(umin, vmax),
                ],
            ));
        }
    }
    let (_, corners) = best.ok_or(Error::DegenerateInput("empty hull"))?;
    Quad::new(corners).map_err(|_| Error::DegenerateInput("points are collinear"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(c: &[(f64, f64)]) -> Vec<Point2> {
        c.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn axis_aligned_rect_is_its_own_min_rect() {
        let r = min_area_rect(&pts(&[(0., 0.), (4., 0.), (4., 2.), (0., 2.)])).unwrap();
        assert!((r.area() - 8.0).abs() < 1e-9);
        for (got, want) in r.to_flat().iter().zip([0., 0., 4., 0., 4., 2., 0., 2.]) {
            assert!((got - want).abs() < 1e-9, "{:?}", r);
        }
    }

    #[test]
    fn rotated_square_has_area_two() {
        let r = min_area_rect(&pts(&[(1., 0.), (2., 1.), (1., 2.), (0., 1.)])).unwrap();
        assert!((r.area() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            min_area_rect(&pts(&[(0., 0.), (1., 1.)])),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            min_area_rect(&pts(&[(0., 0.), (1., 1.), (2., 2.), (3., 3.)])),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let h = convex_hull(&pts(&[
            (0., 0.),
            (1., 0.),
            (2., 0.),
            (2., 2.),
            (0., 2.),
            (1., 1.),
        ]));
        assert_eq!(h.len(), 4);
    }
}
