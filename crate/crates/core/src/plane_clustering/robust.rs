//! Iteratively reweighted least squares for `z = c0 + c1*x + c2*y` with
//! Tukey's bisquare weights and a MAD scale estimate.

use super::ClusteringConfig;
use crate::geometry::{Plane, Point3};

/// Consistency factor turning the median absolute deviation into a standard
/// deviation under Gaussian noise.
const MAD_TO_SIGMA: f64 = 1.4826;
const COEF_TOL: f64 = 1e-10;
/// Below this relative determinant the footprint is treated as collinear.
const COLLINEAR_EPS: f64 = 1e-10;

/// Tukey bisquare weight for a standardized residual `u = r / (c * s)`.
pub fn bisquare_weight(u: f64) -> f64 {
    if u.abs() < 1.0 {
        let t = 1.0 - u * u;
        t * t
    } else {
        0.0
    }
}

/// Weighted least-squares plane; `None` when the weighted footprint is
/// degenerate. `weights = None` means ordinary least squares.
pub fn weighted_plane(points: &[Point3], weights: Option<&[f64]>) -> Option<Plane> {
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let mut sw = 0.0;
    let (mut mx, mut my, mut mz) = (0.0, 0.0, 0.0);
    let mut support = 0usize;
    for (i, p) in points.iter().enumerate() {
        let wi = w(i);
        if wi > 0.0 {
            support += 1;
        }
        sw += wi;
        mx += wi * p.x;
        my += wi * p.y;
        mz += wi * p.z;
    }
    if support < 3 || sw <= 0.0 {
        return None;
    }
    mx /= sw;
    my /= sw;
    mz /= sw;
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, p) in points.iter().enumerate() {
        let wi = w(i);
        let (dx, dy, dz) = (p.x - mx, p.y - my, p.z - mz);
        sxx += wi * dx * dx;
        sxy += wi * dx * dy;
        syy += wi * dy * dy;
        sxz += wi * dx * dz;
        syz += wi * dy * dz;
    }
    let det = sxx * syy - sxy * sxy;
    if !(sxx > 0.0 && syy > 0.0) || det <= COLLINEAR_EPS * sxx * syy {
        return None;
    }
    let c1 = (sxz * syy - syz * sxy) / det;
    let c2 = (syz * sxx - sxz * sxy) / det;
    let c0 = mz - c1 * mx - c2 * my;
    let plane = Plane::new(-c1, -c2, -c0);
    plane.is_finite().then_some(plane)
}

/// Mean squared perpendicular distance; 0 for an empty set.
pub fn mean_squared_distance(points: &[Point3], plane: &Plane) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points
        .iter()
        .map(|p| plane.distance(*p).powi(2))
        .sum::<f64>()
        / points.len() as f64
}

fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().copied().fold(f64::MIN, f64::max);
        0.5 * (lower + upper)
    }
}

/// Robust plane fit. Sets too small or too degenerate to determine a plane
/// return `fallback` unchanged, with the residual measured against it.
pub fn fit_plane_robust(
    points: &[Point3],
    cfg: &ClusteringConfig,
    fallback: Plane,
) -> (Plane, f64) {
    let Some(mut plane) = weighted_plane(points, None) else {
        return (fallback, mean_squared_distance(points, &fallback));
    };

    // Keeps the scale strictly positive once most residuals vanish.
    let z_scale = points.iter().map(|p| p.z.abs()).sum::<f64>() / points.len() as f64;
    let scale_floor = 1e-9 * (1.0 + z_scale);

    let mut abs_res = vec![0.0; points.len()];
    let mut weights = vec![0.0; points.len()];
    for _ in 0..cfg.irls_iterations {
        for (r, p) in abs_res.iter_mut().zip(points) {
            *r = plane.residual(*p).abs();
        }
        let mut scratch = abs_res.clone();
        let scale = (MAD_TO_SIGMA * median_in_place(&mut scratch)).max(scale_floor);
        let cutoff = cfg.irls_tuning_constant * scale;
        for (w, r) in weights.iter_mut().zip(&abs_res) {
            *w = bisquare_weight(r / cutoff);
        }
        let Some(next) = weighted_plane(points, Some(&weights)) else {
            break;
        };
        let change = (next.a - plane.a)
            .abs()
            .max((next.b - plane.b).abs())
            .max((next.d - plane.d).abs());
        plane = next;
        if change < COEF_TOL {
            break;
        }
    }
    (plane, mean_squared_distance(points, &plane))
}
