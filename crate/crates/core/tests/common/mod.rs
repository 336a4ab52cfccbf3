//! Independent reference computations for the property and acceptance
//! suites. None of these go through the code paths they check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pyramask::geometry::{Plane, Point2, Point3, Quad};
use rand::Rng;

/// Pyramid height by barycentric interpolation over the four triangles
/// (center, v_i, v_{i+1}) with heights (1, 0, 0); 0 outside all of them.
pub fn barycentric_height(q: &Quad, p: Point2) -> f64 {
    let v = q.vertices();
    let o = Point2::new(
        v.iter().map(|v| v.x).sum::<f64>() / 4.0,
        v.iter().map(|v| v.y).sum::<f64>() / 4.0,
    );
    let tri_area = |a: Point2, b: Point2, c: Point2| {
        0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
    };
    for i in 0..4 {
        let (a, b) = (v[i], v[(i + 1) % 4]);
        let total = tri_area(o, a, b);
        let w_o = tri_area(p, a, b) / total;
        let w_a = tri_area(o, p, b) / total;
        let w_b = tri_area(o, a, p) / total;
        if w_o >= -1e-12 && w_a >= -1e-12 && w_b >= -1e-12 {
            return w_o.clamp(0.0, 1.0);
        }
    }
    0.0
}

fn inside_convex(q: &Quad, p: Point2) -> bool {
    let v = q.vertices();
    (0..4).all(|i| {
        let (a, b) = (v[i], v[(i + 1) % 4]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
    })
}

/// IoU by uniform sampling over the union's bounding box.
pub fn monte_carlo_iou<R: Rng>(q1: &Quad, q2: &Quad, samples: usize, rng: &mut R) -> f64 {
    let all: Vec<Point2> = q1.vertices().iter().chain(q2.vertices()).copied().collect();
    let x0 = all.iter().map(|p| p.x).fold(f64::MAX, f64::min);
    let x1 = all.iter().map(|p| p.x).fold(f64::MIN, f64::max);
    let y0 = all.iter().map(|p| p.y).fold(f64::MAX, f64::min);
    let y1 = all.iter().map(|p| p.y).fold(f64::MIN, f64::max);
    let (mut both, mut either) = (0usize, 0usize);
    for _ in 0..samples {
        let p = Point2::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        let (a, b) = (inside_convex(q1, p), inside_convex(q2, p));
        both += (a && b) as usize;
        either += (a || b) as usize;
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

/// Ordinary least squares `z = c0 + c1 x + c2 y` by SVD of the design matrix.
pub fn ols_plane(points: &[Point3]) -> Plane {
    let n = points.len();
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => points[i].x,
        1 => points[i].y,
        _ => 1.0,
    });
    let z = DVector::from_iterator(n, points.iter().map(|p| p.z));
    let sol = a.svd(true, true).solve(&z, 1e-14).expect("svd solve");
    Plane::new(-sol[0], -sol[1], -sol[2])
}

pub fn max_coef_diff(a: &Plane, b: &Plane) -> f64 {
    (a.a - b.a)
        .abs()
        .max((a.b - b.b).abs())
        .max((a.d - b.d).abs())
}

/// Percentile of an unsorted sample (nearest rank).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Union-find labelling of 8-connected foreground cells; returns the sorted
/// list of component sizes.
pub fn union_find_sizes(width: usize, height: usize, bits: &[bool]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..bits.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            if !bits[i] {
                continue;
            }
            for (dr, dc) in [(0isize, 1isize), (1, -1), (1, 0), (1, 1)] {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr >= height as isize || nc >= width as isize {
                    continue;
                }
                let j = nr as usize * width + nc as usize;
                if bits[j] {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut counts = std::collections::HashMap::new();
    for (i, &on) in bits.iter().enumerate() {
        if on {
            *counts.entry(find(&mut parent, i)).or_insert(0usize) += 1;
        }
    }
    let mut sizes: Vec<usize> = counts.into_values().collect();
    sizes.sort_unstable();
    sizes
}
