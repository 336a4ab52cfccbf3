mod common;

use proptest::prelude::*;
use pyramask::geometry::{quad_center, Point2, Quad, Rect};
use pyramask::pyramid_label::{pyramid_score, rasterize_label, select_region, RegionId};
use pyramask::synth::{margin_box, record_rng, QuadSampler};
use rand::Rng;

fn quad_from_seed(seed: u64) -> Quad {
    QuadSampler::default().sample(&mut record_rng(seed, 0))
}

proptest! {
    #[test]
    fn scores_stay_in_unit_interval(seed in any::<u64>(), px in -100.0..600.0f64, py in -100.0..600.0f64) {
        let s = pyramid_score(&quad_from_seed(seed), Point2::new(px, py)).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn apex_scores_exactly_one(seed in any::<u64>()) {
        let q = quad_from_seed(seed);
        prop_assert_eq!(pyramid_score(&q, quad_center(&q)).unwrap(), 1.0);
    }

    #[test]
    fn boundary_scores_zero(seed in any::<u64>()) {
        let q = quad_from_seed(seed);
        let mut rng = record_rng(seed, 5);
        for i in 0..4 {
            let (a, b) = (q.vertex(i), q.vertex(i + 1));
            for _ in 0..100 {
                let t: f64 = rng.random();
                let s = pyramid_score(&q, a + (b - a) * t).unwrap();
                prop_assert!(s < 1e-9, "edge {i} t {t}: {s}");
            }
        }
    }

    #[test]
    fn spokes_are_linear(seed in any::<u64>(), vertex in 0usize..4, t in 0.0..=1.0f64) {
        let q = quad_from_seed(seed);
        let o = quad_center(&q);
        let s = pyramid_score(&q, o + (q.vertex(vertex) - o) * t).unwrap();
        prop_assert!((s - (1.0 - t)).abs() < 1e-9);
    }

    #[test]
    fn interior_points_pick_one_region(seed in any::<u64>(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let q = quad_from_seed(seed);
        let b = q.bounding_rect();
        let p = Point2::new(b.x0 + u * b.width(), b.y0 + v * b.height());
        let o = quad_center(&q);
        let mut strict = Vec::new();
        let mut sums = Vec::new();
        for id in RegionId::ALL {
            let i = id.index();
            let (a, bb) = pyramask::geometry::decompose(o, q.vertex(i), q.vertex(i + 1), p).unwrap();
            if a > 0.0 && bb > 0.0 {
                strict.push(id);
            }
            if a >= -1e-9 && bb >= -1e-9 {
                sums.push(a + bb);
            }
        }
        prop_assert!(!sums.is_empty());
        prop_assert!(strict.len() <= 1);
        if strict.is_empty() {
            prop_assert!(sums.len() >= 2);
        }
        prop_assert!(sums.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9));
        let (_, a, bb) = select_region(&q, p).unwrap();
        prop_assert!((a + bb - sums[0]).abs() < 1e-9);
    }
}

#[test]
fn rasterization_matches_barycentric_oracle() {
    for seed in 0..20 {
        let q = quad_from_seed(seed);
        let rect = margin_box(&q, 0.1);
        let m = rasterize_label(&q, 28, 28, rect).unwrap();
        for row in 0..28 {
            for col in 0..28 {
                let want = common::barycentric_height(&q, m.cell_center(col, row));
                assert!(
                    (m.get(col, row) - want).abs() < 1e-9,
                    "seed {seed} cell {col},{row}"
                );
            }
        }
    }
}

#[test]
fn peak_lands_near_center() {
    let q = Quad::from_flat(&[12., 8., 60., 10., 58., 30., 10., 28.]).unwrap();
    let rect = Rect::new(0., 0., 70., 40.).unwrap();
    let m = rasterize_label(&q, 56, 56, rect).unwrap();
    let (best, _) = m
        .scores()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let c = m.cell_center(best % 56, best / 56);
    let o = quad_center(&q);
    assert!((c.x - o.x).abs() <= m.cell_width() && (c.y - o.y).abs() <= m.cell_height());
    assert!(m.scores().iter().all(|&s| s <= 1.0));
}
