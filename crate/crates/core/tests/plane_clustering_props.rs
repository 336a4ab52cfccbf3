mod common;

use pyramask::baseline::{decode_baseline, BaselineConfig};
use pyramask::geometry::{plane_through, polygon_iou, Plane, Point3, Quad};
use pyramask::plane_clustering::{
    cluster_planes, decode_pyramid, fit_plane_robust, select_positive, ClusteringConfig,
};
use pyramask::synth::{record_rng, synth_sample, NoiseSpec, SynthOptions, Truncation};
use rand::Rng;

fn random_plane<R: Rng>(rng: &mut R) -> Plane {
    Plane::new(
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.1..0.1),
        rng.random_range(-2.0..2.0),
    )
}

fn samples_on<R: Rng>(pl: &Plane, n: usize, rng: &mut R) -> Vec<Point3> {
    (0..n)
        .map(|_| {
            let (x, y) = (rng.random_range(0.0..50.0), rng.random_range(0.0..50.0));
            Point3::new(x, y, pl.z_at(x, y))
        })
        .collect()
}

#[test]
fn robust_fit_equals_ols_without_outliers() {
    let cfg = ClusteringConfig::default();
    let mut rng = record_rng(5, 0);
    for _ in 0..50 {
        let pl = random_plane(&mut rng);
        let pts = samples_on(&pl, 100, &mut rng);
        let (fit, res) = fit_plane_robust(&pts, &cfg, Plane::new(0., 0., 0.));
        assert!(common::max_coef_diff(&fit, &common::ols_plane(&pts)) < 1e-6);
        assert!(res < 1e-12);
    }
}

#[test]
fn robust_fit_ignores_a_fifth_of_gross_outliers() {
    let cfg = ClusteringConfig::default();
    let mut rng = record_rng(6, 0);
    for _ in 0..50 {
        let pl = random_plane(&mut rng);
        let clean = samples_on(&pl, 100, &mut rng);
        let reference = common::ols_plane(&clean);
        let mut dirty = clean.clone();
        for p in dirty.iter_mut().take(20) {
            p.z += if rng.random::<bool>() { 10.0 } else { -10.0 };
        }
        let ols = common::ols_plane(&dirty);
        let (fit, _) = fit_plane_robust(&dirty, &cfg, Plane::new(0., 0., 0.));
        assert!(
            common::max_coef_diff(&fit, &reference) < 1e-3,
            "{fit:?} vs {reference:?}"
        );
        assert!(common::max_coef_diff(&ols, &reference) > 1e-3);
    }
}

#[test]
fn clustering_terminates_and_residual_does_not_grow_on_clean_masks() {
    let opts = SynthOptions::default();
    let noise = NoiseSpec {
        seed: 17,
        ..NoiseSpec::default()
    };
    for cfg in [
        ClusteringConfig::default(),
        ClusteringConfig {
            max_iter: 3,
            residual_threshold: 1e-300,
            ..ClusteringConfig::default()
        },
    ] {
        for i in 0..100 {
            let s = synth_sample(i, &opts, &noise).unwrap();
            let pos = select_positive(&s.mask, &cfg).unwrap();
            let fit = cluster_planes(&pos, &s.rect, &cfg).unwrap();
            assert!(fit.iterations_run <= cfg.max_iter);
            assert_eq!(fit.residual_trace.len(), fit.iterations_run);
            assert!(
                fit.final_residual <= fit.residual_trace[0] + 1e-15,
                "record {i}: {:?}",
                fit.residual_trace
            );
            assert!(fit.cluster_sizes.iter().sum::<usize>() <= pos.len());
        }
    }
}

#[test]
fn exact_pyramid_points_converge_to_generating_planes() {
    let cfg = ClusteringConfig::default();
    let bbox = pyramask::Rect::new(100.0, 50.0, 180.0, 80.0).unwrap();
    let corners = bbox.corners();
    let apex = Point3::new(140.0, 65.0, 1.0);
    let planes: Vec<Plane> = (0..4)
        .map(|i| {
            let (a, b) = (corners[i], corners[(i + 1) % 4]);
            plane_through(apex, Point3::new(a.x, a.y, 0.0), Point3::new(b.x, b.y, 0.0)).unwrap()
        })
        .collect();
    // Sample the pyramid height on a symmetric lattice.
    let mut pos = Vec::new();
    for i in 0..40 {
        for j in 0..20 {
            let (x, y) = (101.0 + 2.0 * i as f64, 50.75 + 1.5 * j as f64);
            let z = planes.iter().map(|p| p.z_at(x, y)).fold(f64::MAX, f64::min);
            if z > 0.1 {
                pos.push(Point3::new(x, y, z));
            }
        }
    }
    let fit = cluster_planes(&pos, &bbox, &cfg).unwrap();
    assert!(fit.final_residual <= 1e-4);
    assert!(fit.iterations_run <= 2);
    for (got, want) in fit.planes.iter().zip(&planes) {
        assert!(
            common::max_coef_diff(got, want) < 1e-6,
            "{got:?} vs {want:?}"
        );
    }
}

#[test]
fn round_trip_on_clean_masks() {
    let cfg = ClusteringConfig::default();
    let opts = SynthOptions {
        width: 48,
        height: 48,
        ..SynthOptions::default()
    };
    let noise = NoiseSpec {
        seed: 3,
        ..NoiseSpec::default()
    };
    let ious: Vec<f64> = (0..200)
        .map(|i| {
            let s = synth_sample(i, &opts, &noise).unwrap();
            let r = decode_pyramid(&s.mask, &s.rect, &cfg).unwrap();
            polygon_iou(&r.quad, &s.quad).unwrap()
        })
        .collect();
    assert!(ious.iter().all(|&v| v >= 0.9));
    assert!(common::median(&ious) >= 0.95);
}

#[test]
fn noisy_masks_keep_median_iou() {
    let cfg = ClusteringConfig::default();
    let opts = SynthOptions::default();
    let noise = NoiseSpec {
        additive_uniform_amplitude: 0.05,
        seed: 4,
        ..NoiseSpec::default()
    };
    let ious: Vec<f64> = (0..100)
        .map(|i| {
            let s = synth_sample(i, &opts, &noise).unwrap();
            decode_pyramid(&s.mask, &s.rect, &cfg)
                .ok()
                .and_then(|r| polygon_iou(&r.quad, &s.quad).ok())
                .unwrap_or(0.0)
        })
        .collect();
    assert!(common::median(&ious) >= 0.9);
}

fn decode_ious(i: u64, trunc: f64) -> (f64, f64) {
    let cfg = ClusteringConfig::default();
    let base = BaselineConfig {
        threshold: 0.05,
        ..BaselineConfig::default()
    };
    let noise = NoiseSpec {
        truncation: Truncation {
            right: trunc,
            ..Truncation::default()
        },
        seed: 23,
        ..NoiseSpec::default()
    };
    let s = synth_sample(i, &SynthOptions::default(), &noise).unwrap();
    let score = |q: Option<Quad>| q.and_then(|q| polygon_iou(&q, &s.quad).ok()).unwrap_or(0.0);
    (
        score(decode_pyramid(&s.mask, &s.rect, &cfg).ok().map(|r| r.quad)),
        score(decode_baseline(&s.mask, &base).ok()),
    )
}

#[test]
fn pyramid_beats_baseline_on_truncated_boxes() {
    let trials = 500;
    let wins = (0..trials)
        .filter(|&i| {
            let (p, b) = decode_ious(i, 0.15);
            p > b
        })
        .count();
    assert!(wins as f64 >= 0.9 * trials as f64, "{wins}/{trials}");
}

#[test]
fn decoded_quad_reaches_past_truncated_edge() {
    let cfg = ClusteringConfig::default();
    let noise = NoiseSpec {
        truncation: Truncation {
            right: 0.15,
            ..Truncation::default()
        },
        seed: 29,
        ..NoiseSpec::default()
    };
    for i in 0..200 {
        let s = synth_sample(i, &SynthOptions::default(), &noise).unwrap();
        let r = decode_pyramid(&s.mask, &s.rect, &cfg).unwrap();
        let got = r.quad.bounding_rect().x1;
        let want = s.quad.bounding_rect().x1;
        assert!(got > s.rect.x1, "record {i}");
        assert!(
            (got - want).abs() < 0.05 * (want - s.rect.x1),
            "record {i}: {got} vs {want}"
        );
    }
}

// The min-area-rect baseline sometimes fits a truncated quad more tightly
// than the full one, so its IoU rises while the pyramid stays exact.
#[test]
#[ignore = "holds in about 87% of trials with the default bench baseline"]
fn truncation_hurts_baseline_more_than_pyramid() {
    let trials = 500;
    let better = (0..trials)
        .filter(|&i| {
            let (p_full, b_full) = decode_ious(i, 0.0);
            let (p_cut, b_cut) = decode_ious(i, 0.15);
            p_full - p_cut < b_full - b_cut
        })
        .count();
    assert!(better as f64 >= 0.9 * trials as f64, "{better}/{trials}");
}
