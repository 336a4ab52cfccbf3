//! `bench`: decode every corpus record with each method and compare.

use rayon::prelude::*;

use pyramask::evaluation::{iou_sweep, validate_thresholds, Annotation, Detection, EvalImage};
use pyramask::io::load_mask;

use crate::commands::decode_with;
use crate::config::{Config, BENCH_BASELINE_THRESHOLD};
use crate::corpus::{check_integrity, load_manifest};
use crate::report::{write_reports, ErrorRow, MethodReport};
use crate::{BenchArgs, CmdResult, Failure, Method};

/// Fraction of records that may fail to load before `bench` exits nonzero.
pub const MAX_FAILED_FRACTION: f64 = 0.1;

struct Loaded {
    id: String,
    gt: pyramask::Quad,
    detections: Vec<Option<Detection>>,
}

pub fn bench(args: &BenchArgs, cfg: &Config) -> CmdResult {
    validate_thresholds(&args.iou_thresholds)?;
    let mut methods = args.method.clone();
    methods.sort_unstable();
    methods.dedup();
    let baseline = cfg.baseline_with(args.baseline_threshold, BENCH_BASELINE_THRESHOLD)?;
    let manifest = load_manifest(&args.corpus)?;
    let checks = check_integrity(&args.corpus, &manifest)?;

    let outcomes: Vec<(Option<Loaded>, Vec<ErrorRow>)> = manifest
        .records
        .par_iter()
        .zip(checks)
        .map(|(rec, check)| {
            let fail = |stage, method: &str, message: String| ErrorRow {
                record: rec.id.clone(),
                method: method.to_string(),
                stage,
                message,
            };
            if let Err(msg) = check {
                return (None, vec![fail("integrity", "", msg)]);
            }
            let mask = match load_mask(&rec.mask_path(&args.corpus)) {
                Ok(m) => m,
                Err(e) => return (None, vec![fail("load", "", e.to_string())]),
            };
            let gt = rec.ground_truth().expect("checked above");
            let mut errors = Vec::new();
            let detections = methods
                .iter()
                .map(
                    |&m| match decode_with(m, &mask, &mask.rect(), &cfg.clustering, &baseline) {
                        Ok(d) => Some(Detection {
                            quad: d.quad,
                            confidence: d.confidence,
                        }),
                        Err(e) => {
                            errors.push(fail("decode", m.name(), e.to_string()));
                            None
                        }
                    },
                )
                .collect();
            (
                Some(Loaded {
                    id: rec.id.clone(),
                    gt,
                    detections,
                }),
                errors,
            )
        })
        .collect();

    let total = outcomes.len();
    let failed = outcomes.iter().filter(|(l, _)| l.is_none()).count();
    let errors: Vec<ErrorRow> = outcomes
        .iter()
        .flat_map(|(_, e)| e.iter().cloned())
        .collect();
    let loaded: Vec<&Loaded> = outcomes.iter().filter_map(|(l, _)| l.as_ref()).collect();

    let mut reports = Vec::new();
    if !loaded.is_empty() {
        for (k, &m) in methods.iter().enumerate() {
            let images: Vec<EvalImage> = loaded
                .iter()
                .map(|l| EvalImage {
                    predictions: l.detections[k].iter().cloned().collect(),
                    annotation: Annotation::new(l.id.clone(), vec![l.gt]),
                })
                .collect();
            reports.push(MethodReport {
                method: m.name().to_string(),
                report: iou_sweep(&images, &args.iou_thresholds)?,
            });
        }
    }
    let reference = methods
        .contains(&Method::Baseline)
        .then_some(Method::Baseline.name());
    let md = write_reports(&args.out, &reports, reference, Some(&errors))?;
    print!("{md}");
    if failed as f64 > MAX_FAILED_FRACTION * total as f64 {
        return Err(Failure::usage(format!(
            "{failed} of {total} records failed to load; see errors.csv"
        )));
    }
    Ok(())
}
