//! `generate`, `decode` and `eval`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use pyramask::baseline::{decode_baseline, BaselineConfig};
use pyramask::evaluation::{iou_sweep, Annotation, Detection, EvalImage};
use pyramask::io::{load_mask, read_regions, rect_from_array, save_mask, RegionRecord};
use pyramask::{decode_pyramid, rasterize_label, ClusteringConfig, Error, Quad, Rect, SoftMask};

use crate::config::Config;
use crate::report::{write_reports, MethodReport};
use crate::{CmdResult, DecodeArgs, EvalArgs, Failure, GenerateArgs, Method};

fn rect_arg(v: &[f64]) -> Result<Rect, Failure> {
    let a: [f64; 4] = v
        .try_into()
        .map_err(|_| Failure::usage("--box takes four values"))?;
    rect_from_array(a).map_err(|e| Failure::usage(format!("--box: {e}")))
}

pub fn generate(args: &GenerateArgs) -> CmdResult {
    if args.quad.len() != 8 {
        return Err(Failure::usage("--quad takes eight values"));
    }
    let quad = Quad::from_flat(&args.quad)?;
    let rect = rect_arg(&args.rect)?;
    let mask = rasterize_label(&quad, args.width, args.height, rect)?;
    save_mask(&args.out, &mask)?;
    Ok(())
}

/// A decoded quad with the fields reported on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub quad: Quad,
    pub confidence: f64,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
}

/// Confidence is the peak mask score.
pub fn decode_with(
    method: Method,
    mask: &SoftMask,
    bbox: &Rect,
    clustering: &ClusteringConfig,
    baseline: &BaselineConfig,
) -> pyramask::Result<Decoded> {
    let confidence = mask.scores().iter().copied().fold(0.0, f64::max);
    match method {
        Method::Pyramid => {
            let r = decode_pyramid(mask, bbox, clustering)?;
            Ok(Decoded {
                quad: r.quad,
                confidence,
                iterations: Some(r.fit.iterations_run),
                residual: Some(r.fit.final_residual),
            })
        }
        Method::Baseline => Ok(Decoded {
            quad: decode_baseline(mask, baseline)?,
            confidence,
            iterations: None,
            residual: None,
        }),
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::SingularDecomposition => "SingularDecomposition",
        Error::DegeneratePlane => "DegeneratePlane",
        Error::HorizontalPlane => "HorizontalPlane",
        Error::ParallelLines => "ParallelLines",
        Error::NonConvexInput => "NonConvexInput",
        Error::DegenerateInput(_) => "DegenerateInput",
        Error::DegenerateQuad(_) => "DegenerateQuad",
        Error::EmptyMask => "EmptyMask",
        Error::DimensionMismatch(..) => "DimensionMismatch",
        Error::EmptyDataset => "EmptyDataset",
        Error::InvalidArgument(_) => "InvalidArgument",
    }
}

#[derive(Serialize)]
struct DecodeLine<'a> {
    id: &'a str,
    method: &'static str,
    quad: [f64; 8],
    confidence: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    id: &'a str,
    method: &'static str,
    error: &'static str,
    message: String,
}

fn print_json_line<T: Serialize>(value: &T) -> CmdResult {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn default_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn decode(args: &DecodeArgs, cfg: &Config) -> CmdResult {
    let mask = load_mask(&args.mask)?;
    let bbox = match &args.rect {
        Some(v) => rect_arg(v)?,
        None => mask.rect(),
    };
    let baseline = cfg.baseline_with(
        args.baseline_threshold,
        pyramask::baseline::DEFAULT_BINARIZE_THRESHOLD,
    )?;
    let id = args.id.clone().unwrap_or_else(|| default_id(&args.mask));
    let method = args.method.name();
    match decode_with(args.method, &mask, &bbox, &cfg.clustering, &baseline) {
        Ok(d) => print_json_line(&DecodeLine {
            id: &id,
            method,
            quad: d.quad.to_flat(),
            confidence: d.confidence,
            iterations: d.iterations,
            residual: d.residual,
        }),
        Err(e) => {
            print_json_line(&ErrorLine {
                id: &id,
                method,
                error: error_kind(&e),
                message: e.to_string(),
            })?;
            Err(e.into())
        }
    }
}

fn quad_of(r: &RegionRecord, file: &Path) -> Result<Quad, Failure> {
    r.to_quad().map_err(|e| {
        let mut f = Failure::from(e.clone());
        f.message = format!("{}: region {}: {e}", file.display(), r.id);
        f
    })
}

fn image<'a>(images: &'a mut BTreeMap<String, EvalImage>, id: &str) -> &'a mut EvalImage {
    images.entry(id.to_string()).or_insert_with(|| EvalImage {
        predictions: Vec::new(),
        annotation: Annotation::new(id, Vec::new()),
    })
}

/// Groups regions by `id` (one image per id) in id order.
pub fn group_images(
    preds: &[RegionRecord],
    gts: &[RegionRecord],
    pred_file: &Path,
    gt_file: &Path,
) -> Result<Vec<EvalImage>, Failure> {
    let mut images = BTreeMap::new();
    for g in gts {
        let q = quad_of(g, gt_file)?;
        let ann = &mut image(&mut images, &g.id).annotation;
        ann.quads.push(q);
        ann.ignore.push(g.ignore.unwrap_or(false));
    }
    for p in preds {
        let quad = quad_of(p, pred_file)?;
        image(&mut images, &p.id).predictions.push(Detection {
            quad,
            confidence: p.confidence.unwrap_or(1.0),
        });
    }
    Ok(images.into_values().collect())
}

pub fn eval(args: &EvalArgs) -> CmdResult {
    pyramask::evaluation::validate_thresholds(&args.iou_thresholds)?;
    let preds = read_regions(&args.pred)?;
    let gts = read_regions(&args.gt)?;
    let images = group_images(&preds, &gts, &args.pred, &args.gt)?;
    if images.is_empty() {
        return Err(Error::EmptyDataset.into());
    }
    let report = iou_sweep(&images, &args.iou_thresholds)?;
    let reports = [MethodReport {
        method: default_id(&args.pred),
        report,
    }];
    let md = match &args.out {
        Some(dir) => write_reports(dir, &reports, None, None)?,
        None => {
            let m = crate::report::metrics_table(&reports, None);
            let h = crate::report::histogram_table(&reports);
            crate::report::markdown_report(&m, &h)
        }
    };
    print!("{md}");
    Ok(())
}
