//! Detection scoring against ground truth: greedy one-to-one IoU matching,
//! precision / recall / F-measure per IoU threshold, the IoU histogram of
//! matched predictions, and anchor aspect-ratio statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_iou, Quad};

/// IoU thresholds swept by default.
pub const DEFAULT_IOU_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];
pub const HISTOGRAM_LOW: f64 = 0.5;
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;
pub const HISTOGRAM_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub quad: Quad,
    pub confidence: f64,
}

/// Ground truth for one image.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Annotation {
    pub image_id: String,
    pub quads: Vec<Quad>,
    /// Parallel to `quads`; `true` marks a don't-care region.
    pub ignore: Vec<bool>,
}

impl Annotation {
    pub fn new(image_id: impl Into<String>, quads: Vec<Quad>) -> Self {
        let ignore = vec![false; quads.len()];
        Self {
            image_id: image_id.into(),
            quads,
            ignore,
        }
    }

    pub fn is_ignored(&self, i: usize) -> bool {
        self.ignore.get(i).copied().unwrap_or(false)
    }

    pub fn care_count(&self) -> usize {
        (0..self.quads.len())
            .filter(|&i| !self.is_ignored(i))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchOutcome {
    /// Matches against cared-for ground truth.
    pub matches: Vec<Match>,
    /// Predictions absorbed by ignored regions; excluded from precision.
    pub ignored_preds: Vec<usize>,
}

/// IoU used for matching. Non-convex pairs cannot be clipped exactly and
/// score 0.
fn pair_iou(a: &Quad, b: &Quad) -> f64 {
    match polygon_iou(a, b) {
        Ok(v) => v,
        Err(_) => {
            log::debug!("non-convex pair scored as IoU 0");
            0.0
        }
    }
}

/// Greedy confidence-ordered matching. Each prediction, from most to least
/// confident (input order on ties), takes the still-free ground truth with
/// the highest IoU at or above `iou_threshold` (lowest index on ties).
pub fn match_greedy(preds: &[Detection], gts: &Annotation, iou_threshold: f64) -> MatchOutcome {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].confidence.total_cmp(&preds[a].confidence));
    let mut taken = vec![false; gts.quads.len()];
    let mut out = MatchOutcome::default();
    for pi in order {
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.quads.iter().enumerate() {
            if taken[gi] {
                continue;
            }
            let iou = pair_iou(&preds[pi].quad, gt);
            if iou >= iou_threshold && best.is_none_or(|(_, b)| iou > b) {
                best = Some((gi, iou));
            }
        }
        if let Some((gi, iou)) = best {
            taken[gi] = true;
            if gts.is_ignored(gi) {
                out.ignored_preds.push(pi);
            } else {
                out.matches.push(Match {
                    pred: pi,
                    gt: gi,
                    iou,
                });
            }
        }
    }
    out
}

pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// `(precision, recall, f)`; empty denominators give 0.
pub fn prf(matched: usize, num_pred: usize, num_gt: usize) -> (f64, f64, f64) {
    let p = if num_pred == 0 {
        0.0
    } else {
        matched as f64 / num_pred as f64
    };
    let r = if num_gt == 0 {
        0.0
    } else {
        matched as f64 / num_gt as f64
    };
    (p, r, f_measure(p, r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub iou_threshold: f64,
    pub matched: usize,
    pub num_pred: usize,
    pub num_gt: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Counts of matched IoUs in `[0.5, 1.0]`, bins of width 0.05; the last bin
/// is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IouHistogram {
    pub counts: [usize; HISTOGRAM_BINS],
}

impl IouHistogram {
    pub fn new() -> Self {
        Self {
            counts: [0; HISTOGRAM_BINS],
        }
    }

    pub fn bin_of(iou: f64) -> Option<usize> {
        if !(HISTOGRAM_LOW..=1.0).contains(&iou) {
            return None;
        }
        let k = ((iou - HISTOGRAM_LOW) / HISTOGRAM_BIN_WIDTH).floor() as usize;
        Some(k.min(HISTOGRAM_BINS - 1))
    }

    pub fn add(&mut self, iou: f64) {
        if let Some(k) = Self::bin_of(iou) {
            self.counts[k] += 1;
        }
    }

    pub fn bin_range(k: usize) -> (f64, f64) {
        let lo = HISTOGRAM_LOW + k as f64 * HISTOGRAM_BIN_WIDTH;
        (lo, lo + HISTOGRAM_BIN_WIDTH)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

impl Default for IouHistogram {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ThresholdRow>,
    pub histogram: IouHistogram,
}

/// One image's predictions with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalImage {
    pub predictions: Vec<Detection>,
    pub annotation: Annotation,
}

pub fn validate_thresholds(thresholds: &[f64]) -> Result<()> {
    if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "IoU threshold {t} outside (0, 1]"
        )));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "IoU thresholds must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Matches every image independently at each threshold and sums the counts.
/// The histogram always comes from the matching at IoU 0.5.
pub fn iou_sweep(images: &[EvalImage], thresholds: &[f64]) -> Result<EvalReport> {
    validate_thresholds(thresholds)?;
    let mut rows = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let (mut matched, mut num_pred, mut num_gt) = (0, 0, 0);
        for img in images {
            let m = match_greedy(&img.predictions, &img.annotation, t);
            matched += m.matches.len();
            num_pred += img.predictions.len() - m.ignored_preds.len();
            num_gt += img.annotation.care_count();
        }
        let (precision, recall, f_measure) = prf(matched, num_pred, num_gt);
        rows.push(ThresholdRow {
            iou_threshold: t,
            matched,
            num_pred,
            num_gt,
            precision,
            recall,
            f_measure,
        });
    }
    let mut histogram = IouHistogram::new();
    for img in images {
        for m in match_greedy(&img.predictions, &img.annotation, HISTOGRAM_LOW).matches {
            histogram.add(m.iou);
        }
    }
    Ok(EvalReport { rows, histogram })
}

/// Linear interpolation between the closest order statistics of a sorted
/// sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quantile {q} outside [0, 1]"
        )));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// `count` values from `low` to `high` in geometric progression.
pub fn geometric_ladder(low: f64, high: f64, count: usize) -> Result<Vec<f64>> {
    if !(low > 0.0 && high >= low && high.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ladder endpoints must satisfy 0 < {low} <= {high}"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidArgument(
            "ladder needs at least 2 values".into(),
        ));
    }
    let ratio = high / low;
    let steps = (count - 1) as f64;
    let mut out: Vec<f64> = (0..count)
        .map(|k| low * ratio.powf(k as f64 / steps))
        .collect();
    out[0] = low;
    out[count - 1] = high;
    Ok(out)
}

/// Anchor aspect ratios (`w / h`): the `low_q` and `high_q` empirical
/// quantiles of the box ratios, with values in between spaced evenly in
/// log-ratio.
pub fn compute_anchor_ratios(
    boxes: &[(f64, f64)],
    low_q: f64,
    high_q: f64,
    count: usize,
) -> Result<Vec<f64>> {
    if boxes.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(0.0 < low_q && low_q < high_q && high_q < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantiles must satisfy 0 < {low_q} < {high_q} < 1"
        )));
    }
    let mut ratios = Vec::with_capacity(boxes.len());
    for &(w, h) in boxes {
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "box size ({w}, {h}) must be positive"
            )));
        }
        ratios.push(w / h);
    }
    ratios.sort_by(f64::total_cmp);
    let low = quantile_sorted(&ratios, low_q)?;
    let high = quantile_sorted(&ratios, high_q)?;
    geometric_ladder(low, high, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x: f64, y: f64, s: f64) -> Quad {
        Quad::from_flat(&[x, y, x + s, y, x + s, y + s, x, y + s]).unwrap()
    }

    fn det(q: Quad, c: f64) -> Detection {
        Detection {
            quad: q,
            confidence: c,
        }
    }

    #[test]
    fn match_examples() {
        let gt = Annotation::new("a", vec![sq(0., 0., 10.)]);
        let m = match_greedy(&[det(sq(0., 0., 10.), 0.9)], &gt, 0.5);
        assert_eq!(m.matches.len(), 1);

        let m = match_greedy(
            &[det(sq(1., 0., 10.), 0.3), det(sq(0., 0., 10.), 0.8)],
            &gt,
            0.5,
        );
        assert_eq!(m.matches.len(), 1);
        assert_eq!(m.matches[0].pred, 1);

        // Overlap 10 x 6.2 = 62 of union 138: IoU ~ 0.449.
        let m = match_greedy(&[det(sq(3.8, 0., 10.), 0.9)], &gt, 0.5);
        assert!(m.matches.is_empty());
    }

    #[test]
    fn ignored_regions_absorb_predictions() {
        let mut gt = Annotation::new("a", vec![sq(0., 0., 10.), sq(20., 0., 10.)]);
        gt.ignore[1] = true;
        let preds = [det(sq(0., 0., 10.), 0.9), det(sq(20., 0., 10.), 0.8)];
        let rep = iou_sweep(
            &[EvalImage {
                predictions: preds.to_vec(),
                annotation: gt,
            }],
            &[0.5],
        )
        .unwrap();
        let row = &rep.rows[0];
        assert_eq!((row.matched, row.num_pred, row.num_gt), (1, 1, 1));
        assert_eq!((row.precision, row.recall, row.f_measure), (1.0, 1.0, 1.0));
    }

    #[test]
    fn prf_examples() {
        assert_eq!(prf(0, 5, 7), (0.0, 0.0, 0.0));
        assert_eq!(prf(4, 4, 4), (1.0, 1.0, 1.0));
        assert_eq!(prf(0, 0, 0), (0.0, 0.0, 0.0));
        // Reported row: precision 85.15, recall 72.77, F 78.48.
        let f = f_measure(0.8515, 0.7277);
        assert!((f * 100.0 - 78.48).abs() < 0.01, "{f}");
    }

    #[test]
    fn sweep_of_perfect_predictions() {
        let quads = vec![sq(0., 0., 10.), sq(30., 0., 5.)];
        let img = EvalImage {
            predictions: quads.iter().map(|&q| det(q, 1.0)).collect(),
            annotation: Annotation::new("x", quads),
        };
        let rep = iou_sweep(&[img], &DEFAULT_IOU_THRESHOLDS).unwrap();
        assert!(rep
            .rows
            .iter()
            .all(|r| (r.precision, r.recall, r.f_measure) == (1.0, 1.0, 1.0)));
        assert_eq!(rep.histogram.counts[HISTOGRAM_BINS - 1], 2);
        assert_eq!(rep.histogram.total(), 2);
    }

    #[test]
    fn sweep_of_iou_075_predictions() {
        // A 10x10 square against a 10x(10/0.75) rectangle that contains it.
        let gt = Quad::from_flat(&[0., 0., 10., 0., 10., 10., 0., 10.]).unwrap();
        let pred = Quad::from_flat(&[0., 0., 10., 0., 10., 40. / 3., 0., 40. / 3.]).unwrap();
        assert!((polygon_iou(&gt, &pred).unwrap() - 0.75).abs() < 1e-12);
        let img = EvalImage {
            predictions: vec![det(pred, 1.0)],
            annotation: Annotation::new("x", vec![gt]),
        };
        let rep = iou_sweep(&[img], &DEFAULT_IOU_THRESHOLDS).unwrap();
        let matched: Vec<usize> = rep.rows.iter().map(|r| r.matched).collect();
        assert_eq!(matched, vec![1, 1, 1, 0, 0]);
        assert_eq!(rep.histogram.counts[IouHistogram::bin_of(0.75).unwrap()], 1);
    }

    #[test]
    fn thresholds_are_validated() {
        assert!(iou_sweep(&[], &[0.6, 0.5]).is_err());
        assert!(iou_sweep(&[], &[0.0]).is_err());
        assert!(iou_sweep(&[], &[1.5]).is_err());
        let rep = iou_sweep(&[], &[0.5, 1.0]).unwrap();
        assert!(rep
            .rows
            .iter()
            .all(|r| r.matched == 0 && r.f_measure == 0.0));
    }

    #[test]
    fn anchor_examples() {
        let ladder = geometric_ladder(0.17, 7.46, 5).unwrap();
        for (got, want) in ladder.iter().zip([0.17, 0.44, 1.13, 2.90, 7.46]) {
            assert!((got - want).abs() < 0.01, "{ladder:?}");
        }
        let squares = vec![(3.0, 3.0); 20];
        assert_eq!(
            compute_anchor_ratios(&squares, 0.05, 0.95, 5).unwrap(),
            vec![1.0; 5]
        );
        let ladder = geometric_ladder(1.0, 16.0, 5).unwrap();
        for (got, want) in ladder.iter().zip([1., 2., 4., 8., 16.]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(
            compute_anchor_ratios(&[], 0.05, 0.95, 5),
            Err(Error::EmptyDataset)
        );
        assert!(compute_anchor_ratios(&squares, 0.95, 0.05, 5).is_err());
        assert!(compute_anchor_ratios(&[(1.0, 0.0)], 0.05, 0.95, 5).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.0).unwrap(), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0).unwrap(), 5.0);
        assert_eq!(quantile_sorted(&xs, 0.5).unwrap(), 3.0);
        assert!((quantile_sorted(&xs, 0.05).unwrap() - 1.2).abs() < 1e-12);
    }
}
