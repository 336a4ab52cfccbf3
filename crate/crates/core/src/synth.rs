//! Seeded synthetic corpora: random text-like quads, their pyramid labels,
//! and models of imperfect predictions (undersized boxes, mask noise).
//!
//! Record `i` draws from its own ChaCha8 stream of the corpus seed, so a
//! corpus is identical no matter how records are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Quad, Rect};
use crate::pyramid_label::{rasterize_label, SoftMask};

/// Per-side crop fractions of the quad's extent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Truncation {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl Truncation {
    pub fn is_none(&self) -> bool {
        self.left == 0.0 && self.top == 0.0 && self.right == 0.0 && self.bottom == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// i.i.d. noise uniform in `[-amplitude, amplitude]`.
    pub additive_uniform_amplitude: f64,
    pub gaussian_sigma: f64,
    /// Fraction of cells replaced by a uniform draw from `[0, 1]`.
    pub salt_fraction: f64,
    pub truncation: Truncation,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let bad =
            |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} = {v} out of range")));
        if !(self.additive_uniform_amplitude >= 0.0 && self.additive_uniform_amplitude.is_finite())
        {
            return bad(
                "additive_uniform_amplitude",
                self.additive_uniform_amplitude,
            );
        }
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return bad("gaussian_sigma", self.gaussian_sigma);
        }
        if !(0.0..1.0).contains(&self.salt_fraction) {
            return bad("salt_fraction", self.salt_fraction);
        }
        let t = &self.truncation;
        for (name, v) in [
            ("left", t.left),
            ("top", t.top),
            ("right", t.right),
            ("bottom", t.bottom),
        ] {
            if !(0.0..0.4).contains(&v) {
                return bad(&format!("truncation.{name}"), v);
            }
        }
        Ok(())
    }
}

/// Shape distribution for random quads: jittered rotated rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadSampler {
    /// Centers are drawn uniformly from `[lo, hi]^2`.
    pub center_range: (f64, f64),
    pub width_range: (f64, f64),
    /// Height as a fraction of width.
    pub aspect_range: (f64, f64),
    pub max_rotation_deg: f64,
    /// Per-vertex jitter as a fraction of the shorter side.
    pub jitter: f64,
}

impl Default for QuadSampler {
    fn default() -> Self {
        Self {
            center_range: (150.0, 350.0),
            width_range: (40.0, 240.0),
            aspect_range: (0.25, 0.9),
            max_rotation_deg: 30.0,
            jitter: 0.15,
        }
    }
}

impl QuadSampler {
    /// Draws until the candidate is a valid convex quad.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Quad {
        loop {
            let cx = rng.random_range(self.center_range.0..=self.center_range.1);
            let cy = rng.random_range(self.center_range.0..=self.center_range.1);
            let w = rng.random_range(self.width_range.0..=self.width_range.1);
            let h = w * rng.random_range(self.aspect_range.0..=self.aspect_range.1);
            let theta = rng
                .random_range(-self.max_rotation_deg..=self.max_rotation_deg)
                .to_radians();
            let (s, c) = theta.sin_cos();
            let j = self.jitter * w.min(h);
            let mut v = [Point2::default(); 4];
            for (k, (sx, sy)) in [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
                .into_iter()
                .enumerate()
            {
                let (lx, ly) = (sx * w, sy * h);
                let dx = if j > 0.0 {
                    rng.random_range(-j..=j)
                } else {
                    0.0
                };
                let dy = if j > 0.0 {
                    rng.random_range(-j..=j)
                } else {
                    0.0
                };
                v[k] = Point2::new(cx + c * lx - s * ly + dx, cy + s * lx + c * ly + dy);
            }
            if let Ok(q) = Quad::new(v) {
                if q.is_convex() {
                    return q;
                }
            }
        }
    }
}

pub fn record_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The quad's bounding box grown by `margin` times its extent on every side.
pub fn margin_box(q: &Quad, margin: f64) -> Rect {
    let b = q.bounding_rect();
    b.inflate(margin * b.width(), margin * b.height())
}

/// Crops `rect` so that on each truncated side it covers only `1 - t` of the
/// quad's extent (measured from the opposite side of the quad).
pub fn truncate_box(rect: Rect, q: &Quad, t: &Truncation) -> Rect {
    let qb = q.bounding_rect();
    let (w, h) = (qb.width(), qb.height());
    let mut r = rect;
    if t.left > 0.0 {
        r.x0 = r.x0.max(qb.x1 - (1.0 - t.left) * w);
    }
    if t.right > 0.0 {
        r.x1 = r.x1.min(qb.x0 + (1.0 - t.right) * w);
    }
    if t.top > 0.0 {
        r.y0 = r.y0.max(qb.y1 - (1.0 - t.top) * h);
    }
    if t.bottom > 0.0 {
        r.y1 = r.y1.min(qb.y0 + (1.0 - t.bottom) * h);
    }
    r
}

/// Gaussian, then uniform, then salt; clamps into `[0, 1]` at the end.
pub fn apply_noise<R: Rng + ?Sized>(
    mask: &SoftMask,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<SoftMask> {
    let mut scores = mask.scores().to_vec();
    if spec.gaussian_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.gaussian_sigma)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for s in &mut scores {
            *s += normal.sample(rng);
        }
    }
    let amp = spec.additive_uniform_amplitude;
    if amp > 0.0 {
        for s in &mut scores {
            *s += rng.random_range(-amp..=amp);
        }
    }
    if spec.salt_fraction > 0.0 {
        for s in &mut scores {
            if rng.random::<f64>() < spec.salt_fraction {
                *s = rng.random::<f64>();
            }
        }
    }
    SoftMask::from_raw_clamped(mask.width(), mask.height(), scores, mask.rect())
}

/// A generated record before it touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub quad: Quad,
    /// Box the mask spans after truncation.
    pub rect: Rect,
    pub mask: SoftMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthOptions {
    pub width: usize,
    pub height: usize,
    /// Box margin around the quad, as a fraction of its extent per side.
    pub margin: f64,
    pub sampler: QuadSampler,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            width: 56,
            height: 56,
            margin: 0.15,
            sampler: QuadSampler::default(),
        }
    }
}

/// Quad, truncated box, rasterized label, then noise; all drawn from the
/// record's own stream.
pub fn synth_sample(index: u64, opts: &SynthOptions, noise: &NoiseSpec) -> Result<SyntheticSample> {
    noise.validate()?;
    let mut rng = record_rng(noise.seed, index);
    let quad = opts.sampler.sample(&mut rng);
    let rect = truncate_box(margin_box(&quad, opts.margin), &quad, &noise.truncation);
    let clean = rasterize_label(&quad, opts.width, opts.height, rect)?;
    let mask = apply_noise(&clean, noise, &mut rng)?;
    Ok(SyntheticSample { quad, rect, mask })
}
