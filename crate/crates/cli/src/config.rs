//! The `--config` file: one JSON document whose sections mirror the library
//! configs. Missing sections and fields take their defaults; command-line
//! flags override file values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pyramask::baseline::BaselineConfig;
use pyramask::synth::{NoiseSpec, SynthOptions};
use pyramask::ClusteringConfig;

use crate::{Failure, NoiseArgs};

/// Baseline binarization threshold for `bench` when neither the file nor a
/// flag sets one.
pub const BENCH_BASELINE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub clustering: ClusteringConfig,
    pub baseline: Option<BaselineConfig>,
    pub noise: NoiseSpec,
    pub synth: SynthOptions,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let cfg: Config = match path {
            Some(p) => pyramask::io::read_json_file(p)?,
            None => Config::default(),
        };
        cfg.clustering.validate()?;
        if let Some(b) = &cfg.baseline {
            b.validate()?;
        }
        cfg.noise.validate()?;
        Ok(cfg)
    }

    /// The baseline config with `threshold` (flag) over the file value over
    /// `fallback`.
    pub fn baseline_with(
        &self,
        threshold: Option<f64>,
        fallback: f64,
    ) -> Result<BaselineConfig, Failure> {
        let mut b = self.baseline.unwrap_or(BaselineConfig {
            threshold: fallback,
            ..BaselineConfig::default()
        });
        if let Some(t) = threshold {
            b.threshold = t;
        }
        b.validate()?;
        Ok(b)
    }
}

impl NoiseArgs {
    pub fn apply(&self, spec: &mut NoiseSpec) {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut spec.additive_uniform_amplitude, self.uniform);
        set(&mut spec.gaussian_sigma, self.gaussian);
        set(&mut spec.salt_fraction, self.salt);
        set(&mut spec.truncation.left, self.truncate_left);
        set(&mut spec.truncation.top, self.truncate_top);
        set(&mut spec.truncation.right, self.truncate_right);
        set(&mut spec.truncation.bottom, self.truncate_bottom);
    }
}
