//! Synthetic corpora on disk: `manifest.json`, `ground_truth.jsonl` and one
//! PGM + sidecar per record under `masks/`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pyramask::io::{save_mask, sidecar_path, write_json_file, write_regions, RegionRecord};
use pyramask::synth::{synth_sample, NoiseSpec, SynthOptions};
use pyramask::Quad;

use crate::config::Config;
use crate::{CmdResult, Failure, SynthArgs};

pub const MANIFEST: &str = "manifest.json";
pub const GROUND_TRUTH: &str = "ground_truth.jsonl";
pub const MASK_DIR: &str = "masks";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub quad: Vec<f64>,
    /// Mask path relative to the corpus directory.
    pub mask: String,
    #[serde(rename = "box")]
    pub rect: [f64; 4],
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub options: SynthOptions,
    pub noise: NoiseSpec,
    pub records: Vec<CorpusRecord>,
}

pub fn record_id(index: usize) -> String {
    format!("r{index:05}")
}

pub fn synth(args: &SynthArgs, cfg: &Config) -> CmdResult {
    if args.count == 0 {
        return Err(Failure::usage("--count must be at least 1"));
    }
    let mut noise = cfg.noise;
    args.noise.apply(&mut noise);
    if let Some(seed) = args.seed {
        noise.seed = seed;
    }
    noise.validate()?;
    let mut opts = cfg.synth;
    if let Some(w) = args.width {
        opts.width = w;
    }
    if let Some(h) = args.height {
        opts.height = h;
    }
    if let Some(m) = args.margin {
        opts.margin = m;
    }
    if opts.width == 0 || opts.height == 0 || !(opts.margin >= 0.0 && opts.margin.is_finite()) {
        return Err(Failure::usage(
            "mask dimensions must be positive and the margin non-negative",
        ));
    }
    let manifest = write_corpus(&args.out, args.count, &opts, &noise)?;
    log::info!(
        "wrote {} records to {}",
        manifest.records.len(),
        args.out.display()
    );
    Ok(())
}

/// Generates and writes `count` records. Output depends only on the
/// arguments, not on the thread pool.
pub fn write_corpus(
    dir: &Path,
    count: usize,
    opts: &SynthOptions,
    noise: &NoiseSpec,
) -> Result<Manifest, Failure> {
    let mask_dir = dir.join(MASK_DIR);
    fs::create_dir_all(&mask_dir)
        .map_err(|e| Failure::usage(format!("{}: {e}", mask_dir.display())))?;
    let records = (0..count)
        .into_par_iter()
        .map(|i| {
            let sample = synth_sample(i as u64, opts, noise)?;
            let id = record_id(i);
            let rel = format!("{MASK_DIR}/{id}.pgm");
            save_mask(&dir.join(&rel), &sample.mask)?;
            let r = sample.rect;
            Ok(CorpusRecord {
                id,
                quad: sample.quad.to_flat().to_vec(),
                mask: rel,
                rect: [r.x0, r.y0, r.x1, r.y1],
                noise: *noise,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let gt: Vec<RegionRecord> = records
        .iter()
        .map(|r| RegionRecord {
            id: r.id.clone(),
            quad: r.quad.clone(),
            confidence: None,
            ignore: None,
        })
        .collect();
    let mut buf = Vec::new();
    write_regions(&mut buf, &gt)?;
    let gt_path = dir.join(GROUND_TRUTH);
    fs::write(&gt_path, buf).map_err(|e| Failure::usage(format!("{}: {e}", gt_path.display())))?;
    let manifest = Manifest {
        seed: noise.seed,
        options: *opts,
        noise: *noise,
        records,
    };
    write_json_file(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, Failure> {
    Ok(pyramask::io::read_json_file(&dir.join(MANIFEST))?)
}

impl CorpusRecord {
    pub fn mask_path(&self, dir: &Path) -> PathBuf {
        dir.join(&self.mask)
    }

    pub fn ground_truth(&self) -> pyramask::Result<Quad> {
        Quad::from_flat(&self.quad)
    }

    /// Checks that the record's files exist and its quad is valid, without
    /// parsing the mask.
    pub fn check(&self, dir: &Path) -> Result<(), String> {
        let path = self.mask_path(dir);
        for p in [path.clone(), sidecar_path(&path)] {
            if !p.is_file() {
                return Err(format!("missing file {}", p.display()));
            }
        }
        self.ground_truth()
            .map(|_| ())
            .map_err(|e| format!("ground truth: {e}"))
    }
}

/// Rejects duplicate record ids; runs [`CorpusRecord::check`] on every record.
pub fn check_integrity(dir: &Path, m: &Manifest) -> Result<Vec<Result<(), String>>, Failure> {
    let mut ids: Vec<&str> = m.records.iter().map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Failure::usage(format!("duplicate record id {}", w[0])));
    }
    Ok(m.records.iter().map(|r| r.check(dir)).collect())
}
