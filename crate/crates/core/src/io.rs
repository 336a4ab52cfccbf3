//! On-disk formats.
//!
//! * Masks: binary 16-bit PGM (`P5`, maxval 65535, big-endian samples) with
//!   cell value `round(score * 65535)`, plus a JSON sidecar next to it
//!   (`<stem>.json`) carrying the grid size and the box the grid spans.
//! * Regions: JSON Lines, one object per region:
//!   `{"id", "quad": [x1, y1, ..., x4, y4], "confidence"?, "ignore"?}`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Quad, Rect};
use crate::pyramid_label::{quantize_score, SoftMask};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{context}: {source}")]
    Invalid {
        context: String,
        #[source]
        source: crate::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Encodes `mask` as a 16-bit binary PGM.
pub fn encode_pgm16(mask: &SoftMask) -> Vec<u8> {
    let header = format!("P5\n{} {}\n65535\n", mask.width(), mask.height());
    let mut out = Vec::with_capacity(header.len() + 2 * mask.scores().len());
    out.extend_from_slice(header.as_bytes());
    for &s in mask.scores() {
        out.extend_from_slice(&quantize_score(s).to_be_bytes());
    }
    out
}

/// Raw PGM raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl Pgm {
    /// Samples scaled into `[0, 1]`.
    pub fn scores(&self) -> Vec<f64> {
        let max = f64::from(self.maxval);
        self.samples.iter().map(|&v| f64::from(v) / max).collect()
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&[u8], FormatError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|c| !c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(FormatError::Pgm("truncated header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize, FormatError> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| FormatError::Pgm(format!("bad {what}")))
    }
}

/// Decodes a binary PGM with 8- or 16-bit samples.
pub fn decode_pgm(bytes: &[u8]) -> Result<Pgm, FormatError> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    if cur.token()? != b"P5" {
        return Err(FormatError::Pgm("expected magic P5".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(FormatError::Pgm("zero dimension".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(FormatError::Pgm(format!("maxval {maxval} out of range")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(FormatError::Pgm("missing raster separator".into())),
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| FormatError::Pgm("dimensions overflow".into()))?;
    let raster = &bytes[cur.pos..];
    let samples: Vec<u16> = if maxval < 256 {
        if raster.len() != n {
            return Err(FormatError::Pgm(format!(
                "expected {n} bytes of raster, got {}",
                raster.len()
            )));
        }
        raster.iter().map(|&b| u16::from(b)).collect()
    } else {
        if raster.len() != 2 * n {
            return Err(FormatError::Pgm(format!(
                "expected {} bytes of raster, got {}",
                2 * n,
                raster.len()
            )));
        }
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    if let Some(v) = samples.iter().find(|&&v| usize::from(v) > maxval) {
        return Err(FormatError::Pgm(format!(
            "sample {v} exceeds maxval {maxval}"
        )));
    }
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}

/// Grid metadata stored next to each PGM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskMeta {
    pub width: usize,
    pub height: usize,
    #[serde(rename = "box")]
    pub rect: [f64; 4],
}

impl MaskMeta {
    pub fn of(mask: &SoftMask) -> Self {
        let r = mask.rect();
        Self {
            width: mask.width(),
            height: mask.height(),
            rect: [r.x0, r.y0, r.x1, r.y1],
        }
    }
}

pub fn rect_from_array(a: [f64; 4]) -> crate::Result<Rect> {
    Rect::new(a[0], a[1], a[2], a[3])
}

pub fn sidecar_path(mask_path: &Path) -> PathBuf {
    mask_path.with_extension("json")
}

fn to_json_pretty<T: Serialize>(value: &T, context: &str) -> Result<Vec<u8>, FormatError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| FormatError::Json {
        context: context.to_string(),
        source,
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the PGM and its sidecar.
pub fn save_mask(path: &Path, mask: &SoftMask) -> Result<(), FormatError> {
    fs::write(path, encode_pgm16(mask)).map_err(io_err(path))?;
    let side = sidecar_path(path);
    let meta = to_json_pretty(&MaskMeta::of(mask), "mask sidecar")?;
    fs::write(&side, meta).map_err(io_err(&side))
}

/// Reads a PGM and its sidecar. Scores are clamped into `[0, 1]`.
pub fn load_mask(path: &Path) -> Result<SoftMask, FormatError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let pgm = decode_pgm(&bytes)?;
    let side = sidecar_path(path);
    let meta_bytes = fs::read(&side).map_err(io_err(&side))?;
    let meta: MaskMeta =
        serde_json::from_slice(&meta_bytes).map_err(|source| FormatError::Json {
            context: side.display().to_string(),
            source,
        })?;
    if (meta.width, meta.height) != (pgm.width, pgm.height) {
        return Err(FormatError::Pgm(format!(
            "sidecar says {}x{}, raster is {}x{}",
            meta.width, meta.height, pgm.width, pgm.height
        )));
    }
    let invalid = |source| FormatError::Invalid {
        context: path.display().to_string(),
        source,
    };
    let rect = rect_from_array(meta.rect).map_err(invalid)?;
    SoftMask::from_raw_clamped(pgm.width, pgm.height, pgm.scores(), rect).map_err(invalid)
}

/// One JSON Lines region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub id: String,
    pub quad: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ignore: Option<bool>,
}

impl RegionRecord {
    pub fn to_quad(&self) -> crate::Result<Quad> {
        Quad::from_flat(&self.quad)
    }
}

pub fn parse_regions<R: Read>(reader: R, context: &str) -> Result<Vec<RegionRecord>, FormatError> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(io_err(Path::new(context)))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RegionRecord =
            serde_json::from_str(&line).map_err(|source| FormatError::Json {
                context: format!("{context}:{}", n + 1),
                source,
            })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_regions(path: &Path) -> Result<Vec<RegionRecord>, FormatError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    parse_regions(file, &path.display().to_string())
}

pub fn write_regions<W: Write>(mut w: W, records: &[RegionRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let bytes = to_json_pretty(value, &path.display().to_string())?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_json_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FormatError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(|source| FormatError::Json {
        context: path.display().to_string(),
        source,
    })
}
