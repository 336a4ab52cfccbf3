//! Quadrilateral text-region geometry: soft pyramid labels, plane-clustering
//! recovery of quads from soft masks, a connected-component baseline decoder
//! and IoU-based evaluation.

pub mod baseline;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod plane_clustering;
pub mod pyramid_label;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{Plane, Point2, Point3, Quad, Rect};
pub use plane_clustering::{decode_pyramid, ClusteringConfig, DecodeResult, PyramidFit};
pub use pyramid_label::{rasterize_label, SoftMask};
