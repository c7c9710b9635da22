//! Dataset-side tooling for long-tailed object detection.
//!
//! The crate covers the full pipeline around a detector without touching
//! any network: YOLO label parsing and manifest validation, class
//! distribution analysis, seeded epoch plans (baseline shuffle, repeat
//! factor sampling, class-aware sampling), hybrid real/synthetic dataset
//! construction, label-space mosaic/mixup, crop remapping, and the
//! evaluation metrics (per-class AP and mAP50-95, FID, Inception Score,
//! CLIP score) computed from files.

pub mod augment;
pub mod dataset;
pub mod error;
pub mod eval_det;
pub mod eval_gen;
pub mod geometry;
pub mod hybrid;
pub mod matrix_io;
pub mod rng;
pub mod sampling;
pub mod stats;

pub use dataset::{Annotation, DatasetManifest, ImageEntry, NormBox, Provenance};
pub use error::{Error, Result};
