//! Subject-level facial attributes from many per-image predictions.
//!
//! Facial attribute classifiers run on single images, but a subject (or a
//! video) usually has many. This crate
//!
//! - measures how inconsistent the per-image decisions are ([`inconsistency`]),
//! - scores face image quality without a reference ([`quality`]),
//! - turns each subject's images into one attribute vector by confidence or
//!   quality selection with optional top-k majority fusion ([`consolidate`]),
//! - audits and corrects inconsistent annotation labels, and
//! - simulates noisy classifiers to compare strategies ([`synth`]).
//!
//! ```
//! use attrcons::inconsistency::im_from_counts;
//!
//! let split = im_from_counts(2, 2).unwrap();
//! assert_eq!(split.im, 100.0);
//! let unanimous = im_from_counts(5, 0).unwrap();
//! assert_eq!(unanimous.im, 0.0);
//! ```

pub mod cli;
pub mod consolidate;
pub mod error;
pub mod inconsistency;
pub mod model;
pub mod quality;
pub mod synth;

pub use error::{Error, Result};
