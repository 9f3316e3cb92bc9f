//! Automatic seam inspection for color-coded sewn seams.
//!
//! Pipeline: grayscale -> Gaussian smoothing -> Otsu binarization ->
//! Hough line/circle path recognition -> HSV thread-color sampling along
//! each path -> stitch-rule validation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binarization;
pub mod cli;
pub mod error;
pub mod hough;
pub mod imagekit;
pub mod seamcheck;
pub mod synthgen;

pub use error::{Error, Result};
