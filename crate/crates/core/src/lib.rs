//! Dual-band (NIR + VIS) underwater imaging toolkit.
//!
//! Synthesizes image pairs from a scene and a water description, compares
//! the two channels through histograms and Canny edge overlays, registers
//! the NIR channel onto the VIS grid with a chessboard marker and fuses the
//! pair with per-pixel weights.

// Guards are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod image;
pub mod io;
pub mod ops;
pub mod optics;
pub mod pipeline;
pub mod registration;
pub mod render;
pub mod scene;

pub use error::{Error, Result};
pub use image::{GrayImage, RadianceImage, Rect};
