//! Chessboard-marker registration of the NIR channel onto the VIS grid and
//! weighted fusion.

pub mod chessboard;
pub mod fusion;
pub mod homography;
pub mod warp;

pub use chessboard::detect_chessboard;
pub use fusion::{fuse_weighted, plant_mask, WeightMap};
pub use homography::{
    estimate_homography, reprojection_rms, CorrespondenceSet, Homography, HomographyFit, Point,
};
pub use warp::{warp, warp_radiance, Warped};

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, PartialEq)]
pub struct Registration {
    pub nir_registered: GrayImage,
    /// Pixels of `nir_registered` that received NIR data.
    pub valid: Vec<bool>,
    /// Maps NIR pixel coordinates onto the VIS grid.
    pub h_est: Homography,
    /// Corner reprojection RMS of the fit, pixels.
    pub rms: f64,
    pub vis_corners: Vec<Point>,
    pub nir_corners: Vec<Point>,
}

impl Registration {
    /// RMS distance between `h_est` and `truth` applied to the NIR corners.
    pub fn rms_against(&self, truth: &Homography) -> f64 {
        let sum: f64 = self
            .nir_corners
            .iter()
            .map(|&p| {
                let (a, b) = (self.h_est.apply(p), truth.apply(p));
                (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
            })
            .sum();
        (sum / self.nir_corners.len() as f64).sqrt()
    }
}

/// Detects the marker in both channels, fits NIR→VIS and resamples NIR.
pub fn register_pair(
    vis: &GrayImage,
    nir: &GrayImage,
    (inner_cols, inner_rows): (usize, usize),
) -> Result<Registration> {
    vis.check_same_size(nir)?;
    let wrap = |channel: &'static str| {
        move |e: Error| Error::Registration {
            channel,
            source: Box::new(e),
        }
    };
    let vis_corners = detect_chessboard(vis, inner_cols, inner_rows).map_err(wrap("VIS"))?;
    let nir_corners = detect_chessboard(nir, inner_cols, inner_rows).map_err(wrap("NIR"))?;
    let corr = CorrespondenceSet::from_points(&nir_corners, &vis_corners).map_err(wrap("fit"))?;
    let fit = estimate_homography(&corr).map_err(wrap("fit"))?;
    let warped = warp(nir, &fit.homography)?;
    Ok(Registration {
        nir_registered: warped.image,
        valid: warped.valid,
        h_est: fit.homography,
        rms: fit.rms,
        vis_corners,
        nir_corners,
    })
}
