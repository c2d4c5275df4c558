//! Weighted NIR-into-VIS fusion and the plant-signature weight map.

use crate::error::{arg, Result};
use crate::image::GrayImage;

/// Per-pixel fusion weights in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl WeightMap {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != width * height {
            return arg(format!(
                "{} weights do not match {width}x{height}",
                weights.len()
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(-1.0..=1.0).contains(*w)) {
            return arg(format!("weight {w} outside [-1, 1]"));
        }
        Ok(WeightMap {
            width,
            height,
            weights,
        })
    }

    pub fn constant(width: usize, height: usize, w: f64) -> Result<Self> {
        Self::new(width, height, vec![w; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Decodes a weight image: 0 -> -1, 128 -> 0, 255 -> +1, linear on each side.
    pub fn from_gray(img: &GrayImage) -> Self {
        let weights = img
            .as_slice()
            .iter()
            .map(|&v| {
                let d = f64::from(v) - 128.0;
                if d < 0.0 {
                    d / 128.0
                } else {
                    d / 127.0
                }
            })
            .collect();
        WeightMap {
            width: img.width(),
            height: img.height(),
            weights,
        }
    }

    pub fn to_gray(&self) -> GrayImage {
        let data = self
            .weights
            .iter()
            .map(|&w| {
                let v = if w < 0.0 {
                    128.0 + 128.0 * w
                } else {
                    128.0 + 127.0 * w
                };
                (v + 0.5).floor().clamp(0.0, 255.0) as u8
            })
            .collect();
        GrayImage::from_vec(self.width, self.height, data).expect("dimensions preserved")
    }

    /// Pixels with a nonzero weight.
    pub fn support(&self) -> Vec<bool> {
        self.weights.iter().map(|&w| w != 0.0).collect()
    }
}

/// `F = clamp(round(V + w N), 0, 255)`, rounding half-up.
pub fn fuse_weighted(vis: &GrayImage, nir_reg: &GrayImage, w: &WeightMap) -> Result<GrayImage> {
    vis.check_same_size(nir_reg)?;
    if w.width != vis.width() || w.height != vis.height() {
        return arg(format!(
            "weight map {}x{} does not match images {}x{}",
            w.width,
            w.height,
            vis.width(),
            vis.height()
        ));
    }
    let data = vis
        .as_slice()
        .iter()
        .zip(nir_reg.as_slice())
        .zip(&w.weights)
        .map(|((&v, &n), &wt)| {
            let f = f64::from(v) + wt * f64::from(n);
            (f + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::from_vec(vis.width(), vis.height(), data)
}

/// Marks NIR-bright/VIS-dark pixels (`N - V > delta`) with weight `-alpha`,
/// after a 3x3 majority vote on the raw mask.
pub fn plant_mask(
    nir_reg: &GrayImage,
    vis: &GrayImage,
    delta: f64,
    alpha: f64,
) -> Result<WeightMap> {
    vis.check_same_size(nir_reg)?;
    if !(delta > 0.0) {
        return arg(format!("delta must be > 0, got {delta}"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return arg(format!("alpha must be in [0, 1], got {alpha}"));
    }
    let (w, h) = (vis.width(), vis.height());
    let raw: Vec<bool> = nir_reg
        .as_slice()
        .iter()
        .zip(vis.as_slice())
        .map(|(&n, &v)| f64::from(n) - f64::from(v) > delta)
        .collect();
    let smoothed = majority3(&raw, w, h);
    let weights = smoothed
        .into_iter()
        .map(|m| if m { -alpha } else { 0.0 })
        .collect();
    WeightMap::new(w, h, weights)
}

/// 3x3 majority filter; at borders, a strict majority of the in-bounds pixels.
fn majority3(mask: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut on, mut n) = (0, 0);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    n += 1;
                    on += usize::from(mask[ny * w + nx]);
                }
            }
            out[y * w + x] = 2 * on > n;
        }
    }
    out
}
