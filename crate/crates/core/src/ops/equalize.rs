//! Global and tile-local histogram equalization, percentile contrast stretch.

use crate::error::{arg, Result};
use crate::image::GrayImage;
use crate::ops::histogram::histogram;

#[inline]
fn round_ratio(num: u64, den: u64) -> u8 {
    // round-half-up of num / den without floating point
    ((2 * num + den) / (2 * den)).min(255) as u8
}

/// Equalization lookup table for a histogram; `None` when only one level is
/// occupied.
fn equalization_lut(bins: &[u64; 256]) -> Option<[u8; 256]> {
    let total: u64 = bins.iter().sum();
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (c, b) in cdf.iter_mut().zip(bins) {
        acc += b;
        *c = acc;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0)?;
    if cdf_min == total {
        return None;
    }
    let den = total - cdf_min;
    let mut lut = [0u8; 256];
    for (l, &c) in lut.iter_mut().zip(cdf.iter()) {
        *l = round_ratio(255 * c.saturating_sub(cdf_min), den);
    }
    Some(lut)
}

fn identity_lut() -> [u8; 256] {
    std::array::from_fn(|i| i as u8)
}

pub fn equalize_global(img: &GrayImage) -> GrayImage {
    match equalization_lut(&histogram(img).bins) {
        Some(lut) => img.map_lut(&lut),
        None => img.clone(),
    }
}

/// Contrast-limited tile equalization with bilinear blending between tile
/// centres. A tile larger than the image falls back to [`equalize_global`].
pub fn equalize_local(img: &GrayImage, tile: usize, clip_limit: f64) -> Result<GrayImage> {
    if tile < 8 {
        return arg(format!("tile must be >= 8 pixels, got {tile}"));
    }
    if !(clip_limit > 0.0 && clip_limit <= 1.0) {
        return arg(format!("clip_limit must be in (0, 1], got {clip_limit}"));
    }
    let (w, h) = (img.width(), img.height());
    if tile > w || tile > h {
        return Ok(equalize_global(img));
    }
    let nx = w.div_ceil(tile);
    let ny = h.div_ceil(tile);

    let mut luts = Vec::with_capacity(nx * ny);
    for ty in 0..ny {
        for tx in 0..nx {
            let (x0, y0) = (tx * tile, ty * tile);
            let (x1, y1) = ((x0 + tile).min(w), (y0 + tile).min(h));
            let mut bins = [0u64; 256];
            for y in y0..y1 {
                for x in x0..x1 {
                    bins[img.get(x, y) as usize] += 1;
                }
            }
            let occupied = bins.iter().filter(|&&b| b > 0).count();
            let lut = if occupied <= 1 {
                identity_lut()
            } else {
                clip_histogram(&mut bins, clip_limit);
                equalization_lut(&bins).unwrap_or_else(identity_lut)
            };
            luts.push(lut);
        }
    }

    let centre = |i: usize, len: usize| -> f64 {
        let end = ((i + 1) * tile).min(len);
        (i * tile + end) as f64 / 2.0 - 0.5
    };
    // bracketing tile centres and blend weight along one axis
    let bracket = |p: usize, n: usize, len: usize| -> (usize, usize, f64) {
        let p = p as f64;
        if p <= centre(0, len) {
            return (0, 0, 0.0);
        }
        if p >= centre(n - 1, len) {
            return (n - 1, n - 1, 0.0);
        }
        let mut i = 0;
        while centre(i + 1, len) < p {
            i += 1;
        }
        let (c0, c1) = (centre(i, len), centre(i + 1, len));
        (i, i + 1, (p - c0) / (c1 - c0))
    };

    let mut out = GrayImage::new(w, h)?;
    for y in 0..h {
        let (ty0, ty1, fy) = bracket(y, ny, h);
        for x in 0..w {
            let (tx0, tx1, fx) = bracket(x, nx, w);
            let v = img.get(x, y) as usize;
            let at = |tx: usize, ty: usize| f64::from(luts[ty * nx + tx][v]);
            let blended = if nx * ny == 1 {
                at(0, 0)
            } else {
                let top = at(tx0, ty0) * (1.0 - fx) + at(tx1, ty0) * fx;
                let bottom = at(tx0, ty1) * (1.0 - fx) + at(tx1, ty1) * fx;
                top * (1.0 - fy) + bottom * fy
            };
            out.set(x, y, (blended + 0.5).floor().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}

/// Clips bins at `clip_limit * tile_area` and spreads the excess evenly.
fn clip_histogram(bins: &mut [u64; 256], clip_limit: f64) {
    let total: u64 = bins.iter().sum();
    let limit = ((clip_limit * total as f64).ceil() as u64).max(1);
    let mut excess = 0;
    for b in bins.iter_mut() {
        if *b > limit {
            excess += *b - limit;
            *b = limit;
        }
    }
    let share = excess / 256;
    let rest = (excess % 256) as usize;
    for (i, b) in bins.iter_mut().enumerate() {
        *b += share + u64::from(i < rest);
    }
}

/// Nearest-rank percentile, `p` in [0, 100].
pub fn percentile(img: &GrayImage, p: f64) -> u8 {
    let hist = histogram(img);
    let n = hist.total;
    let rank = ((p / 100.0 * n as f64).ceil() as u64).clamp(1, n);
    let mut acc = 0;
    for (v, &c) in hist.bins.iter().enumerate() {
        acc += c;
        if acc >= rank {
            return v as u8;
        }
    }
    255
}

/// Linear stretch sending the `p_low` percentile to 0 and `p_high` to 255.
pub fn contrast_stretch(img: &GrayImage, p_low: f64, p_high: f64) -> Result<GrayImage> {
    if !(0.0..=100.0).contains(&p_low) || !(0.0..=100.0).contains(&p_high) || p_low >= p_high {
        return arg(format!(
            "percentiles must satisfy 0 <= p_low < p_high <= 100, got {p_low}, {p_high}"
        ));
    }
    let lo = percentile(img, p_low);
    let hi = percentile(img, p_high);
    if lo >= hi {
        return Ok(img.clone());
    }
    let span = f64::from(hi - lo);
    let lut: [u8; 256] = std::array::from_fn(|v| {
        let s = (v as f64 - f64::from(lo)) * 255.0 / span;
        (s + 0.5).floor().clamp(0.0, 255.0) as u8
    });
    Ok(img.map_lut(&lut))
}
