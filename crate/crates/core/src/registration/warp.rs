use crate::error::{arg, Result};
use crate::image::{GrayImage, RadianceImage};
use crate::registration::homography::Homography;

const EDGE_EPS: f64 = 1e-9;

/// Bilinear sample at continuous pixel-centre coordinates; `None` outside
/// the sampled support `[0, w-1] x [0, h-1]`.
#[inline]
pub(crate) fn sample_bilinear(data: &[f64], w: usize, h: usize, x: f64, y: f64) -> Option<f64> {
    if !(x >= -EDGE_EPS
        && y >= -EDGE_EPS
        && x <= (w - 1) as f64 + EDGE_EPS
        && y <= (h - 1) as f64 + EDGE_EPS)
    {
        return None;
    }
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let top = if fx == 0.0 {
        data[y0 * w + x0]
    } else {
        data[y0 * w + x0] * (1.0 - fx) + data[y0 * w + x1] * fx
    };
    if fy == 0.0 {
        return Some(top);
    }
    let bottom = if fx == 0.0 {
        data[y1 * w + x0]
    } else {
        data[y1 * w + x0] * (1.0 - fx) + data[y1 * w + x1] * fx
    };
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Output of [`warp`]: the resampled image and which pixels had source data.
#[derive(Debug, Clone, PartialEq)]
pub struct Warped {
    pub image: GrayImage,
    pub valid: Vec<bool>,
}

impl Warped {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

fn warp_values(src: &[f64], w: usize, h: usize, hom: &Homography) -> Result<(Vec<f64>, Vec<bool>)> {
    let inv = match hom.inverse() {
        Ok(inv) => inv,
        Err(e) => return arg(format!("cannot warp by non-invertible map: {e}")),
    };
    let mut out = vec![0.0; w * h];
    let mut valid = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = inv.apply((x as f64, y as f64));
            if let Some(v) = sample_bilinear(src, w, h, sx, sy) {
                out[y * w + x] = v;
                valid[y * w + x] = true;
            }
        }
    }
    Ok((out, valid))
}

/// Moves image content by `hom`: `out(p) = img(hom⁻¹ p)`, bilinear,
/// zero outside the source.
pub fn warp(img: &GrayImage, hom: &Homography) -> Result<Warped> {
    let (w, h) = (img.width(), img.height());
    let (vals, valid) = warp_values(&img.to_f64(), w, h, hom)?;
    let data = vals
        .into_iter()
        .map(|v| (v + 0.5).floor().clamp(0.0, 255.0) as u8)
        .collect();
    Ok(Warped {
        image: GrayImage::from_vec(w, h, data)?,
        valid,
    })
}

pub fn warp_radiance(img: &RadianceImage, hom: &Homography) -> Result<RadianceImage> {
    let (w, h) = (img.width(), img.height());
    let (vals, _) = warp_values(img.as_slice(), w, h, hom)?;
    RadianceImage::from_vec(w, h, vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> GrayImage {
        GrayImage::from_fn(20, 15, |x, y| ((x * 13 + y * 7) % 256) as u8).unwrap()
    }

    #[test]
    fn identity_is_exact() {
        let img = ramp();
        let w = warp(&img, &Homography::identity()).unwrap();
        assert_eq!(w.image, img);
        assert!(w.valid.iter().all(|v| *v));
    }

    #[test]
    fn integer_translation_shifts() {
        let img = ramp();
        let w = warp(&img, &Homography::translation(3.0, -2.0)).unwrap();
        for y in 0..15 {
            for x in 0..20 {
                let valid = x >= 3 && y + 2 < 15;
                assert_eq!(w.valid[y * 20 + x], valid);
                if valid {
                    assert_eq!(w.image.get(x, y), img.get(x - 3, y + 2));
                } else {
                    assert_eq!(w.image.get(x, y), 0);
                }
            }
        }
    }

    #[test]
    fn half_pixel_shift_averages() {
        let img = GrayImage::from_vec(2, 1, vec![10, 20]).unwrap();
        let w = warp(&img, &Homography::translation(-0.5, 0.0)).unwrap();
        assert_eq!(w.image.get(0, 0), 15);
        assert!(!w.valid[1]);
    }
}
