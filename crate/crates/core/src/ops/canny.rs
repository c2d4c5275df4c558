//! Canny edge detection: Gaussian smoothing, 3x3 Sobel gradients,
//! four-direction non-maximum suppression and 8-connected hysteresis.

use crate::error::{arg, Result};
use crate::image::GrayImage;

/// Binary edge mask with the source image's dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl EdgeMap {
    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return arg(format!(
                "mask of {} does not match {width}x{height}",
                mask.len()
            ));
        }
        Ok(EdgeMap {
            width,
            height,
            mask,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Edges as a gray image: edge pixels 255, background 0.
    pub fn to_gray(&self) -> GrayImage {
        let data = self.mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
        GrayImage::from_vec(self.width, self.height, data).expect("dimensions preserved")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    pub t_low: f64,
    pub t_high: f64,
}

impl CannyParams {
    pub fn check(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return arg(format!("sigma must be >= 0, got {}", self.sigma));
        }
        if !(self.t_low > 0.0 && self.t_low < self.t_high) {
            return arg(format!(
                "thresholds must satisfy 0 < t_low < t_high, got {} and {}",
                self.t_low, self.t_high
            ));
        }
        Ok(())
    }
}

/// Normalized 1-D Gaussian of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

#[inline]
fn clamp_index(i: i64, len: usize) -> usize {
    i.clamp(0, len as i64 - 1) as usize
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_smooth(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let src = img.to_f64();
    let k = gaussian_kernel(sigma);
    if k.len() == 1 {
        return src;
    }
    let r = (k.len() / 2) as i64;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * src[y * w + clamp_index(x as i64 + i as i64 - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * tmp[clamp_index(y as i64 + i as i64 - r, h) * w + x])
                .sum();
        }
    }
    out
}

/// Sobel derivatives `(gx, gy)` with replicated borders; `gy` points down.
pub fn sobel(data: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let at = |x: i64, y: i64| data[clamp_index(y, h) * w + clamp_index(x, w)];
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        }
    }
    (gx, gy)
}

/// Neighbour offset along the quantized gradient direction.
#[inline]
pub(crate) fn direction_offset(gx: f64, gy: f64) -> (i64, i64) {
    let mut angle = gy.atan2(gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        (1, 0)
    } else if angle < 67.5 {
        (1, 1)
    } else if angle < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}

/// Gradient magnitude after non-maximum suppression (suppressed pixels are 0).
///
/// A pixel survives if it is strictly greater than its forward neighbour and
/// not smaller than its backward one, so plateaus thin to a single pixel.
pub fn non_maximum_suppression(gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mag: Vec<f64> = gx.iter().zip(gy).map(|(a, b)| a.hypot(*b)).collect();
    let at = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let (dx, dy) = direction_offset(gx[i], gy[i]);
            if m > at(x + dx, y + dy) && m >= at(x - dx, y - dy) {
                out[i] = m;
            }
        }
    }
    out
}

/// Keeps weak pixels (>= `t_low`) 8-connected to a strong one (>= `t_high`).
pub fn hysteresis(nms: &[f64], w: usize, h: usize, t_low: f64, t_high: f64) -> Vec<bool> {
    let mut edges = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    for (i, &m) in nms.iter().enumerate() {
        if m >= t_high && !edges[i] {
            edges[i] = true;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (x, y) = ((j % w) as i64, (j / w) as i64);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let k = ny as usize * w + nx as usize;
                        if !edges[k] && nms[k] >= t_low {
                            edges[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
        }
    }
    edges
}

pub fn canny(img: &GrayImage, params: CannyParams) -> Result<EdgeMap> {
    params.check()?;
    let (w, h) = (img.width(), img.height());
    let smooth = gaussian_smooth(img, params.sigma);
    let (gx, gy) = sobel(&smooth, w, h);
    let nms = non_maximum_suppression(&gx, &gy, w, h);
    let mask = hysteresis(&nms, w, h, params.t_low, params.t_high);
    EdgeMap::from_mask(w, h, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(sigma: f64, lo: f64, hi: f64) -> CannyParams {
        CannyParams {
            sigma,
            t_low: lo,
            t_high: hi,
        }
    }

    #[test]
    fn constant_has_no_edges() {
        let img = GrayImage::filled(16, 16, 130).unwrap();
        assert_eq!(canny(&img, p(1.0, 10.0, 30.0)).unwrap().count(), 0);
    }

    #[test]
    fn vertical_step_gives_single_line() {
        let img = GrayImage::from_fn(16, 16, |x, _| if x < 8 { 0 } else { 255 }).unwrap();
        let e = canny(&img, p(0.8, 50.0, 150.0)).unwrap();
        for y in 0..16 {
            let cols: Vec<usize> = (0..16).filter(|&x| e.get(x, y)).collect();
            assert_eq!(cols.len(), 1, "row {y}: {cols:?}");
            assert!((cols[0] as f64 - 7.5).abs() <= 1.0);
        }
    }

    #[test]
    fn thresholds_validated() {
        let img = GrayImage::filled(4, 4, 0).unwrap();
        assert!(canny(&img, p(1.0, 30.0, 30.0)).is_err());
        assert!(canny(&img, p(1.0, 0.0, 30.0)).is_err());
        assert!(canny(&img, p(-1.0, 10.0, 30.0)).is_err());
    }

    #[test]
    fn kernel_normalized() {
        for s in [0.5, 1.0, 2.3] {
            let k = gaussian_kernel(s);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(k.len() % 2, 1);
        }
        assert_eq!(gaussian_kernel(0.0), vec![1.0]);
    }

    #[test]
    fn hysteresis_links_weak_to_strong() {
        // strong at (1,1), weak chain (2,1),(3,2); isolated weak at (6,6)
        let (w, h) = (8, 8);
        let mut nms = vec![0.0; w * h];
        nms[w + 1] = 100.0;
        nms[w + 2] = 20.0;
        nms[2 * w + 3] = 20.0;
        nms[6 * w + 6] = 20.0;
        let e = hysteresis(&nms, w, h, 10.0, 50.0);
        assert!(e[w + 1] && e[w + 2] && e[2 * w + 3]);
        assert!(!e[6 * w + 6]);
    }
}
