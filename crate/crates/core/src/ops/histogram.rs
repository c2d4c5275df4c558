use serde::Serialize;

use crate::error::Result;
use crate::image::{GrayImage, Rect};

/// 256-bin intensity histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub bins: [u64; 256],
    pub total: u64,
}

impl Histogram {
    pub fn cdf(&self) -> [u64; 256] {
        let mut cdf = [0u64; 256];
        let mut acc = 0;
        for (c, b) in cdf.iter_mut().zip(self.bins.iter()) {
            acc += b;
            *c = acc;
        }
        cdf
    }

    /// Population statistics implied by the histogram.
    pub fn stats(&self) -> Option<RegionStats> {
        if self.total == 0 {
            return None;
        }
        let n = self.total as f64;
        let mean = self
            .bins
            .iter()
            .enumerate()
            .map(|(v, &c)| v as f64 * c as f64)
            .sum::<f64>()
            / n;
        let var = self
            .bins
            .iter()
            .enumerate()
            .map(|(v, &c)| c as f64 * (v as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        let min = self.bins.iter().position(|&c| c > 0)? as u8;
        let max = 255 - self.bins.iter().rev().position(|&c| c > 0)? as u8;
        Some(RegionStats {
            mean,
            std: var.sqrt(),
            min,
            max,
        })
    }
}

pub fn histogram(img: &GrayImage) -> Histogram {
    let mut bins = [0u64; 256];
    for &v in img.as_slice() {
        bins[v as usize] += 1;
    }
    Histogram {
        bins,
        total: img.len() as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionStats {
    pub mean: f64,
    pub std: f64,
    pub min: u8,
    pub max: u8,
}

impl RegionStats {
    /// Coefficient of variation, `std / mean` (0 for an all-black region).
    pub fn relative_contrast(&self) -> f64 {
        if self.mean > 0.0 {
            self.std / self.mean
        } else {
            0.0
        }
    }
}

pub fn region_stats(img: &GrayImage, rect: Rect) -> Result<RegionStats> {
    rect.check(img.width(), img.height())?;
    let n = rect.area() as f64;
    let pixels = || {
        (rect.y..rect.y + rect.h)
            .flat_map(move |y| (rect.x..rect.x + rect.w).map(move |x| img.get(x, y)))
    };
    let mean = pixels().map(f64::from).sum::<f64>() / n;
    let var = pixels().map(|v| (f64::from(v) - mean).powi(2)).sum::<f64>() / n;
    Ok(RegionStats {
        mean,
        std: var.sqrt(),
        min: pixels().min().unwrap_or(0),
        max: pixels().max().unwrap_or(0),
    })
}

/// Statistics over the pixels selected by `mask`; `None` if none are.
pub fn masked_stats(img: &GrayImage, mask: &[bool]) -> Option<RegionStats> {
    let mut bins = [0u64; 256];
    let mut total = 0;
    for (&v, _) in img.as_slice().iter().zip(mask).filter(|(_, m)| **m) {
        bins[v as usize] += 1;
        total += 1;
    }
    Histogram { bins, total }.stats()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_values() {
        let img = GrayImage::from_vec(2, 2, vec![0, 0, 255, 128]).unwrap();
        let h = histogram(&img);
        assert_eq!(h.bins[0], 2);
        assert_eq!(h.bins[128], 1);
        assert_eq!(h.bins[255], 1);
        assert_eq!(h.bins.iter().sum::<u64>(), 4);
        assert_eq!(h.total, 4);

        let c = GrayImage::filled(5, 3, 7).unwrap();
        assert_eq!(histogram(&c).bins[7], 15);
    }

    #[test]
    fn stats_examples() {
        let c = GrayImage::filled(4, 4, 9).unwrap();
        let s = region_stats(&c, Rect::new(1, 1, 2, 2)).unwrap();
        assert_eq!((s.mean, s.std, s.min, s.max), (9.0, 0.0, 9, 9));

        let two = GrayImage::from_vec(2, 1, vec![0, 255]).unwrap();
        let s = region_stats(&two, Rect::full(2, 1)).unwrap();
        assert_eq!(s.mean, 127.5);
        assert_eq!(s.std, 127.5);
    }

    #[test]
    fn bad_regions_rejected() {
        let img = GrayImage::new(4, 4).unwrap();
        assert!(region_stats(&img, Rect::new(0, 0, 0, 2)).is_err());
        assert!(region_stats(&img, Rect::new(2, 2, 3, 1)).is_err());
    }

    #[test]
    fn full_image_stats_match_histogram() {
        let img = GrayImage::from_fn(13, 9, |x, y| ((x * 31 + y * y * 17) % 256) as u8).unwrap();
        let a = region_stats(&img, Rect::full(13, 9)).unwrap();
        let b = histogram(&img).stats().unwrap();
        assert!((a.mean - b.mean).abs() < 1e-9);
        assert!((a.std - b.std).abs() < 1e-9);
        assert_eq!((a.min, a.max), (b.min, b.max));
    }
}
