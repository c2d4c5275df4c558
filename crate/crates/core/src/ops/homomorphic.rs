//! Homomorphic illumination/reflectance separation with a high-emphasis
//! Gaussian transfer in the log domain.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{arg, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomomorphicParams {
    /// Cycles per image.
    pub cutoff: f64,
    pub gamma_low: f64,
    pub gamma_high: f64,
}

impl HomomorphicParams {
    fn check(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return arg(format!("cutoff must be > 0, got {}", self.cutoff));
        }
        if !(self.gamma_low > 0.0 && self.gamma_low <= 1.0 && self.gamma_high >= 1.0)
            || !self.gamma_high.is_finite()
        {
            return arg(format!(
                "need 0 < gamma_low <= 1 <= gamma_high, got {} and {}",
                self.gamma_low, self.gamma_high
            ));
        }
        Ok(())
    }

    /// Transfer at radial frequency `f` (cycles per image).
    pub fn transfer(&self, f: f64) -> f64 {
        let Self {
            cutoff,
            gamma_low,
            gamma_high,
        } = *self;
        gamma_low + (gamma_high - gamma_low) * (1.0 - (-f * f / (2.0 * cutoff * cutoff)).exp())
    }
}

/// Signed frequency index for bin `k` of an `n`-point DFT.
#[inline]
pub(crate) fn signed_bin(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Mirror index into `[0, len)` for a sequence extended to `2 len`.
#[inline]
pub(crate) fn mirror(i: usize, len: usize) -> usize {
    if i < len {
        i
    } else {
        2 * len - 1 - i
    }
}

/// Filtered `ln(1 + I)` field, before exponentiation and renormalization.
///
/// The image is mirror-extended to twice its size, so bin `k` of the padded
/// transform sits at `k / 2` cycles per original image.
pub fn homomorphic_log_response(img: &GrayImage, params: HomomorphicParams) -> Result<Vec<f64>> {
    params.check()?;
    let (w, h) = (img.width(), img.height());
    let (pw, ph) = (2 * w, 2 * h);
    let mut buf: Vec<Complex<f64>> = (0..ph)
        .flat_map(|y| {
            (0..pw).map(move |x| {
                let v = img.get(mirror(x, w), mirror(y, h));
                Complex::new(f64::from(v).ln_1p(), 0.0)
            })
        })
        .collect();

    let mut planner = FftPlanner::new();
    let row_fwd = planner.plan_fft_forward(pw);
    let col_fwd = planner.plan_fft_forward(ph);
    let row_inv = planner.plan_fft_inverse(pw);
    let col_inv = planner.plan_fft_inverse(ph);

    for row in buf.chunks_mut(pw) {
        row_fwd.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); ph];
    transform_columns(&mut buf, pw, ph, &mut col, |c| col_fwd.process(c));

    for ky in 0..ph {
        let fy = signed_bin(ky, ph) / 2.0;
        for kx in 0..pw {
            let fx = signed_bin(kx, pw) / 2.0;
            buf[ky * pw + kx] *= params.transfer(fx.hypot(fy));
        }
    }

    transform_columns(&mut buf, pw, ph, &mut col, |c| col_inv.process(c));
    for row in buf.chunks_mut(pw) {
        row_inv.process(row);
    }
    let scale = 1.0 / (pw * ph) as f64;
    Ok((0..h)
        .flat_map(|y| (0..w).map(move |x| (y, x)))
        .map(|(y, x)| buf[y * pw + x].re * scale)
        .collect())
}

fn transform_columns(
    buf: &mut [Complex<f64>],
    pw: usize,
    ph: usize,
    col: &mut [Complex<f64>],
    mut f: impl FnMut(&mut [Complex<f64>]),
) {
    for x in 0..pw {
        for y in 0..ph {
            col[y] = buf[y * pw + x];
        }
        f(col);
        for y in 0..ph {
            buf[y * pw + x] = col[y];
        }
    }
}

/// Homomorphic filter, output linearly renormalized to span [0, 255].
pub fn homomorphic_filter(img: &GrayImage, params: HomomorphicParams) -> Result<GrayImage> {
    params.check()?;
    let values = img.as_slice();
    if values.iter().all(|&v| v == values[0]) {
        return Ok(img.clone());
    }
    let field: Vec<f64> = homomorphic_log_response(img, params)?
        .into_iter()
        .map(f64::exp_m1)
        .collect();
    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let data = field
        .iter()
        .map(|&v| {
            let s = if span > 0.0 {
                (v - lo) / span * 255.0
            } else {
                0.0
            };
            (s + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::from_vec(img.width(), img.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(low: f64, high: f64) -> HomomorphicParams {
        HomomorphicParams {
            cutoff: 4.0,
            gamma_low: low,
            gamma_high: high,
        }
    }

    #[test]
    fn flat_transfer_is_identity() {
        let img = GrayImage::from_fn(32, 24, |x, y| ((x * 37 + y * 11) % 256) as u8).unwrap();
        let mut full = img.clone();
        full.set(0, 0, 0);
        full.set(1, 0, 255);
        let out = homomorphic_filter(&full, params(1.0, 1.0)).unwrap();
        for (a, b) in out.as_slice().iter().zip(full.as_slice()) {
            assert!((i16::from(*a) - i16::from(*b)).abs() <= 1);
        }
    }

    #[test]
    fn constant_stays_constant() {
        let c = GrayImage::filled(16, 16, 99).unwrap();
        assert_eq!(homomorphic_filter(&c, params(0.5, 1.5)).unwrap(), c);
    }

    #[test]
    fn rejects_bad_gammas() {
        let img = GrayImage::filled(8, 8, 1).unwrap();
        assert!(homomorphic_filter(&img, params(1.2, 1.5)).is_err());
        assert!(homomorphic_filter(&img, params(0.5, 0.9)).is_err());
        assert!(homomorphic_filter(&img, params(0.0, 1.5)).is_err());
        let bad_cutoff = HomomorphicParams {
            cutoff: 0.0,
            ..params(0.5, 1.5)
        };
        assert!(homomorphic_filter(&img, bad_cutoff).is_err());
    }

    #[test]
    fn mirror_and_bins() {
        assert_eq!(
            (0..8).map(|i| mirror(i, 4)).collect::<Vec<_>>(),
            [0, 1, 2, 3, 3, 2, 1, 0]
        );
        assert_eq!(signed_bin(3, 8), 3.0);
        assert_eq!(signed_bin(5, 8), -3.0);
    }
}
