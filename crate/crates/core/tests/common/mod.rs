//! Helpers and brute-force reference implementations shared by the
//! integration tests. Everything here is written independently of the
//! library internals and favours obviousness over speed.
#![allow(dead_code)]

use std::f64::consts::PI;

use dualband::io::{load_config, PipelineConfig};
use dualband::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn tank_config() -> PipelineConfig {
    load_config(fixture_path("tank_pipeline.json")).expect("bundled fixture loads")
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    let data = (0..w * h).map(|_| rng.random::<u8>()).collect();
    GrayImage::from_vec(w, h, data).unwrap()
}

/// Ideal axis-aligned board with `cells` squares per side, antialiased by
/// area sampling; returns the image and its inner corners, row-major. Pixel
/// `x` covers `[x - 0.5, x + 0.5)`, so `origin` and the corners share the
/// detector's pixel-centre coordinates.
pub fn ideal_board(
    size: usize,
    origin: (f64, f64),
    cell: f64,
    cells: usize,
) -> (GrayImage, Vec<(f64, f64)>) {
    board_through(size, cell, cells, origin, &|p| p)
}

/// Board rendered through `to_board`, which maps an image point to the
/// unwarped board plane. Corners are returned in board-plane coordinates.
pub fn board_through(
    size: usize,
    cell: f64,
    cells: usize,
    origin: (f64, f64),
    to_board: &dyn Fn((f64, f64)) -> (f64, f64),
) -> (GrayImage, Vec<(f64, f64)>) {
    let n = 8;
    let img = GrayImage::from_fn(size, size, |x, y| {
        let mut acc: f64 = 0.0;
        for sy in 0..n {
            for sx in 0..n {
                let px = x as f64 - 0.5 + (sx as f64 + 0.5) / n as f64;
                let py = y as f64 - 0.5 + (sy as f64 + 0.5) / n as f64;
                let (bx, by) = to_board((px, py));
                let (u, v) = ((bx - origin.0) / cell, (by - origin.1) / cell);
                let inside = u >= 0.0 && v >= 0.0 && u < cells as f64 && v < cells as f64;
                acc += if !inside {
                    120.0
                } else if (u.floor() as i64 + v.floor() as i64) % 2 == 0 {
                    230.0
                } else {
                    20.0
                };
            }
        }
        (acc / (n * n) as f64).round() as u8
    })
    .unwrap();
    let mut corners = Vec::new();
    for j in 1..cells {
        for i in 1..cells {
            corners.push((origin.0 + i as f64 * cell, origin.1 + j as f64 * cell));
        }
    }
    (img, corners)
}

// ----------------------------------------------------------------------------
// Henyey–Greenstein quadrature

pub fn hg(g: f64, cos_t: f64) -> f64 {
    (1.0 - g * g) / (4.0 * PI * (1.0 + g * g - 2.0 * g * cos_t).powf(1.5))
}

/// Composite Simpson rule on [a, b] with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// ∫ p(θ) 2π sinθ dθ over [lo, hi], substituting μ = cos θ.
pub fn hg_solid_angle_integral(g: f64, lo: f64, hi: f64) -> f64 {
    // dμ integral from cos(hi) to cos(lo); many panels because p is sharply
    // peaked for g near 1.
    simpson(|mu| 2.0 * PI * hg(g, mu), hi.cos(), lo.cos(), 200_000)
}

// ----------------------------------------------------------------------------
// Canny oracle: direct 2-D convolution, explicit angle binning, fixpoint
// hysteresis.

pub fn canny_oracle(img: &GrayImage, sigma: f64, t_low: f64, t_high: f64) -> Vec<bool> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let px =
        |x: i64, y: i64| f64::from(img.get(x.clamp(0, w - 1) as usize, y.clamp(0, h - 1) as usize));

    let smooth: Vec<f64> = if sigma > 0.0 {
        let r = (3.0 * sigma).ceil() as i64;
        let g1 = |i: i64| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp();
        let norm: f64 = (-r..=r).map(g1).sum::<f64>().powi(2);
        let mut out = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for j in -r..=r {
                    for i in -r..=r {
                        s += g1(i) * g1(j) * px(x + i, y + j);
                    }
                }
                out.push(s / norm);
            }
        }
        out
    } else {
        (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| px(x, y))
            .collect()
    };
    let s = |x: i64, y: i64| smooth[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];

    let mut gx = vec![0.0; (w * h) as usize];
    let mut gy = vec![0.0; (w * h) as usize];
    const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    for y in 0..h {
        for x in 0..w {
            let (mut ax, mut ay) = (0.0, 0.0);
            for (j, row) in KX.iter().enumerate() {
                for (i, k) in row.iter().enumerate() {
                    let v = s(x + i as i64 - 1, y + j as i64 - 1);
                    ax += k * v;
                    ay += KX[i][j] * v;
                }
            }
            gx[(y * w + x) as usize] = ax;
            gy[(y * w + x) as usize] = ay;
        }
    }
    let mag: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .map(|(a, b)| (a * a + b * b).sqrt())
        .collect();
    let m = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w || y >= h {
            0.0
        } else {
            mag[(y * w + x) as usize]
        }
    };

    let mut nms = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if mag[i] == 0.0 {
                continue;
            }
            let deg = gy[i].atan2(gx[i]).to_degrees().rem_euclid(180.0);
            let sector = ((deg / 45.0).round() as i64) % 4;
            let (dx, dy) = [(1, 0), (1, 1), (0, 1), (-1, 1)][sector as usize];
            if mag[i] > m(x + dx, y + dy) && mag[i] >= m(x - dx, y - dy) {
                nms[i] = mag[i];
            }
        }
    }

    let mut edges: Vec<bool> = nms.iter().map(|&v| v >= t_high).collect();
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let i = (y * w + x) as usize;
                if edges[i] || nms[i] < t_low {
                    continue;
                }
                let touches = (-1..=1).any(|dy| {
                    (-1..=1).any(|dx| {
                        let (nx, ny) = (x + dx, y + dy);
                        nx >= 0 && ny >= 0 && nx < w && ny < h && edges[(ny * w + nx) as usize]
                    })
                });
                if touches {
                    edges[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return edges;
        }
    }
}

// ----------------------------------------------------------------------------
// Equalization oracle: the CDF formula evaluated in floating point.

pub fn equalize_oracle(img: &GrayImage) -> Vec<u8> {
    let n = img.len() as f64;
    let cdf = |v: u8| img.as_slice().iter().filter(|&&p| p <= v).count() as f64;
    let cdf_min = img
        .as_slice()
        .iter()
        .map(|&p| cdf(p))
        .fold(f64::INFINITY, f64::min);
    if cdf_min == n {
        return img.as_slice().to_vec();
    }
    img.as_slice()
        .iter()
        .map(|&p| (255.0 * (cdf(p) - cdf_min) / (n - cdf_min)).round() as u8)
        .collect()
}

// ----------------------------------------------------------------------------
// Homomorphic oracle: naive DFT on the mirror-extended log image.

fn dft_1d(data: &[(f64, f64)], inverse: bool) -> Vec<(f64, f64)> {
    let n = data.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            data.iter()
                .enumerate()
                .fold((0.0, 0.0), |(re, im), (t, &(a, b))| {
                    let ang = sign * 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    let (s, c) = ang.sin_cos();
                    (re + a * c - b * s, im + a * s + b * c)
                })
        })
        .collect()
}

fn dft_2d(buf: &mut [(f64, f64)], w: usize, h: usize, inverse: bool) {
    for y in 0..h {
        let row = dft_1d(&buf[y * w..(y + 1) * w], inverse);
        buf[y * w..(y + 1) * w].copy_from_slice(&row);
    }
    for x in 0..w {
        let col: Vec<_> = (0..h).map(|y| buf[y * w + x]).collect();
        for (y, v) in dft_1d(&col, inverse).into_iter().enumerate() {
            buf[y * w + x] = v;
        }
    }
}

/// Filtered log field: ln(1+I) mirrored to 2W×2H, multiplied by the transfer
/// at radial frequency in cycles per original image, transformed back.
pub fn homomorphic_oracle(img: &GrayImage, cutoff: f64, gl: f64, gh: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let (pw, ph) = (2 * w, 2 * h);
    let refl = |i: usize, n: usize| if i < n { i } else { 2 * n - 1 - i };
    let mut buf: Vec<(f64, f64)> = (0..ph)
        .flat_map(|y| (0..pw).map(move |x| (x, y)))
        .map(|(x, y)| ((1.0 + f64::from(img.get(refl(x, w), refl(y, h)))).ln(), 0.0))
        .collect();
    dft_2d(&mut buf, pw, ph, false);
    let freq = |k: usize, n: usize| {
        let k = k as f64;
        let n = n as f64;
        (if k <= n / 2.0 { k } else { k - n }) / 2.0
    };
    for ky in 0..ph {
        for kx in 0..pw {
            let f2 = freq(kx, pw).powi(2) + freq(ky, ph).powi(2);
            let hval = gl + (gh - gl) * (1.0 - (-f2 / (2.0 * cutoff * cutoff)).exp());
            let v = &mut buf[ky * pw + kx];
            *v = (v.0 * hval, v.1 * hval);
        }
    }
    dft_2d(&mut buf, pw, ph, true);
    let scale = (pw * ph) as f64;
    (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| buf[y * pw + x].0 / scale)
        .collect()
}

pub fn rms(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}
