//! Chessboard inner-corner detection: saddle response, lattice growth from
//! the strongest candidates, X-junction verification and subpixel
//! refinement.

use std::collections::{HashMap, VecDeque};

use crate::error::{arg, Error, Result};
use crate::image::GrayImage;
use crate::ops::canny::{gaussian_smooth, sobel};
use crate::registration::homography::Point;

const SMOOTH_SIGMA: f64 = 1.2;
const NMS_RADIUS: i64 = 3;
const MAX_CANDIDATES: usize = 400;
const MAX_SEEDS: usize = 12;

struct Field {
    data: Vec<f64>,
    w: usize,
    h: usize,
}

impl Field {
    fn at(&self, x: i64, y: i64) -> f64 {
        let x = x.clamp(0, self.w as i64 - 1) as usize;
        let y = y.clamp(0, self.h as i64 - 1) as usize;
        self.data[y * self.w + x]
    }

    fn sample(&self, (x, y): Point) -> f64 {
        let x = x.clamp(0.0, (self.w - 1) as f64);
        let y = y.clamp(0.0, (self.h - 1) as f64);
        crate::registration::warp::sample_bilinear(&self.data, self.w, self.h, x, y).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    pos: Point,
    response: f64,
}

/// Saddle strength `fxy² - fxx fyy`, clipped at zero.
fn saddle_response(f: &Field) -> Vec<f64> {
    let mut out = vec![0.0; f.w * f.h];
    for y in 0..f.h as i64 {
        for x in 0..f.w as i64 {
            let c = f.at(x, y);
            let fxx = f.at(x + 1, y) - 2.0 * c + f.at(x - 1, y);
            let fyy = f.at(x, y + 1) - 2.0 * c + f.at(x, y - 1);
            let fxy = (f.at(x + 1, y + 1) - f.at(x + 1, y - 1) - f.at(x - 1, y + 1)
                + f.at(x - 1, y - 1))
                / 4.0;
            out[y as usize * f.w + x as usize] = (fxy * fxy - fxx * fyy).max(0.0);
        }
    }
    out
}

fn find_candidates(resp: &[f64], w: usize, h: usize) -> Vec<Candidate> {
    let peak = resp.iter().copied().fold(0.0, f64::max);
    let floor = (0.05 * peak).max(1.0);
    let mut out = Vec::new();
    for y in 0..h as i64 {
        'px: for x in 0..w as i64 {
            let r = resp[y as usize * w + x as usize];
            if r < floor {
                continue;
            }
            for dy in -NMS_RADIUS..=NMS_RADIUS {
                for dx in -NMS_RADIUS..=NMS_RADIUS {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let n = resp[ny as usize * w + nx as usize];
                    // ties resolve to the first pixel in raster order
                    if n > r || (n == r && (dy, dx) < (0, 0)) {
                        continue 'px;
                    }
                }
            }
            out.push(Candidate {
                pos: (x as f64, y as f64),
                response: r,
            });
        }
    }
    out.sort_by(|a, b| b.response.total_cmp(&a.response));
    out.truncate(MAX_CANDIDATES);
    out
}

fn sub(a: Point, b: Point) -> Point {
    (a.0 - b.0, a.1 - b.1)
}

fn add(a: Point, b: Point) -> Point {
    (a.0 + b.0, a.1 + b.1)
}

fn norm(a: Point) -> f64 {
    a.0.hypot(a.1)
}

fn nearest(cands: &[Candidate], p: Point, tol: f64, used: &[bool]) -> Option<usize> {
    cands
        .iter()
        .enumerate()
        .filter(|(i, c)| !used[*i] && norm(sub(c.pos, p)) <= tol)
        .min_by(|a, b| norm(sub(a.1.pos, p)).total_cmp(&norm(sub(b.1.pos, p))))
        .map(|(i, _)| i)
}

/// Two roughly orthogonal lattice steps at the seed from its neighbours.
fn seed_basis(cands: &[Candidate], seed: usize) -> Option<(Point, Point)> {
    let p = cands[seed].pos;
    let mut others: Vec<Point> = cands
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != seed)
        .map(|(_, c)| sub(c.pos, p))
        .filter(|d| norm(*d) > 2.0)
        .collect();
    others.sort_by(|a, b| norm(*a).total_cmp(&norm(*b)));
    let u = *others.first()?;
    let v = others.iter().copied().find(|d| {
        let cos = (u.0 * d.0 + u.1 * d.1) / (norm(u) * norm(*d));
        cos.abs() < 0.4 && norm(*d) < 2.0 * norm(u) && norm(*d) > 0.5 * norm(u)
    })?;
    Some((u, v))
}

type Lattice = HashMap<(i64, i64), usize>;

fn grow_lattice(cands: &[Candidate], seed: usize, u: Point, v: Point) -> Lattice {
    let mut lattice = Lattice::new();
    let mut used = vec![false; cands.len()];
    lattice.insert((0, 0), seed);
    used[seed] = true;
    let mut queue = VecDeque::from([(0i64, 0i64)]);
    let tol = 0.3 * norm(u).min(norm(v));
    while let Some((i, j)) = queue.pop_front() {
        let p = cands[lattice[&(i, j)]].pos;
        for (di, dj, step) in [
            (1, 0, u),
            (-1, 0, (-u.0, -u.1)),
            (0, 1, v),
            (0, -1, (-v.0, -v.1)),
        ] {
            let key = (i + di, j + dj);
            if lattice.contains_key(&key) {
                continue;
            }
            // extrapolate the local step when the opposite neighbour exists
            let local = lattice
                .get(&(i - di, j - dj))
                .map(|&k| sub(p, cands[k].pos))
                .unwrap_or(step);
            if let Some(k) = nearest(cands, add(p, local), tol, &used) {
                used[k] = true;
                lattice.insert(key, k);
                queue.push_back(key);
            }
        }
    }
    lattice
}

/// Quadrant means around `p` alternate like a chessboard X-junction.
fn is_x_junction(field: &Field, p: Point, u: Point, v: Point) -> bool {
    let q = |a: f64, b: f64| {
        field.sample((
            p.0 + 0.3 * (a * u.0 + b * v.0),
            p.1 + 0.3 * (a * u.1 + b * v.1),
        ))
    };
    let (q1, q2, q3, q4) = (q(1.0, 1.0), q(-1.0, 1.0), q(-1.0, -1.0), q(1.0, -1.0));
    let contrast = ((q1 + q3) - (q2 + q4)).abs() / 2.0;
    let asym = ((q1 - q3).abs() + (q2 - q4).abs()) / 2.0;
    contrast > 3.0 && asym < 0.5 * contrast
}

/// Gradient-orthogonality subpixel refinement.
fn refine(gx: &[f64], gy: &[f64], w: usize, h: usize, start: Point, radius: i64) -> Point {
    let mut c = start;
    for _ in 0..20 {
        let (cx, cy) = (c.0.round() as i64, c.1.round() as i64);
        let (mut a, mut b, mut d, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let sigma2 = (radius as f64 / 2.0).powi(2).max(1.0);
        for y in cy - radius..=cy + radius {
            for x in cx - radius..=cx + radius {
                if x < 1 || y < 1 || x >= w as i64 - 1 || y >= h as i64 - 1 {
                    continue;
                }
                let i = y as usize * w + x as usize;
                let (px, py) = (x as f64, y as f64);
                let wgt = (-((px - c.0).powi(2) + (py - c.1).powi(2)) / (2.0 * sigma2)).exp();
                let (g1, g2) = (gx[i], gy[i]);
                let (sxx, sxy, syy) = (wgt * g1 * g1, wgt * g1 * g2, wgt * g2 * g2);
                a += sxx;
                b += sxy;
                d += syy;
                bx += sxx * px + sxy * py;
                by += sxy * px + syy * py;
            }
        }
        let det = a * d - b * b;
        if det.abs() < 1e-9 {
            break;
        }
        let next = ((d * bx - b * by) / det, (a * by - b * bx) / det);
        if norm(sub(next, start)) > radius as f64 {
            return start;
        }
        let moved = norm(sub(next, c));
        c = next;
        if moved < 1e-3 {
            break;
        }
    }
    c
}

/// Inner corners of a `inner_cols x inner_rows` chessboard, row-major from
/// the top-left, in pixel-centre coordinates.
pub fn detect_chessboard(
    img: &GrayImage,
    inner_cols: usize,
    inner_rows: usize,
) -> Result<Vec<Point>> {
    if inner_cols < 2 || inner_rows < 2 {
        return arg(format!(
            "chessboard needs at least 2x2 inner corners, got {inner_cols}x{inner_rows}"
        ));
    }
    let expected = inner_cols * inner_rows;
    let (w, h) = (img.width(), img.height());
    let field = Field {
        data: gaussian_smooth(img, SMOOTH_SIGMA),
        w,
        h,
    };
    let cands = find_candidates(&saddle_response(&field), w, h);
    let mut best_found = 0;

    for seed in 0..cands.len().min(MAX_SEEDS) {
        let Some((u, v)) = seed_basis(&cands, seed) else {
            continue;
        };
        let lattice = grow_lattice(&cands, seed, u, v);
        // orient lattice axes along image x (columns) and y (rows)
        let (ax_u_is_x, flip_u, flip_v) = if u.0.abs() >= u.1.abs() {
            (true, u.0 < 0.0, v.1 < 0.0)
        } else {
            (false, u.1 < 0.0, v.0 < 0.0)
        };
        let (col_step, row_step) = if ax_u_is_x { (u, v) } else { (v, u) };
        let mut grid: HashMap<(i64, i64), usize> = HashMap::new();
        for (&(i, j), &k) in &lattice {
            let i = if flip_u { -i } else { i };
            let j = if flip_v { -j } else { j };
            let key = if ax_u_is_x { (i, j) } else { (j, i) };
            if is_x_junction(&field, cands[k].pos, col_step, row_step) {
                grid.insert(key, k);
            }
        }
        best_found = best_found.max(grid.len());
        if grid.len() < expected {
            continue;
        }
        let (min_c, max_c) = minmax(grid.keys().map(|k| k.0));
        let (min_r, max_r) = minmax(grid.keys().map(|k| k.1));
        let mut best: Option<(f64, i64, i64)> = None;
        for r0 in min_r..=max_r - inner_rows as i64 + 1 {
            for c0 in min_c..=max_c - inner_cols as i64 + 1 {
                let mut score = 0.0;
                let mut complete = true;
                for r in r0..r0 + inner_rows as i64 {
                    for c in c0..c0 + inner_cols as i64 {
                        match grid.get(&(c, r)) {
                            Some(&k) => score += cands[k].response,
                            None => complete = false,
                        }
                    }
                }
                if complete && best.is_none_or(|b| score > b.0) {
                    best = Some((score, c0, r0));
                }
            }
        }
        let Some((_, c0, r0)) = best else {
            continue;
        };

        let (gx, gy) = sobel(&field.data, w, h);
        let spacing = norm(col_step).min(norm(row_step));
        let radius = (spacing * 0.35).round().clamp(2.0, 8.0) as i64;
        let mut corners = Vec::with_capacity(expected);
        for r in r0..r0 + inner_rows as i64 {
            for c in c0..c0 + inner_cols as i64 {
                let p = cands[grid[&(c, r)]].pos;
                corners.push(refine(&gx, &gy, w, h, p, radius));
            }
        }
        return Ok(corners);
    }
    Err(Error::Detection {
        found: best_found.min(expected.saturating_sub(1)),
        expected,
    })
}

fn minmax(it: impl Iterator<Item = i64>) -> (i64, i64) {
    it.fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
}
