//! Planar projective maps and their estimation from point correspondences.

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

pub type Point = (f64, f64);

/// 3x3 projective map, normalized so that `h[2][2] == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl TryFrom<[f64; 9]> for Homography {
    type Error = Error;

    fn try_from(v: [f64; 9]) -> Result<Self> {
        Homography::from_row_major(v)
    }
}

impl From<Homography> for [f64; 9] {
    fn from(h: Homography) -> Self {
        h.to_row_major()
    }
}

impl Default for Homography {
    fn default() -> Self {
        Homography::identity()
    }
}

impl Homography {
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return arg("homography entries must be finite");
        }
        let s = m[2][2];
        if s.abs() < 1e-12 {
            return arg("homography cannot be normalized: h33 is zero");
        }
        let mut n = m;
        for row in n.iter_mut() {
            for v in row.iter_mut() {
                *v /= s;
            }
        }
        let h = Homography { m: n };
        if h.det().abs() <= 1e-12 {
            return arg(format!("homography is singular (det = {:e})", h.det()));
        }
        Ok(h)
    }

    pub fn from_row_major(v: [f64; 9]) -> Result<Self> {
        Self::new([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn identity() -> Self {
        Homography {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `angle` radians about `(cx, cy)` followed by a translation.
    pub fn rigid(angle: f64, (cx, cy): Point, (tx, ty): Point) -> Self {
        let (s, c) = angle.sin_cos();
        Homography {
            m: [
                [c, -s, cx - c * cx + s * cy + tx],
                [s, c, cy - s * cx - c * cy + ty],
                [0.0, 0.0, 1.0],
            ],
        }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn is_identity(&self) -> bool {
        *self == Homography::identity()
    }

    #[inline]
    pub fn apply(&self, (x, y): Point) -> Point {
        let m = &self.m;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        (
            (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
        )
    }

    /// Inverse via the adjugate; exact for identity and pure translations.
    pub fn inverse(&self) -> Result<Self> {
        let m = &self.m;
        let adj = [
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ];
        // adj / det, then renormalized; the det factor cancels in `new`
        Homography::new(adj)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Homography) -> Result<Self> {
        let a = Matrix3::from(self.m).transpose();
        let b = Matrix3::from(other.m).transpose();
        let p = a * b;
        Homography::new([
            [p[(0, 0)], p[(0, 1)], p[(0, 2)]],
            [p[(1, 0)], p[(1, 1)], p[(1, 2)]],
            [p[(2, 0)], p[(2, 1)], p[(2, 2)]],
        ])
    }

    pub fn max_abs_diff(&self, other: &Homography) -> f64 {
        self.to_row_major()
            .iter()
            .zip(other.to_row_major())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Ordered source/destination point pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    pairs: Vec<(Point, Point)>,
}

impl CorrespondenceSet {
    pub fn new(pairs: Vec<(Point, Point)>) -> Result<Self> {
        if pairs.len() < 4 {
            return arg(format!(
                "need at least 4 correspondences, got {}",
                pairs.len()
            ));
        }
        for (i, (p, _)) in pairs.iter().enumerate() {
            if pairs[..i].iter().any(|(q, _)| q == p) {
                return arg(format!("duplicated source point {p:?}"));
            }
        }
        Ok(CorrespondenceSet { pairs })
    }

    pub fn from_points(src: &[Point], dst: &[Point]) -> Result<Self> {
        if src.len() != dst.len() {
            return arg(format!(
                "point lists differ in length: {} vs {}",
                src.len(),
                dst.len()
            ));
        }
        Self::new(src.iter().copied().zip(dst.iter().copied()).collect())
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomographyFit {
    pub homography: Homography,
    /// RMS of `|H p_src - p_dst|` in pixels.
    pub rms: f64,
}

/// Similarity transform moving the centroid to the origin with mean
/// distance sqrt(2).
fn normalizer(points: impl Iterator<Item = Point> + Clone) -> Result<Matrix3<f64>> {
    let n = points.clone().count() as f64;
    let (sx, sy) = points
        .clone()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (cx, cy) = (sx / n, sy / n);
    let mean_dist = points.map(|(x, y)| (x - cx).hypot(y - cy)).sum::<f64>() / n;
    if mean_dist < 1e-12 {
        return Err(Error::Estimation("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(
        s,
        0.0,
        -s * cx,
        0.0,
        s,
        -s * cy,
        0.0,
        0.0,
        1.0,
    ))
}

fn collinear(a: Point, b: Point, c: Point) -> bool {
    let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let scale = [(a, b), (b, c), (a, c)]
        .iter()
        .map(|(p, q)| (p.0 - q.0).hypot(p.1 - q.1))
        .fold(0.0, f64::max);
    cross.abs() <= 1e-9 * scale * scale
}

/// Normalized DLT estimate of the map taking sources onto destinations.
pub fn estimate_homography(corr: &CorrespondenceSet) -> Result<HomographyFit> {
    let pairs = corr.pairs();
    if pairs.len() == 4 {
        for side in 0..2 {
            let pts: Vec<Point> = pairs
                .iter()
                .map(|(s, d)| if side == 0 { *s } else { *d })
                .collect();
            for skip in 0..4 {
                let tri: Vec<Point> = (0..4).filter(|&i| i != skip).map(|i| pts[i]).collect();
                if collinear(tri[0], tri[1], tri[2]) {
                    return Err(Error::Estimation(
                        "three collinear points in minimal set".into(),
                    ));
                }
            }
        }
    }
    let t_src = normalizer(pairs.iter().map(|p| p.0))?;
    let t_dst = normalizer(pairs.iter().map(|p| p.1))?;

    let rows = (2 * pairs.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (s, d)) in pairs.iter().enumerate() {
        let ps = t_src * Vector3::new(s.0, s.1, 1.0);
        let pd = t_dst * Vector3::new(d.0, d.1, 1.0);
        let (x, y) = (ps.x / ps.z, ps.y / ps.z);
        let (u, v) = (pd.x / pd.z, pd.y / pd.z);
        let r = 2 * i;
        a.row_mut(r)
            .copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
    }
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Estimation("SVD did not converge".into()))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let (smallest, second) = (order[0], order[1]);
    if sv[second] <= 1e-10 * sv[order[sv.len() - 1]] {
        return Err(Error::Estimation("degenerate point configuration".into()));
    }
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_dst_inv = t_dst
        .try_inverse()
        .ok_or_else(|| Error::Estimation("singular normalizer".into()))?;
    let full = t_dst_inv * hn * t_src;
    let homography = Homography::new([
        [full[(0, 0)], full[(0, 1)], full[(0, 2)]],
        [full[(1, 0)], full[(1, 1)], full[(1, 2)]],
        [full[(2, 0)], full[(2, 1)], full[(2, 2)]],
    ])
    .map_err(|e| Error::Estimation(e.to_string()))?;
    let rms = reprojection_rms(&homography, pairs);
    Ok(HomographyFit { homography, rms })
}

pub fn reprojection_rms(h: &Homography, pairs: &[(Point, Point)]) -> f64 {
    let sum: f64 = pairs
        .iter()
        .map(|(s, d)| {
            let p = h.apply(*s);
            (p.0 - d.0).powi(2) + (p.1 - d.1).powi(2)
        })
        .sum();
    (sum / pairs.len() as f64).sqrt()
}
