//! Trigonometry and coordinates of the model spaces `M^n_κ`.
//!
//! Charts:
//!
//! * κ > 0: the sphere of radius `1/√κ` in `R^{n+1}`, pole `(1/√κ, 0, …, 0)`;
//! * κ = 0: `R^n`, pole at the origin;
//! * κ < 0: the future sheet of the unit hyperboloid `⟨v, v⟩ = -1` of the
//!   Minkowski form `-v₀w₀ + Σ vᵢwᵢ` in `R^{n+1}`, pole `(1, 0, …, 0)`;
//!   intrinsic distances are scaled by `1/√(-κ)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::comparison::DirectionGram;
use crate::error::{Error, Result};
use crate::tol;

/// Curvature bound κ, in units of 1/length².
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Kappa(f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Elliptic,
    Flat,
    Hyperbolic,
}

impl Kappa {
    pub const FLAT: Kappa = Kappa(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            // normalise -0.0 so that the regime is decided by sign alone
            Ok(Kappa(if value == 0.0 { 0.0 } else { value }))
        } else {
            Err(Error::NonFiniteKappa(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn regime(self) -> Regime {
        if self.0 > 0.0 {
            Regime::Elliptic
        } else if self.0 < 0.0 {
            Regime::Hyperbolic
        } else {
            Regime::Flat
        }
    }

    /// `√|κ|`.
    pub fn scale(self) -> f64 {
        self.0.abs().sqrt()
    }

    /// Perimeter bound `2π/√κ` for κ > 0, infinite otherwise.
    pub fn perimeter_bound(self) -> f64 {
        match self.regime() {
            Regime::Elliptic => 2.0 * PI / self.scale(),
            _ => f64::INFINITY,
        }
    }

    /// Distance `π/√κ` to the antipode for κ > 0, infinite otherwise.
    pub fn antipodal_distance(self) -> f64 {
        self.perimeter_bound() / 2.0
    }

    /// `S_κ(r)`.
    pub fn sn(self, r: f64) -> f64 {
        kappa_trig(self, r).0
    }

    /// `C_κ(r) = S'_κ(r)`.
    pub fn cs(self, r: f64) -> f64 {
        kappa_trig(self, r).1
    }
}

impl TryFrom<f64> for Kappa {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Kappa::new(value)
    }
}

impl From<Kappa> for f64 {
    fn from(k: Kappa) -> f64 {
        k.0
    }
}

/// Returns `(S_κ(r), C_κ(r))`.
///
/// Near κ = 0 (`|κ| r² < 1e-8`) both are evaluated by their Taylor series so
/// that the functions are continuous in κ and free of cancellation.
pub fn kappa_trig(kappa: Kappa, r: f64) -> (f64, f64) {
    let k = kappa.value();
    let x = k * r * r;
    if x.abs() < tol::SERIES {
        let s = r * (1.0 - x / 6.0 + x * x / 120.0);
        let c = 1.0 - x / 2.0 + x * x / 24.0;
        return (s, c);
    }
    let q = kappa.scale();
    if k > 0.0 {
        ((q * r).sin() / q, (q * r).cos())
    } else {
        ((q * r).sinh() / q, (q * r).cosh())
    }
}

/// `sin²(A/2)` and `cos²(A/2)` of the model triangle with sides `b`, `c` at
/// the apex and opposite side `a`, or `None` when κ > 0 and the perimeter is
/// not below `2π/√κ`.
///
/// Both come from the half-angle identities
/// `sin²(A/2) = S(s-b)S(s-c) / S(b)S(c)` and `cos²(A/2) = S(s)S(s-a) / S(b)S(c)`,
/// which stay accurate for degenerate and near-degenerate triangles where
/// the law of cosines loses all digits.
fn half_angle_terms(kappa: Kappa, b: f64, c: f64, a: f64) -> Option<(f64, f64)> {
    // fixed summation order keeps the angle exactly symmetric in b and c
    let (b, c) = if b <= c { (b, c) } else { (c, b) };
    let s = 0.5 * (a + b + c);
    if 2.0 * s >= kappa.perimeter_bound() {
        return None;
    }
    let sn = |r: f64| kappa.sn(r);
    let denom = sn(b) * sn(c);
    Some((sn(s - b) * sn(s - c) / denom, sn(s) * sn(s - a) / denom))
}

fn angle_from_terms(hs: f64, hc: f64) -> f64 {
    2.0 * hs.max(0.0).sqrt().atan2(hc.max(0.0).sqrt())
}

/// Angle at the apex of the model triangle with apex sides `b`, `c` and
/// opposite side `a`.
///
/// `Ok(None)` signals the κ > 0 case where the perimeter reaches `2π/√κ` and
/// the comparison triangle does not exist.
pub fn angle_from_sides(kappa: Kappa, b: f64, c: f64, a: f64) -> Result<Option<f64>> {
    if !(b > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "apex sides must be positive, got {b} and {c}"
        )));
    }
    let Some((hs, hc)) = half_angle_terms(kappa, b, c, a) else {
        return Ok(None);
    };
    // cos A = 1 - 2 sin²(A/2) = 2 cos²(A/2) - 1
    let excess = (-2.0 * hs).max(-2.0 * hc);
    if !(excess <= tol::CLAMP) {
        return Err(Error::InadmissibleTriangle { excess });
    }
    Ok(Some(angle_from_terms(hs, hc)))
}

pub(crate) fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn ambient_len(kappa: Kappa, dim: usize) -> usize {
    match kappa.regime() {
        Regime::Flat => dim,
        _ => dim + 1,
    }
}

/// The base point of the chart.
pub(crate) fn pole(kappa: Kappa, dim: usize) -> Vec<f64> {
    let mut p = vec![0.0; ambient_len(kappa, dim)];
    match kappa.regime() {
        Regime::Flat => {}
        Regime::Elliptic => p[0] = 1.0 / kappa.scale(),
        Regime::Hyperbolic => p[0] = 1.0,
    }
    p
}

/// Point at distance `r` from the pole along the unit tangent direction `dir`.
pub(crate) fn polar_point(kappa: Kappa, r: f64, dir: &[f64]) -> Vec<f64> {
    let q = kappa.scale();
    match kappa.regime() {
        Regime::Flat => dir.iter().map(|u| r * u).collect(),
        Regime::Elliptic => {
            let radius = 1.0 / q;
            let (s, c) = (q * r).sin_cos();
            std::iter::once(radius * c)
                .chain(dir.iter().map(|u| radius * s * u))
                .collect()
        }
        Regime::Hyperbolic => {
            let (s, c) = ((q * r).sinh(), (q * r).cosh());
            std::iter::once(c).chain(dir.iter().map(|u| s * u)).collect()
        }
    }
}

/// Intrinsic distance between two chart points.
pub fn chart_distance(kappa: Kappa, a: &[f64], b: &[f64]) -> f64 {
    let q = kappa.scale();
    match kappa.regime() {
        Regime::Flat => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        Regime::Elliptic => {
            // angle between unit vectors as 2·atan2(|u - v|, |u + v|)
            let (mut diff, mut sum) = (0.0, 0.0);
            for (x, y) in a.iter().zip(b) {
                let (u, v) = (x * q, y * q);
                diff += (u - v) * (u - v);
                sum += (u + v) * (u + v);
            }
            2.0 * diff.sqrt().atan2(sum.sqrt()) / q
        }
        Regime::Hyperbolic => {
            let coshd = -minkowski(a, b);
            let d = if coshd > 2.0 {
                coshd.acosh()
            } else {
                let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                2.0 * (minkowski(&delta, &delta).max(0.0).sqrt() / 2.0).asinh()
            };
            d / q
        }
    }
}

/// Relative deviation of a point from its chart constraint.
fn chart_deviation(kappa: Kappa, p: &[f64]) -> f64 {
    match kappa.regime() {
        Regime::Flat => 0.0,
        Regime::Elliptic => {
            let radius = 1.0 / kappa.scale();
            ((norm(p) - radius) / radius).abs()
        }
        Regime::Hyperbolic => {
            if p[0] <= 0.0 {
                return f64::INFINITY;
            }
            let e2: f64 = p.iter().map(|x| x * x).sum();
            (minkowski(p, p) + 1.0).abs() / e2
        }
    }
}

/// A finite configuration of points in `M^n_κ`, in the chart described in the
/// module docs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    kappa: Kappa,
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl ModelConfig {
    pub fn new(kappa: Kappa, dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let mut cfg = ModelConfig { kappa, dim, points: Vec::with_capacity(points.len()) };
        for p in points {
            cfg.push(p)?;
        }
        Ok(cfg)
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    /// Intrinsic dimension `n` of `M^n_κ`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Length of a coordinate vector in this chart.
    pub fn ambient_dim(&self) -> usize {
        ambient_len(self.kappa, self.dim)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Appends a point after checking its chart constraint; returns its index.
    pub fn push(&mut self, p: Vec<f64>) -> Result<usize> {
        let index = self.points.len();
        let expected = self.ambient_dim();
        if p.len() != expected {
            return Err(Error::ChartDimension { index, len: p.len(), expected });
        }
        let deviation = chart_deviation(self.kappa, &p);
        if !(deviation <= tol::CHART_REL) || p.iter().any(|x| !x.is_finite()) {
            return Err(Error::ChartViolation { index, deviation });
        }
        self.points.push(p);
        Ok(index)
    }

    fn check(&self, i: usize) -> Result<&[f64]> {
        self.points
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange { index: i, len: self.points.len() })
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        Ok(chart_distance(self.kappa, self.check(i)?, self.check(j)?))
    }

    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { chart_distance(self.kappa, &self.points[i], &self.points[j]) })
                    .collect()
            })
            .collect()
    }

    /// Point at arclength `t · d(i, j)` from point `i` on the unique geodesic to `j`.
    pub fn geodesic_point(&self, i: usize, j: usize, t: f64) -> Result<Vec<f64>> {
        let (a, b) = (self.check(i)?, self.check(j)?);
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("geodesic parameter {t} outside [0, 1]")));
        }
        let d = chart_distance(self.kappa, a, b);
        let scale = norm(a).max(norm(b)).max(1.0);
        if !(d > 1e-14 * scale) {
            return Err(Error::Coincident(i, j));
        }
        if self.kappa.regime() == Regime::Elliptic
            && d >= self.kappa.antipodal_distance() * (1.0 - 1e-12)
        {
            return Err(Error::Antipodal(i, j));
        }
        if t == 0.0 {
            return Ok(a.to_vec());
        }
        if t == 1.0 {
            return Ok(b.to_vec());
        }
        let q = self.kappa.scale();
        let point = match self.kappa.regime() {
            Regime::Flat => a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect(),
            Regime::Elliptic => {
                let theta = d * q;
                let (wa, wb) = (((1.0 - t) * theta).sin(), (t * theta).sin());
                let mut w: Vec<f64> = a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect();
                let fix = (1.0 / q) / norm(&w);
                w.iter_mut().for_each(|x| *x *= fix);
                w
            }
            Regime::Hyperbolic => {
                let theta = d * q;
                let (wa, wb) = (((1.0 - t) * theta).sinh(), (t * theta).sinh());
                let mut w: Vec<f64> = a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect();
                let fix = 1.0 / (-minkowski(&w, &w)).sqrt();
                w.iter_mut().for_each(|x| *x *= fix);
                w
            }
        };
        Ok(point)
    }
}

/// Intrinsic distance between points `i` and `j` of a configuration.
pub fn model_distance(cfg: &ModelConfig, i: usize, j: usize) -> Result<f64> {
    cfg.distance(i, j)
}

/// Realizes a triangle with `d(p0, p1) = d01`, `d(p0, p2) = d02`,
/// `d(p1, p2) = d12` in `M²_κ`.
///
/// Placement is canonical: `p0` at the pole, `p1` on the first tangent axis,
/// `p2` with nonnegative second tangent coordinate.
pub fn realize_triangle(kappa: Kappa, d01: f64, d02: f64, d12: f64) -> Result<ModelConfig> {
    let sides = [d01, d02, d12];
    if sides.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidParameter(format!("side lengths must be finite and nonnegative: {sides:?}")));
    }
    let slack = tol::METRIC_REL * d01.max(d02).max(d12);
    let excess = (d01 - d02 - d12).max(d02 - d01 - d12).max(d12 - d01 - d02);
    if excess > slack {
        return Err(Error::TriangleInequality { excess });
    }
    let perimeter = d01 + d02 + d12;
    let bound = kappa.perimeter_bound();
    if perimeter >= bound {
        return Err(Error::PerimeterBound { perimeter, bound });
    }
    let theta = if d01 > 0.0 && d02 > 0.0 {
        // within the accepted slack, clamp rather than reject
        let (hs, hc) = half_angle_terms(kappa, d01, d02, d12)
            .ok_or(Error::PerimeterBound { perimeter, bound })?;
        angle_from_terms(hs, hc)
    } else {
        0.0
    };
    let points = vec![
        pole(kappa, 2),
        polar_point(kappa, d01, &[1.0, 0.0]),
        polar_point(kappa, d02, &[theta.cos(), theta.sin()]),
    ];
    ModelConfig::new(kappa, 2, points)
}

/// Unit vectors realizing a PSD Gram matrix, in canonical position.
///
/// Negative eigenvalues down to `-tol::PSD` are projected to zero; the
/// numerical rank `r` keeps eigenvalues above `tol::RANK_REL` times the
/// largest. The returned vectors live in `R^r` and are lower-triangular in
/// the sense that vector `i` has zero coordinates beyond its pivot row.
pub(crate) fn canonical_directions(gram: &DMatrix<f64>) -> Result<(usize, Vec<Vec<f64>>)> {
    let n = gram.nrows();
    let eig = SymmetricEigen::new(gram.clone());
    let (imin, &min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidGram("empty gram matrix".into()))?;
    if min < -tol::PSD {
        return Err(Error::IndefiniteGram {
            min_eigenvalue: min,
            witness: eig.eigenvectors.column(imin).iter().copied().collect(),
        });
    }
    let max = eig.eigenvalues.max();
    let mut keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > tol::RANK_REL * max).collect();
    keep.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let rank = keep.len();

    // factor^T is r × n; its R factor holds the vectors in canonical position
    let factor_t = DMatrix::from_fn(rank, n, |k, i| {
        eig.eigenvectors[(i, keep[k])] * eig.eigenvalues[keep[k]].sqrt()
    });
    let mut r = factor_t.qr().r();
    let biggest = r.amax();
    for k in 0..r.nrows() {
        if let Some(pivot) = (0..n).find(|&j| r[(k, j)].abs() > 1e-12 * biggest) {
            if r[(k, pivot)] < 0.0 {
                r.row_mut(k).neg_mut();
            }
        }
    }
    let dirs = (0..n)
        .map(|i| {
            let col: Vec<f64> = (0..rank).map(|k| r[(k, i)]).collect();
            let len = norm(&col);
            if len > 0.0 {
                col.iter().map(|x| x / len).collect()
            } else {
                col
            }
        })
        .collect();
    Ok((rank, dirs))
}

/// Places a base point and points at distances `radii` from it whose
/// comparison angles at the base have cosines given by `gram`.
///
/// The result lives in `M^r_κ` with `r` the numerical rank of `gram`; the
/// base point is element 0 and point `i` of the gram is element `i + 1`.
pub fn exp_from_gram(kappa: Kappa, radii: &[f64], gram: &DirectionGram) -> Result<ModelConfig> {
    if radii.is_empty() || radii.len() != gram.len() {
        return Err(Error::InvalidParameter(format!(
            "{} radii for a {}×{} gram matrix",
            radii.len(),
            gram.len(),
            gram.len()
        )));
    }
    let reach = kappa.antipodal_distance();
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r >= 0.0 && **r < reach)) {
        return Err(Error::InvalidParameter(format!("radius {r} outside [0, {reach})")));
    }
    let (rank, dirs) = canonical_directions(&gram.to_matrix())?;
    let mut points = Vec::with_capacity(radii.len() + 1);
    points.push(pole(kappa, rank));
    points.extend(radii.iter().zip(&dirs).map(|(&r, u)| polar_point(kappa, r, u)));
    ModelConfig::new(kappa, rank, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(v: f64) -> Kappa {
        Kappa::new(v).unwrap()
    }

    #[test]
    fn trig_flat_and_unit_sphere() {
        assert_eq!(kappa_trig(k(0.0), 3.0), (3.0, 1.0));
        let (s, c) = kappa_trig(k(1.0), PI / 2.0);
        assert!((s - 1.0).abs() < 1e-15 && c.abs() < 1e-15);
    }

    #[test]
    fn trig_hyperbolic_unit() {
        // (e - 1/e)/2 and (e + 1/e)/2 evaluated by hand
        let (s, c) = kappa_trig(k(-1.0), 1.0);
        assert!((s - 1.1752011936438014).abs() < 1e-14);
        assert!((c - 1.5430806348152437).abs() < 1e-14);
    }

    #[test]
    fn trig_series_is_continuous_at_zero() {
        for r in [0.1, 1.0, 3.0] {
            for kv in [1e-10, -1e-10, 1e-9] {
                let (s, c) = kappa_trig(k(kv), r);
                assert!((s - r).abs() < 1e-8 && (c - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn non_finite_kappa_rejected() {
        assert!(Kappa::new(f64::NAN).is_err());
        assert_eq!(Kappa::new(-0.0).unwrap().regime(), Regime::Flat);
    }

    #[test]
    fn distances_in_each_chart() {
        let flat = ModelConfig::new(k(0.0), 2, vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(model_distance(&flat, 0, 1).unwrap(), 5.0);

        let sphere = ModelConfig::new(k(1.0), 2, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!((model_distance(&sphere, 0, 1).unwrap() - PI / 2.0).abs() < 1e-15);

        let c = 1f64.cosh();
        let s = 1f64.sinh();
        let hyp = ModelConfig::new(k(-1.0), 2, vec![vec![1.0, 0.0, 0.0], vec![c, s, 0.0]]).unwrap();
        assert!((model_distance(&hyp, 0, 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chart_violations() {
        assert!(matches!(
            ModelConfig::new(k(1.0), 2, vec![vec![1.0, 1.0, 0.0]]),
            Err(Error::ChartViolation { .. })
        ));
        assert!(matches!(
            ModelConfig::new(k(-1.0), 1, vec![vec![-1.0, 0.0]]),
            Err(Error::ChartViolation { .. })
        ));
        assert!(matches!(
            ModelConfig::new(k(0.0), 2, vec![vec![1.0]]),
            Err(Error::ChartDimension { .. })
        ));
    }

    #[test]
    fn geodesic_midpoints_and_endpoints() {
        let flat = ModelConfig::new(k(0.0), 2, vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(flat.geodesic_point(0, 1, 0.5).unwrap(), vec![1.0, 0.0]);
        assert_eq!(flat.geodesic_point(0, 1, 0.0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(flat.geodesic_point(0, 1, 1.0).unwrap(), vec![2.0, 0.0]);

        let mut sphere = ModelConfig::new(k(1.0), 2, vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let mid = sphere.geodesic_point(0, 1, 0.5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((mid[0] - h).abs() < 1e-15 && (mid[2] - h).abs() < 1e-15);
        let m = sphere.push(mid).unwrap();
        assert!((sphere.distance(0, m).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((sphere.distance(1, m).unwrap() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn geodesic_errors() {
        let sphere = ModelConfig::new(k(1.0), 1, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(sphere.geodesic_point(0, 1, 0.5), Err(Error::Antipodal(0, 1))));
        let flat = ModelConfig::new(k(0.0), 1, vec![vec![1.0], vec![1.0]]).unwrap();
        assert!(matches!(flat.geodesic_point(0, 1, 0.5), Err(Error::Coincident(0, 1))));
    }

    #[test]
    fn realize_triangle_examples() {
        let t = realize_triangle(k(0.0), 3.0, 4.0, 5.0).unwrap();
        let d = t.distance_matrix();
        assert!((d[0][1] - 3.0).abs() < 1e-14 && (d[0][2] - 4.0).abs() < 1e-14 && (d[1][2] - 5.0).abs() < 1e-14);
        // right angle at the first point
        assert!(t.points()[2][0].abs() < 1e-15);

        let h = PI / 2.0;
        let oct = realize_triangle(k(1.0), h, h, h).unwrap();
        let expected = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for (p, e) in oct.points().iter().zip(expected) {
            for (a, b) in p.iter().zip(e) {
                assert!((a - b).abs() < 1e-15);
            }
        }

        assert!(matches!(realize_triangle(k(0.0), 1.0, 1.0, 3.0), Err(Error::TriangleInequality { .. })));
        assert!(matches!(realize_triangle(k(1.0), 2.0, 2.0, 2.5), Err(Error::PerimeterBound { .. })));
    }

    #[test]
    fn exp_from_gram_examples() {
        let g = DirectionGram::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let cfg = exp_from_gram(k(0.0), &[1.0, 1.0], &g).unwrap();
        assert_eq!(cfg.dim(), 1);
        assert!((cfg.distance(1, 2).unwrap() - 2.0).abs() < 1e-15);

        let c = -0.5;
        let g = DirectionGram::new(vec![vec![1.0, c, c], vec![c, 1.0, c], vec![c, c, 1.0]]).unwrap();
        let h = PI / 2.0;
        let cfg = exp_from_gram(k(1.0), &[h, h, h], &g).unwrap();
        assert_eq!(cfg.dim(), 2);
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            assert!((cfg.distance(i, j).unwrap() - 2.0 * PI / 3.0).abs() < 1e-14);
        }
        for i in 1..4 {
            assert!((cfg.distance(0, i).unwrap() - h).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_from_gram_rejects_indefinite() {
        let raw = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match canonical_directions(&raw) {
            Err(Error::IndefiniteGram { min_eigenvalue, witness }) => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-12);
                assert_eq!(witness.len(), 2);
            }
            other => panic!("expected indefinite gram, got {other:?}"),
        }
    }

    #[test]
    fn canonical_placement_is_triangular() {
        let g = DirectionGram::new(vec![vec![1.0, 0.3, -0.2], vec![0.3, 1.0, 0.1], vec![-0.2, 0.1, 1.0]]).unwrap();
        let (rank, dirs) = canonical_directions(&g.to_matrix()).unwrap();
        assert_eq!(rank, 3);
        assert!(dirs[0][0] > 0.0 && dirs[0][1].abs() < 1e-15 && dirs[0][2].abs() < 1e-15);
        assert!(dirs[1][1] >= 0.0 && dirs[1][2].abs() < 1e-15);
        assert!(dirs[2][2] >= 0.0);
    }

    fn kappa_strategy() -> impl Strategy<Value = f64> {
        prop_oneof![Just(-1.0), Just(0.0), Just(1.0), -4.0..4.0f64]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn pythagorean_identity(kv in kappa_strategy(), r in 0.0..3.0f64) {
            let kappa = k(kv);
            let (s, c) = kappa_trig(kappa, r);
            let tol = 1e-12 * c.abs().max(1.0).powi(2);
            prop_assert!((c * c + kv * s * s - 1.0).abs() < tol);
        }

        #[test]
        fn geodesic_splits_distance(kv in prop_oneof![Just(-1.0), Just(0.0), Just(1.0)],
                                    r1 in 0.1..1.4f64, r2 in 0.1..1.4f64,
                                    th in 0.1..3.0f64, t in 0.0..1.0f64) {
            let kappa = k(kv);
            let mut cfg = ModelConfig::new(kappa, 2, vec![
                polar_point(kappa, r1, &[1.0, 0.0]),
                polar_point(kappa, r2, &[th.cos(), th.sin()]),
            ]).unwrap();
            let d = cfg.distance(0, 1).unwrap();
            let g = cfg.geodesic_point(0, 1, t).unwrap();
            let m = cfg.push(g).unwrap();
            prop_assert!((cfg.distance(0, m).unwrap() - t * d).abs() < 1e-12);
            prop_assert!((cfg.distance(m, 1).unwrap() - (1.0 - t) * d).abs() < 1e-12);
        }

        #[test]
        fn realize_triangle_round_trip(kv in prop_oneof![Just(-1.0), Just(0.0), Just(1.0)],
                                       a in 0.05..1.0f64, b in 0.05..1.0f64, f in 0.0..1.0f64) {
            let lo = (a - b).abs();
            let c = lo + f * (a + b - lo);
            let cfg = realize_triangle(k(kv), a, b, c).unwrap();
            let d = cfg.distance_matrix();
            prop_assert!((d[0][1] - a).abs() < 1e-12);
            prop_assert!((d[0][2] - b).abs() < 1e-12);
            prop_assert!((d[1][2] - c).abs() < 1e-12);
            prop_assert!(cfg.points()[2][cfg.ambient_dim() - 1] >= 0.0);
        }
    }
}
