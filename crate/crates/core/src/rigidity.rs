//! Equality cases of the comparison inequalities and their realization in
//! the model space.
//!
//! Every realization returns its distance residuals alongside the
//! configuration. Finite data can satisfy the hypotheses without coming from
//! a length space, so residuals are diagnostics rather than assertions.

use std::f64::consts::PI;

use serde::Serialize;

use crate::comparison::{comparison_angle, direction_gram, lss_form, DirectionGram, WeightedStar};
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::model_space::{exp_from_gram, pole, polar_point, realize_triangle, Kappa, ModelConfig};
use crate::tol;

/// `residual[a][b] = d_model(a, b) − d(indices[a], indices[b])`.
fn residuals(space: &FiniteMetricSpace, config: &ModelConfig, indices: &[usize]) -> Result<(Vec<Vec<f64>>, f64)> {
    let m = indices.len();
    let mut r = vec![vec![0.0; m]; m];
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            let v = config.distance(a, b)? - space.d(indices[a], indices[b]);
            r[a][b] = v;
            r[b][a] = v;
            worst = worst.max(v.abs());
        }
    }
    Ok((r, worst))
}

/// A zero-LSS star placed in `M^r_κ`.
#[derive(Debug, Clone, Serialize)]
pub struct StarEmbedding {
    /// Element 0 is the base point, element `i + 1` is `points[i]`.
    pub config: ModelConfig,
    /// Space indices of the configuration elements.
    pub indices: Vec<usize>,
    pub residuals: Vec<Vec<f64>>,
    pub max_residual: f64,
    pub lss: f64,
    pub tol_zero: f64,
    pub gram: DirectionGram,
}

/// Default equality tolerance `1e-8 · (Σ λ_i d(p, x_i))²`.
pub fn default_tol_zero(star: &WeightedStar<'_>) -> f64 {
    tol::ZERO_REL * star.scale()
}

/// Embeds a star whose LSS form vanishes.
///
/// The comparison angles at `p` are realized as tangent directions at the
/// pole and each `x_i` is placed at distance `d(p, x_i)` along its
/// direction. `tol_zero` defaults to [`default_tol_zero`].
pub fn embed_star(kappa: Kappa, star: &WeightedStar<'_>, tol_zero: Option<f64>) -> Result<StarEmbedding> {
    let tol_zero = tol_zero.unwrap_or_else(|| default_tol_zero(star));
    if star.points().is_empty() {
        return Err(Error::InvalidParameter("star has no points".into()));
    }
    let lss = lss_form(kappa, star)?;
    if !(lss.abs() <= tol_zero) {
        return Err(Error::NotEqualityCase { lss, tol: tol_zero });
    }
    let space = star.space();
    let gram = direction_gram(kappa, space, star.p(), star.points())?;
    let config = exp_from_gram(kappa, &star.radii(), &gram)?;
    let indices: Vec<usize> = std::iter::once(star.p()).chain(star.points().iter().copied()).collect();
    let (residuals, max_residual) = residuals(space, &config, &indices)?;
    Ok(StarEmbedding { config, indices, residuals, max_residual, lss, tol_zero, gram })
}

/// A quadruple with zero defect placed in `M²_κ`.
#[derive(Debug, Clone, Serialize)]
pub struct FlatRealization {
    /// Elements in the order `x, y, z, w`.
    pub config: ModelConfig,
    pub indices: [usize; 4],
    /// `∠̃(x; y, z)`, `∠̃(x; z, w)`, `∠̃(x; w, y)`.
    pub angles: [f64; 3],
    pub defect: f64,
    pub residuals: Vec<Vec<f64>>,
    pub max_residual: f64,
    /// Whether the image of `x` lies in the closed triangle spanned by the others.
    pub contains_base: bool,
    /// `max_residual ≤ tol · scale`, with scale the largest of the six distances.
    pub consistent: bool,
}

/// Realizes a quadruple whose defect at `x` vanishes within `tol`.
///
/// The image of `x` sits at the pole with `y`, `z`, `w` along directions at
/// angles `0`, `θ₁` and `θ₁ + θ₂`, which fixes the triangle around it. The
/// betweenness hypothesis is checked with slack `tol` times the largest of
/// the six distances.
pub fn realize_flat_quadruple(
    kappa: Kappa,
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
    tol: f64,
) -> Result<FlatRealization> {
    let idx = [x, y, z, w];
    for (a, &i) in idx.iter().enumerate() {
        space.check_index(i)?;
        if idx[..a].contains(&i) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be nonnegative, got {tol}")));
    }
    let d = |i, j| space.d(i, j);
    let mut angles = [0.0; 3];
    for (slot, (a, b)) in [(y, z), (z, w), (w, y)].into_iter().enumerate() {
        angles[slot] = comparison_angle(kappa, space, x, a, b)?.ok_or(Error::UndefinedAngle {
            perimeter: d(x, a) + d(a, b) + d(b, x),
            bound: kappa.perimeter_bound(),
        })?;
    }
    let defect = 2.0 * PI - angles.iter().sum::<f64>();
    if !(defect.abs() <= tol) {
        return Err(Error::NotFlat { defect, tol });
    }
    let scale = idx
        .iter()
        .flat_map(|&i| idx.iter().map(move |&j| d(i, j)))
        .fold(0.0, f64::max);
    for (a, b) in [(y, z), (z, w), (w, y)] {
        let slack = d(a, x) + d(x, b) - d(a, b);
        if slack <= tol * scale {
            return Err(Error::Betweenness { a, b, slack });
        }
    }
    let (t1, t12) = (angles[0], angles[0] + angles[1]);
    let points = vec![
        pole(kappa, 2),
        polar_point(kappa, d(x, y), &[1.0, 0.0]),
        polar_point(kappa, d(x, z), &[t1.cos(), t1.sin()]),
        polar_point(kappa, d(x, w), &[t12.cos(), t12.sin()]),
    ];
    let config = ModelConfig::new(kappa, 2, points)?;
    let (residuals, max_residual) = residuals(space, &config, &idx)?;
    let widest_gap = angles[0].max(angles[1]).max(2.0 * PI - t12);
    Ok(FlatRealization {
        config,
        indices: idx,
        angles,
        defect,
        residuals,
        max_residual,
        contains_base: widest_gap <= PI + tol,
        consistent: max_residual <= tol * scale,
    })
}

/// Result of comparing `d(x, w)` with its model counterpart.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonGap {
    /// `d(x, w) − d(x̃, w̃)`.
    pub gap: f64,
    pub model_distance: f64,
    /// Position of `w` along `[y, z]` as a fraction of `d(y, z)`.
    pub t: f64,
    /// Elements in the order `ỹ, z̃, x̃, w̃`.
    pub config: ModelConfig,
}

/// `d(x, w) − d(x̃, w̃)` where `x̃ỹz̃` is the comparison triangle and `w̃`
/// divides `[ỹ, z̃]` in the same ratio as `w` divides `[y, z]`.
///
/// Curvature ≥ κ makes this nonnegative.
pub fn comparison_gap(
    kappa: Kappa,
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
    tol_between: f64,
) -> Result<f64> {
    comparison_gap_detail(kappa, space, x, y, z, w, tol_between).map(|g| g.gap)
}

/// [`comparison_gap`] together with the model configuration.
pub fn comparison_gap_detail(
    kappa: Kappa,
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
    tol_between: f64,
) -> Result<ComparisonGap> {
    for i in [x, y, z, w] {
        space.check_index(i)?;
    }
    let d = |i, j| space.d(i, j);
    if d(y, z) <= 0.0 {
        return Err(Error::ZeroSide(y, z));
    }
    let excess = (d(y, w) + d(w, z) - d(y, z)).abs();
    if !(excess <= tol_between) {
        return Err(Error::NotBetween { excess });
    }
    let mut config = realize_triangle(kappa, d(y, z), d(y, x), d(z, x))?;
    let t = (d(y, w) / d(y, z)).clamp(0.0, 1.0);
    let w_model = config.geodesic_point(0, 1, t)?;
    let iw = config.push(w_model)?;
    let model_distance = config.distance(2, iw)?;
    Ok(ComparisonGap { gap: d(x, w) - model_distance, model_distance, t, config })
}
