//! Packing radii, the Villani quadrilateral inequality, metric transforms and
//! synthetic spaces.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::WeightedStar;
use crate::error::{Error, Result};
use crate::metric::{validate_metric, DiscreteGeodesic, FiniteMetricSpace};
use crate::model_space::{canonical_directions, Kappa, ModelConfig, Regime};
use crate::rigidity::{embed_star, StarEmbedding};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackingMode {
    Exhaustive,
    Heuristic,
    /// Exhaustive up to `tol::EXHAUSTIVE_LIMIT` subsets, heuristic beyond.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingResult {
    pub q: usize,
    /// Half the smallest pairwise distance within `packer`.
    pub radius: f64,
    /// Sorted indices of the chosen points.
    pub packer: Vec<usize>,
    /// True when every q-subset was examined.
    pub is_certified_max: bool,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn min_pairwise(space: &FiniteMetricSpace, set: &[usize]) -> f64 {
    let mut m = f64::INFINITY;
    for (a, &i) in set.iter().enumerate() {
        for &j in &set[a + 1..] {
            m = m.min(space.d(i, j));
        }
    }
    m
}

/// Depth-first search over subsets extending `chosen` in increasing order,
/// keeping the lexicographically first subset with the largest minimum.
fn search(
    space: &FiniteMetricSpace,
    q: usize,
    chosen: &mut Vec<usize>,
    current: f64,
    best: &mut Option<(f64, Vec<usize>)>,
) {
    if chosen.len() == q {
        if best.as_ref().is_none_or(|(b, _)| current > *b) {
            *best = Some((current, chosen.clone()));
        }
        return;
    }
    let n = space.len();
    let next = chosen.last().map_or(0, |&l| l + 1);
    let remaining = q - chosen.len();
    for c in next..=n - remaining {
        let m = chosen.iter().fold(current, |m, &i| m.min(space.d(i, c)));
        if best.as_ref().is_some_and(|(b, _)| m <= *b) {
            continue;
        }
        chosen.push(c);
        search(space, q, chosen, m, best);
        chosen.pop();
    }
}

fn exhaustive(space: &FiniteMetricSpace, q: usize) -> (f64, Vec<usize>) {
    let n = space.len();
    (0..=n - q)
        .into_par_iter()
        .filter_map(|first| {
            let mut best = None;
            search(space, q, &mut vec![first], f64::INFINITY, &mut best);
            best
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("at least one subset")
}

fn heuristic(space: &FiniteMetricSpace, q: usize) -> (f64, Vec<usize>) {
    let n = space.len();
    let mut chosen = Vec::with_capacity(q);
    let (mut a, mut b, mut diam) = (0, 1, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            if space.d(i, j) > diam {
                (a, b, diam) = (i, j, space.d(i, j));
            }
        }
    }
    chosen.extend([a, b]);
    while chosen.len() < q {
        let next = (0..n)
            .filter(|i| !chosen.contains(i))
            .map(|i| (i, chosen.iter().map(|&c| space.d(i, c)).fold(f64::INFINITY, f64::min)))
            .fold((usize::MAX, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        chosen.push(next.0);
    }
    chosen.sort_unstable();
    let mut value = min_pairwise(space, &chosen);
    'improve: loop {
        for slot in 0..q {
            for cand in 0..n {
                if chosen.contains(&cand) {
                    continue;
                }
                let mut trial = chosen.clone();
                trial[slot] = cand;
                trial.sort_unstable();
                let v = min_pairwise(space, &trial);
                if v > value {
                    (chosen, value) = (trial, v);
                    continue 'improve;
                }
            }
        }
        break;
    }
    (value, chosen)
}

/// q-th packing radius: half the largest achievable minimum pairwise distance
/// among q points.
pub fn packing_radius(space: &FiniteMetricSpace, q: usize, mode: PackingMode) -> Result<PackingResult> {
    let n = space.len();
    if q < 2 || q > n {
        return Err(Error::InvalidParameter(format!("q = {q} outside [2, {n}]")));
    }
    let use_exhaustive = match mode {
        PackingMode::Exhaustive => true,
        PackingMode::Heuristic => false,
        PackingMode::Auto => binomial(n, q) <= tol::EXHAUSTIVE_LIMIT,
    };
    let (min, packer) = if use_exhaustive { exhaustive(space, q) } else { heuristic(space, q) };
    Ok(PackingResult { q, radius: 0.5 * min, packer, is_certified_max: use_exhaustive })
}

/// `½ arccos(1/(1−q))`, the largest q-th packing radius under curvature ≥ 1,
/// attained by the regular simplex inscribed in `S^{q−2}`. NaN for `q < 2`.
pub fn packing_bound(q: usize) -> f64 {
    if q < 2 {
        return f64::NAN;
    }
    0.5 * (1.0 / (1.0 - q as f64)).acos()
}

/// Places packer points of a curvature-≥1 space as unit vectors whose Gram
/// matrix is `cos d(x_i, x_j)`, in `S^{r−1}` with `r` the numerical rank.
pub fn embed_packer(space: &FiniteMetricSpace, packer: &[usize]) -> Result<ModelConfig> {
    let m = packer.len();
    if m == 0 {
        return Err(Error::InvalidParameter("empty packer".into()));
    }
    let gram = nalgebra::DMatrix::from_fn(m, m, |a, b| space.distance(packer[a], packer[b]).map_or(f64::NAN, f64::cos));
    if gram.iter().any(|g| g.is_nan()) {
        for &i in packer {
            space.check_index(i)?;
        }
    }
    let (rank, dirs) = canonical_directions(&gram)?;
    let dim = rank.max(1) - 1;
    ModelConfig::new(Kappa::new(1.0)?, dim, dirs)
}

/// The left side minus the right side of the quadrilateral inequality
/// `d(γ_t, η_t)² ≥ (1−t)² d(γ₀,η₀)² + t² d(γ₁,η₁)²
///   + t(1−t)[d(γ₁,η₀)² + d(γ₀,η₁)² − d(γ₀,γ₁)² − d(η₀,η₁)²]`.
///
/// Nonnegative under curvature ≥ 0. `t` is snapped to a sample of each
/// geodesic within `tol`.
pub fn villani_gap(gamma: &DiscreteGeodesic<'_>, eta: &DiscreteGeodesic<'_>, t: f64, tol: f64) -> Result<f64> {
    Ok(villani_terms(gamma, eta, t, tol)?.gap)
}

struct VillaniTerms {
    gamma_t: usize,
    eta_t: usize,
    lhs: f64,
    rhs: f64,
    gap: f64,
}

fn villani_terms(gamma: &DiscreteGeodesic<'_>, eta: &DiscreteGeodesic<'_>, t: f64, tol: f64) -> Result<VillaniTerms> {
    if !std::ptr::eq(gamma.space(), eta.space()) {
        return Err(Error::Geodesic("geodesics live in different spaces".into()));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("t = {t} outside (0, 1)")));
    }
    let space = gamma.space();
    let gamma_t = gamma.sample_at(t, tol).ok_or(Error::ParameterNotSampled { t })?;
    let eta_t = eta.sample_at(t, tol).ok_or(Error::ParameterNotSampled { t })?;
    let sq = |i, j| space.d(i, j).powi(2);
    let (g0, g1, e0, e1) = (gamma.start(), gamma.end(), eta.start(), eta.end());
    let lhs = sq(gamma_t, eta_t);
    let rhs = (1.0 - t).powi(2) * sq(g0, e0)
        + t * t * sq(g1, e1)
        + t * (1.0 - t) * (sq(g1, e0) + sq(g0, e1) - sq(g0, g1) - sq(e0, e1));
    Ok(VillaniTerms { gamma_t, eta_t, lhs, rhs, gap: lhs - rhs })
}

/// Quadrilateral inequality together with the flatness test at equality.
#[derive(Debug, Clone, Serialize)]
pub struct VillaniReport {
    pub t: f64,
    pub gamma_t: usize,
    pub eta_t: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// Equality within `tol_gap` times the largest squared distance involved.
    pub equality: bool,
    /// A sampled point within tolerance of the midpoint of `γ_t` and `η_t`.
    pub midpoint: Option<usize>,
    /// Embedding of the star at the midpoint over `γ₀, η₀, γ₁, η₁` with
    /// weights `1−t, 1−t, t, t`, attempted at equality when a midpoint exists.
    pub flatness: Option<StarEmbedding>,
    pub flatness_error: Option<String>,
}

/// [`villani_gap`] plus, at equality with a sampled midpoint, the Euclidean
/// embedding of the four endpoints seen from that midpoint.
pub fn villani_flatness(
    gamma: &DiscreteGeodesic<'_>,
    eta: &DiscreteGeodesic<'_>,
    t: f64,
    tol: f64,
    tol_gap: f64,
) -> Result<VillaniReport> {
    let v = villani_terms(gamma, eta, t, tol)?;
    let space = gamma.space();
    let ends = [gamma.start(), eta.start(), gamma.end(), eta.end()];
    let scale = ends
        .iter()
        .flat_map(|&i| ends.iter().map(move |&j| space.d(i, j)))
        .fold(0.0, f64::max)
        .powi(2);
    let equality = v.gap.abs() <= tol_gap * scale.max(f64::MIN_POSITIVE);
    let half = 0.5 * space.d(v.gamma_t, v.eta_t);
    let slack = tol * space.diameter();
    let midpoint = (0..space.len())
        .map(|m| (m, (space.d(m, v.gamma_t) - half).abs().max((space.d(m, v.eta_t) - half).abs())))
        .filter(|(_, e)| *e <= slack)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(m, _)| m);
    let (mut flatness, mut flatness_error) = (None, None);
    if let (true, Some(p)) = (equality, midpoint) {
        let attempt = WeightedStar::new(space, p, ends.to_vec(), vec![1.0 - t, 1.0 - t, t, t])
            .and_then(|star| embed_star(Kappa::FLAT, &star, None));
        match attempt {
            Ok(e) => flatness = Some(e),
            Err(e) => flatness_error = Some(e.to_string()),
        }
    }
    Ok(VillaniReport {
        t,
        gamma_t: v.gamma_t,
        eta_t: v.eta_t,
        lhs: v.lhs,
        rhs: v.rhs,
        gap: v.gap,
        equality,
        midpoint,
        flatness,
        flatness_error,
    })
}

/// The profile `φ_κ` of [`metric_transform`], with `φ_κ(0) = 0`.
pub fn transform_profile(kappa: Kappa, alpha: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let q = kappa.scale();
    match kappa.regime() {
        Regime::Flat => t.powf(alpha),
        Regime::Elliptic => {
            // arccos(1 − v) = 2 arcsin(√(v/2))
            let v = 0.5 * (q * t.powf(2.0 * alpha)).min(1.0);
            2.0 * (0.5 * v).sqrt().asin() / q
        }
        Regime::Hyperbolic => {
            // arcosh(1 + u) = ln(1 + u + √(u(u + 2)))
            let u = 0.5 * q * t.powf(2.0 * alpha);
            (u + (u * (u + 2.0)).sqrt()).ln_1p() / q
        }
    }
}

/// Applies `φ_κ` entrywise; the result has curvature ≥ κ for every
/// `α ∈ [0, ½]`.
pub fn metric_transform(space: &FiniteMetricSpace, kappa: Kappa, alpha: f64) -> Result<FiniteMetricSpace> {
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1/2]")));
    }
    let raw: Vec<Vec<f64>> = space
        .rows()
        .into_iter()
        .map(|row| row.into_iter().map(|t| transform_profile(kappa, alpha, t)).collect())
        .collect();
    Ok(validate_metric(&raw, Some(space.labels().to_vec()))?)
}

/// Synthetic spaces. Model samples also return their coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Uniform points of the sphere `S^dim` of curvature κ > 0.
    Sphere { n: usize, dim: usize, kappa: f64 },
    /// Uniform points of the cube `[-1, 1]^dim`.
    Euclidean { n: usize, dim: usize },
    /// Points of `H^dim` of curvature κ < 0 in a ball around the base point,
    /// with unit-hyperboloid radial coordinate uniform in `[0, 2]`.
    Hyperbolic { n: usize, dim: usize, kappa: f64 },
    /// Center (index 0) joined to three tips by segments of the given lengths.
    Tripod { legs: [f64; 3] },
    /// Center (index 0) joined to `k` tips by unit segments.
    Star { k: usize },
    /// `q` points of the unit sphere pairwise `arccos(1/(1−q))` apart.
    SimplexOnSphere { q: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct Generated {
    pub space: FiniteMetricSpace,
    pub config: Option<ModelConfig>,
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn from_config(config: ModelConfig) -> Result<Generated> {
    let space = validate_metric(&config.distance_matrix(), None)?;
    Ok(Generated { space, config: Some(config) })
}

fn star_metric(legs: &[f64]) -> Result<Generated> {
    let n = legs.len() + 1;
    let mut raw = vec![vec![0.0; n]; n];
    for i in 1..n {
        raw[0][i] = legs[i - 1];
        raw[i][0] = legs[i - 1];
        for j in 1..n {
            if i != j {
                raw[i][j] = legs[i - 1] + legs[j - 1];
            }
        }
    }
    Ok(Generated { space: validate_metric(&raw, None)?, config: None })
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be positive")));
    }
    Ok(())
}

/// Builds a synthetic space; deterministic for a fixed seed.
pub fn generate(kind: &GeneratorKind, seed: u64) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *kind {
        GeneratorKind::Sphere { n, dim, kappa } => {
            positive("n", n)?;
            positive("dim", dim)?;
            let kappa = Kappa::new(kappa)?;
            if kappa.regime() != Regime::Elliptic {
                return Err(Error::InvalidParameter(format!("sphere needs κ > 0, got {}", kappa.value())));
            }
            let radius = 1.0 / kappa.scale();
            let points = (0..n).map(|_| unit_vector(&mut rng, dim + 1).into_iter().map(|x| radius * x).collect()).collect();
            from_config(ModelConfig::new(kappa, dim, points)?)
        }
        GeneratorKind::Euclidean { n, dim } => {
            positive("n", n)?;
            positive("dim", dim)?;
            let points = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
            from_config(ModelConfig::new(Kappa::FLAT, dim, points)?)
        }
        GeneratorKind::Hyperbolic { n, dim, kappa } => {
            positive("n", n)?;
            positive("dim", dim)?;
            let kappa = Kappa::new(kappa)?;
            if kappa.regime() != Regime::Hyperbolic {
                return Err(Error::InvalidParameter(format!("hyperbolic space needs κ < 0, got {}", kappa.value())));
            }
            let points = (0..n)
                .map(|_| {
                    let rho: f64 = rng.random_range(0.0..=2.0);
                    let u = unit_vector(&mut rng, dim);
                    std::iter::once(rho.cosh()).chain(u.into_iter().map(|x| rho.sinh() * x)).collect()
                })
                .collect();
            from_config(ModelConfig::new(kappa, dim, points)?)
        }
        GeneratorKind::Tripod { legs } => {
            if legs.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(Error::InvalidParameter(format!("leg lengths must be positive: {legs:?}")));
            }
            star_metric(&legs)
        }
        GeneratorKind::Star { k } => {
            positive("k", k)?;
            star_metric(&vec![1.0; k])
        }
        GeneratorKind::SimplexOnSphere { q } => {
            if q < 2 {
                return Err(Error::InvalidParameter(format!("q = {q} must be at least 2")));
            }
            let c = 1.0 / (1.0 - q as f64);
            let gram = nalgebra::DMatrix::from_fn(q, q, |i, j| if i == j { 1.0 } else { c });
            let (rank, mut dirs) = canonical_directions(&gram)?;
            // two antipodal points are placed on a circle rather than S⁰
            let ambient = rank.max(2);
            dirs.iter_mut().for_each(|v| v.resize(ambient, 0.0));
            let config = ModelConfig::new(Kappa::new(1.0)?, ambient - 1, dirs)?;
            let angle = c.acos();
            let raw: Vec<Vec<f64>> = (0..q).map(|i| (0..q).map(|j| if i == j { 0.0 } else { angle }).collect()).collect();
            Ok(Generated { space: validate_metric(&raw, None)?, config: Some(config) })
        }
    }
}
