//! Exhaustive quadruple sweeps and bisection for the largest certified κ.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::model_space::{angle_from_sides, Kappa};

/// Verdict of a quadruple sweep at one κ.
///
/// A passing report means the quadruple condition holds on the given data;
/// it says nothing about whether the data extends to a length space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub kappa: Kappa,
    pub passed: bool,
    pub tol_defect: f64,
    /// Smallest defect over all evaluated quadruples; `None` when nothing was evaluated.
    pub worst_defect: Option<f64>,
    /// `[x, y, z, w]` with `y < z < w`, lexicographically least among those
    /// attaining `worst_defect`.
    pub witness: Option<[usize; 4]>,
    pub quadruples_checked: u64,
    /// κ > 0 quadruples at or beyond the size bound.
    pub undefined_skipped: u64,
}

impl CertReport {
    /// True when every quadruple was skipped or there were none.
    pub fn is_vacuous(&self) -> bool {
        self.quadruples_checked == 0
    }
}

#[derive(Clone, Copy)]
struct Worst {
    defect: f64,
    witness: [usize; 4],
}

impl Worst {
    fn better(a: Option<Worst>, b: Option<Worst>) -> Option<Worst> {
        match (a, b) {
            (Some(a), Some(b)) => {
                if b.defect < a.defect || (b.defect == a.defect && b.witness < a.witness) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
            (a, None) => a,
            (None, b) => b,
        }
    }
}

/// Comparison angles `∠̃_κ(x; y, z)` for all ordered triples, NaN where
/// undefined or degenerate.
struct AngleTable {
    n: usize,
    angles: Vec<f64>,
}

impl AngleTable {
    fn new(kappa: Kappa, space: &FiniteMetricSpace) -> Result<Self> {
        let n = space.len();
        let mut angles = vec![f64::NAN; n * n * n];
        angles.par_chunks_mut(n * n).enumerate().try_for_each(|(x, block)| -> Result<()> {
            for y in 0..n {
                for z in y + 1..n {
                    let (b, c) = (space.d(x, y), space.d(x, z));
                    if x == y || x == z || b <= 0.0 || c <= 0.0 {
                        continue;
                    }
                    if let Some(a) = angle_from_sides(kappa, b, c, space.d(y, z))? {
                        block[y * n + z] = a;
                        block[z * n + y] = a;
                    }
                }
            }
            Ok(())
        })?;
        Ok(AngleTable { n, angles })
    }

    fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.angles[(x * self.n + y) * self.n + z]
    }
}

/// Sweeps `quadruple_defect` over every `x` and every 3-subset `{y, z, w}`
/// of the remaining points.
///
/// Passes vacuously with zero checks when `n < 4`. For κ > 0, quadruples
/// whose size reaches `2π/√κ` are counted in `undefined_skipped`.
pub fn certify_kappa(space: &FiniteMetricSpace, kappa: Kappa, tol_defect: f64) -> Result<CertReport> {
    if !(tol_defect.is_finite() && tol_defect >= 0.0) {
        return Err(Error::InvalidParameter(format!("tol_defect must be nonnegative, got {tol_defect}")));
    }
    let n = space.len();
    if n < 4 {
        return Ok(CertReport {
            kappa,
            passed: true,
            tol_defect,
            worst_defect: None,
            witness: None,
            quadruples_checked: 0,
            undefined_skipped: 0,
        });
    }
    let table = AngleTable::new(kappa, space)?;
    let bound = kappa.perimeter_bound();
    let d = |i, j| space.d(i, j);
    let (checked, skipped, worst) = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut checked = 0u64;
            let mut skipped = 0u64;
            let mut worst: Option<Worst> = None;
            let rest: Vec<usize> = (0..n).filter(|&i| i != x).collect();
            for (a, &y) in rest.iter().enumerate() {
                for (b, &z) in rest.iter().enumerate().skip(a + 1) {
                    for &w in &rest[b + 1..] {
                        if bound.is_finite() {
                            let size = [
                                d(x, y) + d(y, z) + d(z, x),
                                d(x, z) + d(z, w) + d(w, x),
                                d(x, w) + d(w, y) + d(y, x),
                                d(y, z) + d(z, w) + d(w, y),
                            ]
                            .into_iter()
                            .fold(0.0, f64::max);
                            if size >= bound {
                                skipped += 1;
                                continue;
                            }
                        }
                        let angles = [table.get(x, y, z), table.get(x, z, w), table.get(x, w, y)];
                        if angles.iter().any(|a| a.is_nan()) {
                            // coincident points carry no angle; validated spaces have none
                            skipped += 1;
                            continue;
                        }
                        checked += 1;
                        let defect = 2.0 * PI - (angles[0] + angles[1] + angles[2]);
                        worst = Worst::better(worst, Some(Worst { defect, witness: [x, y, z, w] }));
                    }
                }
            }
            (checked, skipped, worst)
        })
        .reduce(|| (0, 0, None), |a, b| (a.0 + b.0, a.1 + b.1, Worst::better(a.2, b.2)));
    Ok(CertReport {
        kappa,
        passed: worst.is_none_or(|w| w.defect >= -tol_defect),
        tol_defect,
        worst_defect: worst.map(|w| w.defect),
        witness: worst.map(|w| w.witness),
        quadruples_checked: checked,
        undefined_skipped: skipped,
    })
}

/// Outcome of the largest-κ search.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MaxKappa {
    /// The sweep passes at `passing` and fails at `failing`, which are at
    /// most `precision` apart; `kappa` is their midpoint.
    Bounded {
        kappa: f64,
        passing: f64,
        failing: f64,
        witness: [usize; 4],
        worst_defect: f64,
    },
    /// Passes right up to the κ where every quadruple exceeds the size bound;
    /// above it the condition is vacuous.
    VacuityLimited { kappa: f64 },
    /// Passes at the caller's ceiling, which lies below the vacuity threshold.
    Unbounded { ceiling: f64 },
    /// Fails already at the bottom of the search range.
    NoLowerBound {
        kappa_lo: f64,
        witness: [usize; 4],
        worst_defect: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxKappaReport {
    #[serde(flatten)]
    pub outcome: MaxKappa,
    pub precision: f64,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    /// `(2π / min size)²`, above which no quadruple is constrained.
    pub vacuity_threshold: f64,
    pub evaluations: usize,
}

impl MaxKappaReport {
    /// The supremum estimate when the search located one.
    pub fn estimate(&self) -> Option<f64> {
        match self.outcome {
            MaxKappa::Bounded { kappa, .. } | MaxKappa::VacuityLimited { kappa } => Some(kappa),
            _ => None,
        }
    }
}

/// Default bottom of the search range, `−(10 / min positive distance)²`.
pub fn default_kappa_lo(space: &FiniteMetricSpace) -> f64 {
    let m = space.min_positive_distance().unwrap_or(1.0);
    -(10.0 / m).powi(2)
}

/// Default ceiling, `4 (2π / diam)²`.
pub fn default_kappa_hi(space: &FiniteMetricSpace) -> f64 {
    let diam = space.diameter();
    if diam > 0.0 {
        4.0 * (2.0 * PI / diam).powi(2)
    } else {
        1.0
    }
}

/// `(2π / s)²` for the smallest quadruple size `s`.
pub fn vacuity_threshold(space: &FiniteMetricSpace) -> f64 {
    let n = space.len();
    let d = |i, j| space.d(i, j);
    let min_size = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut best = f64::INFINITY;
            for y in x + 1..n {
                for z in y + 1..n {
                    for w in z + 1..n {
                        let size = [
                            d(x, y) + d(y, z) + d(z, x),
                            d(x, z) + d(z, w) + d(w, x),
                            d(x, w) + d(w, y) + d(y, x),
                            d(y, z) + d(z, w) + d(w, y),
                        ]
                        .into_iter()
                        .fold(0.0, f64::max);
                        best = best.min(size);
                    }
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    (2.0 * PI / min_size).powi(2)
}

/// Bisection on κ ↦ `certify_kappa(space, κ).passed`.
///
/// Comparison angles increase with κ, so the defect of every quadruple below
/// the size bound decreases with κ. The predicate is therefore monotone
/// except where a failing quadruple leaves the constrained range, which can
/// only happen for κ > 0; the search ceiling is capped at the vacuity
/// threshold for that reason.
pub fn max_kappa(
    space: &FiniteMetricSpace,
    precision: f64,
    kappa_lo: Option<f64>,
    kappa_hi: Option<f64>,
    tol_defect: f64,
) -> Result<MaxKappaReport> {
    if space.len() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 points, got {}", space.len())));
    }
    if !(precision.is_finite() && precision > 0.0) {
        return Err(Error::InvalidParameter(format!("precision must be positive, got {precision}")));
    }
    let lo = kappa_lo.unwrap_or_else(|| default_kappa_lo(space));
    let hi = kappa_hi.unwrap_or_else(|| default_kappa_hi(space));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("search range [{lo}, {hi}] is empty")));
    }
    let vacuity = vacuity_threshold(space);
    let mut evaluations = 0;
    let mut run = |k: f64| {
        evaluations += 1;
        certify_kappa(space, Kappa::new(k)?, tol_defect)
    };

    let bottom = run(lo)?;
    let report = |outcome, evaluations| MaxKappaReport {
        outcome,
        precision,
        kappa_lo: lo,
        kappa_hi: hi,
        vacuity_threshold: vacuity,
        evaluations,
    };
    if !bottom.passed {
        let outcome = MaxKappa::NoLowerBound {
            kappa_lo: lo,
            witness: bottom.witness.expect("failing report has a witness"),
            worst_defect: bottom.worst_defect.expect("failing report has a defect"),
        };
        return Ok(report(outcome, evaluations));
    }
    let capped = hi >= vacuity;
    let mut top = if capped { (vacuity - 0.5 * precision).max(lo) } else { hi };
    let top_report = run(top)?;
    if top_report.passed {
        let outcome = if capped { MaxKappa::VacuityLimited { kappa: vacuity } } else { MaxKappa::Unbounded { ceiling: hi } };
        return Ok(report(outcome, evaluations));
    }
    let mut failing = top_report;
    let mut passing = lo;
    while top - passing > precision {
        let mid = 0.5 * (passing + top);
        let r = run(mid)?;
        if r.passed {
            passing = mid;
        } else {
            top = mid;
            failing = r;
        }
    }
    let outcome = MaxKappa::Bounded {
        kappa: 0.5 * (passing + top),
        passing,
        failing: top,
        witness: failing.witness.expect("failing report has a witness"),
        worst_defect: failing.worst_defect.expect("failing report has a defect"),
    };
    Ok(report(outcome, evaluations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::quadruple_defect;
    use crate::metric::validate_metric;
    use rand::{RngExt, SeedableRng};

    fn k(v: f64) -> Kappa {
        Kappa::new(v).unwrap()
    }

    fn space(raw: Vec<Vec<f64>>) -> FiniteMetricSpace {
        validate_metric(&raw, None).unwrap()
    }

    fn tripod() -> FiniteMetricSpace {
        space(vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0, 2.0],
            vec![1.0, 2.0, 0.0, 2.0],
            vec![1.0, 2.0, 2.0, 0.0],
        ])
    }

    fn pole_equator() -> FiniteMetricSpace {
        let (h, t) = (PI / 2.0, 2.0 * PI / 3.0);
        space(vec![vec![0.0, h, h, h], vec![h, 0.0, t, t], vec![h, t, 0.0, t], vec![h, t, t, 0.0]])
    }

    #[allow(clippy::needless_range_loop)]
    fn random_space(n: usize, seed: u64) -> FiniteMetricSpace {
        // shortest paths over random positive weights give a metric with no structure
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.random_range(0.5..2.0);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][m] + d[m][j] < d[i][j] {
                        d[i][j] = d[i][m] + d[m][j];
                    }
                }
            }
        }
        space(d)
    }

    /// Direct loop over `quadruple_defect`, independent of the angle table.
    fn brute_force(s: &FiniteMetricSpace, kappa: Kappa) -> (Option<f64>, u64, u64) {
        let n = s.len();
        let bound = kappa.perimeter_bound();
        let mut worst: Option<f64> = None;
        let (mut checked, mut skipped) = (0, 0);
        for x in 0..n {
            for y in 0..n {
                for z in y + 1..n {
                    for w in z + 1..n {
                        if [y, z, w].contains(&x) {
                            continue;
                        }
                        let (_, size) = crate::metric::perimeter_and_size(s, x, y, z, w).unwrap();
                        if size >= bound {
                            skipped += 1;
                            continue;
                        }
                        checked += 1;
                        let dft = quadruple_defect(kappa, s, x, y, z, w).unwrap();
                        worst = Some(worst.map_or(dft, |m: f64| m.min(dft)));
                    }
                }
            }
        }
        (worst, checked, skipped)
    }

    #[test]
    fn tripod_fails_everywhere() {
        for kv in [-1.0, 0.0, 1.0] {
            let r = certify_kappa(&tripod(), k(kv), 1e-9).unwrap();
            assert!(!r.passed);
            assert_eq!(r.witness, Some([0, 1, 2, 3]));
            assert!(r.worst_defect.unwrap() <= -3.0);
            if kv <= 0.0 {
                assert!((r.worst_defect.unwrap() + PI).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_spaces_pass_vacuously() {
        let s = space(vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        let r = certify_kappa(&s, k(5.0), 1e-9).unwrap();
        assert!(r.passed && r.is_vacuous() && r.witness.is_none());
    }

    #[test]
    fn counts_match_brute_force() {
        for seed in 0..5 {
            let s = random_space(7, seed);
            for kv in [-1.0, 0.0, 1.0, 3.0] {
                let r = certify_kappa(&s, k(kv), 1e-9).unwrap();
                let (worst, checked, skipped) = brute_force(&s, k(kv));
                assert_eq!(r.quadruples_checked, checked);
                assert_eq!(r.undefined_skipped, skipped);
                assert_eq!(r.quadruples_checked + r.undefined_skipped, 7 * 20);
                match (r.worst_defect, worst) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                    (None, None) => {}
                    other => panic!("{other:?}"),
                }
            }
        }
    }

    #[test]
    fn witness_attains_worst_defect() {
        let s = random_space(8, 42);
        let r = certify_kappa(&s, k(0.0), 1e-9).unwrap();
        let [x, y, z, w] = r.witness.unwrap();
        assert!(y < z && z < w);
        let d = quadruple_defect(k(0.0), &s, x, y, z, w).unwrap();
        assert!((d - r.worst_defect.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn independent_of_thread_count() {
        let s = random_space(12, 3);
        let reports: Vec<CertReport> = [1, 2, 4]
            .iter()
            .map(|&t| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
                pool.install(|| certify_kappa(&s, k(0.0), 1e-9).unwrap())
            })
            .collect();
        assert!(reports.windows(2).all(|w| w[0] == w[1]));
    }

    fn scaled(s: &FiniteMetricSpace, c: f64) -> FiniteMetricSpace {
        space(s.rows().into_iter().map(|r| r.into_iter().map(|v| c * v).collect()).collect())
    }

    #[test]
    fn monotone_in_kappa() {
        // diameters stay below 2π/(3√2) so no quadruple is skipped on the grid
        let grid = [-4.0, -1.0, -0.25, 0.0, 0.25, 1.0, 2.0];
        for seed in 0..50 {
            let s = random_space(6, 100 + seed);
            let s = scaled(&s, 1.4 / s.diameter());
            let reports: Vec<CertReport> = grid.iter().map(|&kv| certify_kappa(&s, k(kv), 1e-9).unwrap()).collect();
            assert!(reports.iter().all(|r| r.undefined_skipped == 0));
            let passed: Vec<bool> = reports.iter().map(|r| r.passed).collect();
            for i in 1..passed.len() {
                assert!(!passed[i] || passed[i - 1], "seed {seed}: {passed:?}");
            }
        }
    }

    #[test]
    fn pole_equator_max_kappa() {
        let r = max_kappa(&pole_equator(), 1e-8, None, None, 1e-9).unwrap();
        assert!((r.estimate().unwrap() - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn tripod_has_no_lower_bound() {
        let r = max_kappa(&tripod(), 1e-6, None, None, 1e-9).unwrap();
        assert!(matches!(r.outcome, MaxKappa::NoLowerBound { witness: [0, 1, 2, 3], .. }));
        assert!(r.estimate().is_none());
    }

    #[test]
    fn low_ceiling_gives_unbounded() {
        let r = max_kappa(&pole_equator(), 1e-6, None, Some(0.5), 1e-9).unwrap();
        assert_eq!(r.outcome, MaxKappa::Unbounded { ceiling: 0.5 });
    }

    #[test]
    fn bisection_brackets_the_threshold() {
        // a spherical quadrilateral of small size so that failure occurs well
        // below the vacuity threshold: four points of a circle of radius 0.3
        // in the plane, certified at κ > 0 until the angle sum at any point
        // exceeds 2π
        let pts: Vec<(f64, f64)> = (0..5).map(|i| {
            let t = i as f64 * 2.0 * PI / 5.0;
            (0.3 * t.cos(), 0.3 * t.sin())
        }).chain([(0.0, 0.0)]).collect();
        let s = space(pts.iter().map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect()).collect());
        let r = max_kappa(&s, 1e-7, None, None, 1e-9).unwrap();
        if let MaxKappa::Bounded { passing, failing, .. } = r.outcome {
            assert!(failing - passing <= 1e-7);
            assert!(certify_kappa(&s, k(passing), 1e-9).unwrap().passed);
            assert!(!certify_kappa(&s, k(failing), 1e-9).unwrap().passed);
            // planar data with the centre in every triangle's interior is sharp at 0
            assert!(r.estimate().unwrap().abs() < 1e-6);
        } else {
            panic!("{r:?}");
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(certify_kappa(&tripod(), k(0.0), -1.0).is_err());
        assert!(max_kappa(&tripod(), 0.0, None, None, 1e-9).is_err());
        assert!(max_kappa(&tripod(), 1e-6, Some(1.0), Some(0.0), 1e-9).is_err());
    }
}
