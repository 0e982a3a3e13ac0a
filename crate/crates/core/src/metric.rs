//! Finite metric spaces stored as validated distance matrices.

use serde::{Serialize, Serializer};

use crate::error::{Error, MetricError, Result, Violation};
use crate::tol;

/// Triangle violations listed individually before only the total is counted.
const MAX_TRIANGLE_WITNESSES: usize = 100;

/// A labelled `n × n` distance matrix satisfying the metric axioms up to the
/// relative tolerance it was validated with.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    n: usize,
    d: Vec<f64>,
}

impl FiniteMetricSpace {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distance between points `i` and `j`. Panics on out-of-range indices.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "index out of range");
        self.d[i * self.n + j]
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.d[i * self.n + j])
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.n })
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_positive_distance(&self) -> Option<f64> {
        self.d.iter().copied().filter(|&x| x > 0.0).min_by(f64::total_cmp)
    }

    /// Induced subspace on `indices`, in the given order.
    pub fn restrict(&self, indices: &[usize]) -> Result<FiniteMetricSpace> {
        for (pos, &i) in indices.iter().enumerate() {
            self.check_index(i)?;
            if indices[..pos].contains(&i) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        let m = indices.len();
        let mut d = Vec::with_capacity(m * m);
        for &i in indices {
            d.extend(indices.iter().map(|&j| self.d(i, j)));
        }
        Ok(FiniteMetricSpace {
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            n: m,
            d,
        })
    }
}

impl Serialize for FiniteMetricSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            labels: &'a [String],
            d: Vec<Vec<f64>>,
        }
        Doc { labels: &self.labels, d: self.rows() }.serialize(serializer)
    }
}

/// Validates a raw matrix with the default relative tolerance.
pub fn validate_metric(raw: &[Vec<f64>], labels: Option<Vec<String>>) -> Result<FiniteMetricSpace, MetricError> {
    validate_metric_with(raw, labels, tol::METRIC_REL)
}

/// Checks the metric axioms up to `tol_rel × max entry`.
///
/// Asymmetries and diagonal entries within the tolerance are repaired
/// (averaged, zeroed); anything beyond it is reported. Distinct points at
/// distance zero are rejected, never merged.
pub fn validate_metric_with(
    raw: &[Vec<f64>],
    labels: Option<Vec<String>>,
    tol_rel: f64,
) -> Result<FiniteMetricSpace, MetricError> {
    let n = raw.len();
    let fail = |violations: Vec<Violation>, triangle_total| Err(MetricError { violations, triangle_total });

    let shape: Vec<Violation> = raw
        .iter()
        .enumerate()
        .filter(|(_, row)| row.len() != n)
        .map(|(row, r)| Violation::NotSquare { row, columns: r.len(), expected: n })
        .collect();
    if !shape.is_empty() {
        return fail(shape, 0);
    }

    let mut violations = Vec::new();
    if let Some(l) = &labels {
        if l.len() != n {
            violations.push(Violation::LabelCount { labels: l.len(), points: n });
        }
    }
    for (i, row) in raw.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                violations.push(Violation::NonFinite { i, j });
            } else if v < 0.0 {
                violations.push(Violation::Negative { i, j, value: v });
            }
        }
    }
    if !violations.is_empty() {
        return fail(violations, 0);
    }

    let scale = raw.iter().flatten().copied().fold(0.0, f64::max);
    let slack = tol_rel * scale;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        if raw[i][i] > slack {
            violations.push(Violation::NonzeroDiagonal { i, value: raw[i][i] });
        }
        for j in i + 1..n {
            let (a, b) = (raw[i][j], raw[j][i]);
            if (a - b).abs() > slack {
                violations.push(Violation::Asymmetry { i, j, magnitude: (a - b).abs() });
            }
            let v = if a == b { a } else { 0.5 * (a + b) };
            if v <= slack {
                violations.push(Violation::Coincident { i, j });
            }
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }

    let mut triangle_total = 0;
    for i in 0..n {
        for k in i + 1..n {
            for j in (0..n).filter(|&j| j != i && j != k) {
                let excess = d[i * n + k] - d[i * n + j] - d[j * n + k];
                if excess > slack {
                    triangle_total += 1;
                    if triangle_total <= MAX_TRIANGLE_WITNESSES {
                        violations.push(Violation::Triangle { i, j, k, excess });
                    }
                }
            }
        }
    }
    if !violations.is_empty() {
        return fail(violations, triangle_total);
    }

    let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
    Ok(FiniteMetricSpace { labels, n, d })
}

/// Perimeters of the four triangles of `(x; y, z, w)`, ordered
/// `xyz, xzw, xwy, yzw`, and their maximum (the size of the quadruple).
pub fn perimeter_and_size(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
) -> Result<([f64; 4], f64)> {
    for i in [x, y, z, w] {
        space.check_index(i)?;
    }
    let per = |a, b, c| space.d(a, b) + space.d(b, c) + space.d(c, a);
    let p = [per(x, y, z), per(x, z, w), per(x, w, y), per(y, z, w)];
    let size = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((p, size))
}

/// A sampled constant-speed geodesic: points `indices[a]` at arclength
/// `params[a]`, with `d(indices[a], indices[b]) = |params[a] - params[b]|`.
#[derive(Debug, Clone)]
pub struct DiscreteGeodesic<'a> {
    space: &'a FiniteMetricSpace,
    indices: Vec<usize>,
    params: Vec<f64>,
}

impl<'a> DiscreteGeodesic<'a> {
    pub fn new(space: &'a FiniteMetricSpace, indices: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if indices.len() != params.len() || indices.len() < 2 {
            return Err(Error::Geodesic(format!(
                "need at least two samples with one parameter each, got {} indices and {} parameters",
                indices.len(),
                params.len()
            )));
        }
        for &i in &indices {
            space.check_index(i)?;
        }
        if params.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Geodesic("parameters must be strictly increasing".into()));
        }
        let slack = tol::METRIC_REL * space.diameter().max(params[params.len() - 1] - params[0]);
        for a in 0..indices.len() {
            for b in a + 1..indices.len() {
                let err = (space.d(indices[a], indices[b]) - (params[b] - params[a])).abs();
                if err > slack {
                    return Err(Error::Geodesic(format!(
                        "samples {a} and {b} are {} apart but parameters differ by {}",
                        space.d(indices[a], indices[b]),
                        params[b] - params[a]
                    )));
                }
            }
        }
        Ok(DiscreteGeodesic { space, indices, params })
    }

    pub fn space(&self) -> &'a FiniteMetricSpace {
        self.space
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn start(&self) -> usize {
        self.indices[0]
    }

    pub fn end(&self) -> usize {
        self.indices[self.indices.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.params[self.params.len() - 1] - self.params[0]
    }

    /// Sample whose normalized parameter in `[0, 1]` lies within `tol` of `t`
    /// (the nearest one if several do).
    pub fn sample_at(&self, t: f64, tol: f64) -> Option<usize> {
        let (s0, len) = (self.params[0], self.length());
        self.params
            .iter()
            .map(|s| ((s - s0) / len - t).abs())
            .enumerate()
            .filter(|(_, e)| *e <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(a, _)| self.indices[a])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle_345() -> Vec<Vec<f64>> {
        vec![vec![0.0, 3.0, 4.0], vec![3.0, 0.0, 5.0], vec![4.0, 5.0, 0.0]]
    }

    fn plane(points: &[(f64, f64)]) -> FiniteMetricSpace {
        let raw: Vec<Vec<f64>> = points
            .iter()
            .map(|a| points.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
            .collect();
        validate_metric(&raw, None).unwrap()
    }

    #[test]
    fn accepts_valid_triangle() {
        let s = validate_metric(&triangle_345(), None).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.d(1, 2), 5.0);
        assert_eq!(s.labels(), ["0", "1", "2"]);
    }

    #[test]
    fn reports_asymmetry() {
        let raw = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        let err = validate_metric(&raw, None).unwrap_err();
        assert!(err.violations.contains(&Violation::Asymmetry { i: 0, j: 1, magnitude: 1.0 }));
    }

    #[test]
    fn reports_triangle_violation() {
        let raw = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        let err = validate_metric(&raw, None).unwrap_err();
        assert_eq!(err.violations, vec![Violation::Triangle { i: 0, j: 1, k: 2, excess: 1.0 }]);
        assert_eq!(err.triangle_total, 1);
    }

    #[test]
    fn reports_shape_diagonal_and_coincidence() {
        let err = validate_metric(&[vec![0.0, 1.0], vec![1.0]], None).unwrap_err();
        assert_eq!(err.violations, vec![Violation::NotSquare { row: 1, columns: 1, expected: 2 }]);

        let err = validate_metric(&[vec![0.5, 1.0], vec![1.0, 0.0]], None).unwrap_err();
        assert!(matches!(err.violations[0], Violation::NonzeroDiagonal { i: 0, .. }));

        let err = validate_metric(&[vec![0.0, 0.0], vec![0.0, 0.0]], None).unwrap_err();
        assert_eq!(err.violations, vec![Violation::Coincident { i: 0, j: 1 }]);

        let err = validate_metric(&[vec![0.0, f64::NAN], vec![1.0, 0.0]], None).unwrap_err();
        assert_eq!(err.violations, vec![Violation::NonFinite { i: 0, j: 1 }]);
    }

    #[test]
    fn rounding_noise_is_symmetrized() {
        let raw = vec![vec![0.0, 1.0 + 1e-12], vec![1.0, 1e-13]];
        let s = validate_metric(&raw, None).unwrap();
        assert_eq!(s.d(0, 1), s.d(1, 0));
        assert_eq!(s.d(1, 1), 0.0);
    }

    #[test]
    fn labels_checked() {
        let err = validate_metric(&triangle_345(), Some(vec!["a".into()])).unwrap_err();
        assert_eq!(err.violations, vec![Violation::LabelCount { labels: 1, points: 3 }]);
        let s = validate_metric(&triangle_345(), Some(vec!["a".into(), "b".into(), "c".into()])).unwrap();
        assert_eq!(s.index_of("c"), Some(2));
    }

    #[test]
    fn unit_square_size() {
        let s = plane(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let (p, size) = perimeter_and_size(&s, 0, 1, 2, 3).unwrap();
        // brute force over the four triangles of the square
        let pts = [(0.0f64, 0.0f64), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let dist = |a: usize, b: usize| (pts[a].0 - pts[b].0).hypot(pts[a].1 - pts[b].1);
        let mut best: f64 = 0.0;
        for (a, b, c) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
            best = best.max(dist(a, b) + dist(b, c) + dist(c, a));
        }
        assert!((size - best).abs() < 1e-15);
        assert!((size - (2.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!(p.iter().all(|&x| x <= size));
    }

    #[test]
    fn tripod_size_and_repeated_point() {
        let raw = vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0, 2.0],
            vec![1.0, 2.0, 0.0, 2.0],
            vec![1.0, 2.0, 2.0, 0.0],
        ];
        let s = validate_metric(&raw, None).unwrap();
        assert_eq!(perimeter_and_size(&s, 0, 1, 2, 3).unwrap().1, 6.0);
        // diagnostic call with a repeated index: the degenerate triangle is still counted
        let (p, size) = perimeter_and_size(&s, 1, 2, 3, 3).unwrap();
        assert_eq!(p[1], 4.0);
        assert_eq!(size, 6.0);
    }

    #[test]
    fn restrict_examples() {
        let s = plane(&[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0), (0.0, 2.0), (5.0, 5.0)]);
        assert_eq!(s.restrict(&[0, 1, 2, 3, 4]).unwrap(), s);
        let two = s.restrict(&[2, 0]).unwrap();
        assert_eq!(two.rows(), vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
        assert_eq!(two.labels(), ["2", "0"]);
        assert_eq!(
            s.restrict(&[4, 2, 1]).unwrap().restrict(&[2, 0]).unwrap(),
            s.restrict(&[1, 4]).unwrap()
        );
        assert!(matches!(s.restrict(&[1, 1]), Err(Error::DuplicateIndex(1))));
        assert!(matches!(s.restrict(&[9]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn geodesic_sampling() {
        let s = plane(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0)]);
        let g = DiscreteGeodesic::new(&s, vec![0, 1, 2], vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(g.sample_at(0.5, 1e-9), Some(1));
        assert_eq!(g.sample_at(0.4, 1e-9), None);
        assert!(DiscreteGeodesic::new(&s, vec![0, 3, 2], vec![0.0, 1.0, 2.0]).is_err());
        assert!(DiscreteGeodesic::new(&s, vec![0, 1], vec![1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn validation_is_idempotent_and_commutes_with_restrict(
            pts in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..8),
            pick in prop::collection::vec(any::<prop::sample::Index>(), 1..5),
        ) {
            let raw: Vec<Vec<f64>> = pts.iter()
                .map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
                .collect();
            prop_assume!(raw.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &v)| i == j || v > 1e-6)));
            let s = validate_metric(&raw, None).unwrap();
            let again = validate_metric(&s.rows(), Some(s.labels().to_vec())).unwrap();
            prop_assert_eq!(&again, &s);

            let mut idx: Vec<usize> = pick.iter().map(|i| i.index(s.len())).collect();
            idx.dedup();
            let mut seen = Vec::new();
            idx.retain(|i| if seen.contains(i) { false } else { seen.push(*i); true });
            let sub = s.restrict(&idx).unwrap();
            let sub_raw: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| raw[i][j]).collect()).collect();
            let labels = idx.iter().map(|i| i.to_string()).collect();
            prop_assert_eq!(validate_metric(&sub_raw, Some(labels)).unwrap(), sub);
        }
    }
}
