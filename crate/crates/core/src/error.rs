use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single metric-axiom violation found by [`crate::validate_metric`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotSquare { row: usize, columns: usize, expected: usize },
    NonFinite { i: usize, j: usize },
    Negative { i: usize, j: usize, value: f64 },
    Asymmetry { i: usize, j: usize, magnitude: f64 },
    NonzeroDiagonal { i: usize, value: f64 },
    Coincident { i: usize, j: usize },
    /// `d(i, k) > d(i, j) + d(j, k)` by `excess`.
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
    LabelCount { labels: usize, points: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { row, columns, expected } => {
                write!(f, "row {row} has {columns} columns, expected {expected}")
            }
            Violation::NonFinite { i, j } => write!(f, "entry ({i},{j}) is not finite"),
            Violation::Negative { i, j, value } => write!(f, "entry ({i},{j}) = {value} is negative"),
            Violation::Asymmetry { i, j, magnitude } => {
                write!(f, "asymmetry at ({i},{j}) of magnitude {magnitude}")
            }
            Violation::NonzeroDiagonal { i, value } => write!(f, "diagonal entry {i} = {value}"),
            Violation::Coincident { i, j } => write!(f, "points {i} and {j} coincide"),
            Violation::Triangle { i, j, k, excess } => {
                write!(f, "triangle inequality fails on ({i},{j},{k}) by {excess}")
            }
            Violation::LabelCount { labels, points } => {
                write!(f, "{labels} labels for {points} points")
            }
        }
    }
}

/// All violations found while validating a raw matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricError {
    pub violations: Vec<Violation>,
    /// Number of triangle violations found, which may exceed those listed.
    pub triangle_total: usize,
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} metric violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(8) {
            write!(f, "; {v}")?;
        }
        if self.violations.len() > 8 {
            write!(f, "; ...")?;
        }
        Ok(())
    }
}

impl std::error::Error for MetricError {}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(#[from] MetricError),
    #[error("curvature must be finite, got {0}")]
    NonFiniteKappa(f64),
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("duplicate index {0}")]
    DuplicateIndex(usize),
    #[error("zero side between points {0} and {1}")]
    ZeroSide(usize, usize),
    #[error("comparison angle undefined: perimeter {perimeter} is not below {bound}")]
    UndefinedAngle { perimeter: f64, bound: f64 },
    #[error("inadmissible triangle: cosine leaves [-1, 1] by {excess}")]
    InadmissibleTriangle { excess: f64 },
    #[error("triangle inequality violated by {excess}")]
    TriangleInequality { excess: f64 },
    #[error("perimeter {perimeter} is not below {bound}")]
    PerimeterBound { perimeter: f64, bound: f64 },
    #[error("point {index} is off the model chart by {deviation}")]
    ChartViolation { index: usize, deviation: f64 },
    #[error("point {index} has {len} coordinates, chart needs {expected}")]
    ChartDimension { index: usize, len: usize, expected: usize },
    #[error("points {0} and {1} are antipodal; geodesic is not unique")]
    Antipodal(usize, usize),
    #[error("points {0} and {1} coincide")]
    Coincident(usize, usize),
    #[error("gram matrix indefinite: eigenvalue {min_eigenvalue}")]
    IndefiniteGram { min_eigenvalue: f64, witness: Vec<f64> },
    #[error("invalid gram matrix: {0}")]
    InvalidGram(String),
    #[error("not an equality case: LSS form {lss} exceeds {tol}")]
    NotEqualityCase { lss: f64, tol: f64 },
    #[error("not flat: quadruple defect {defect} exceeds {tol}")]
    NotFlat { defect: f64, tol: f64 },
    #[error("center lies between {a} and {b} (slack {slack})")]
    Betweenness { a: usize, b: usize, slack: f64 },
    #[error("point is not between the endpoints (excess {excess})")]
    NotBetween { excess: f64 },
    #[error("Sturm forms require kappa <= 0, got {0}")]
    PositiveKappa(f64),
    #[error("parameter {t} is not sampled on the geodesic")]
    ParameterNotSampled { t: f64 },
    #[error("geodesic invariant violated: {0}")]
    Geodesic(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
