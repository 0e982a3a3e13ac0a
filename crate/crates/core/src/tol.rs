//! Default tolerances shared across modules.

/// Relative slack for metric axioms, as a fraction of the largest matrix entry.
pub const METRIC_REL: f64 = 1e-9;

/// Relative slack for the chart constraint of model-space coordinates.
pub const CHART_REL: f64 = 1e-12;

/// Cosines in `[-1 - CLAMP, 1 + CLAMP]` are clamped; anything further out is an error.
pub const CLAMP: f64 = 1e-10;

/// Negative Gram eigenvalues down to `-PSD` are projected to zero.
pub const PSD: f64 = 1e-8;

/// Eigenvalues above `RANK_REL * largest` count towards numerical rank.
pub const RANK_REL: f64 = 1e-10;

/// Absolute defect tolerance (radians) of a certification sweep.
pub const DEFECT: f64 = 1e-9;

/// `|κ| r²` below which S_κ and C_κ switch to their Taylor series.
pub const SERIES: f64 = 1e-8;

/// Relative factor of the default "equality case" threshold for the LSS form.
pub const ZERO_REL: f64 = 1e-8;

/// Largest subset count `C(n, q)` for which packing search is exhaustive by default.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;
