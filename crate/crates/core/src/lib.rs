//! Comparison geometry on finite metric spaces.
//!
//! `curvkit` checks whether a finite metric space satisfies the quadruple
//! condition for a curvature lower bound κ, evaluates the Lang–Schroeder–Sturm
//! quadratic form on weighted stars, detects equality configurations and
//! realizes them isometrically in the model space `M_κ` (sphere, Euclidean
//! space or hyperboloid).
//!
//! The crate is organised bottom-up:
//!
//! * [`model_space`]: κ-trigonometry and coordinates in `M^n_κ`.
//! * [`metric`]: validated distance matrices.
//! * [`comparison`]: comparison angles, κ-inner products, quadruple defects
//!   and the quadratic forms built from them.
//! * [`certifier`]: exhaustive quadruple sweeps and max-κ bisection.
//! * [`rigidity`]: embedding of equality cases.
//! * [`applications`]: packing radius, the Villani quadrilateral inequality,
//!   metric transforms and synthetic generators.
//! * [`cli`]: the `curvkit` command-line front end.

// `!(a <= b)` reads as "fails the bound or is NaN"
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod certifier;
pub mod cli;
pub mod comparison;
pub mod error;
pub mod metric;
pub mod model_space;
pub mod rigidity;
pub mod tol;

pub use applications::{
    generate, metric_transform, packing_bound, packing_radius, villani_flatness, villani_gap,
    GeneratorKind, Generated, PackingMode, PackingResult, VillaniReport,
};
pub use certifier::{certify_kappa, max_kappa, CertReport, MaxKappa, MaxKappaReport};
pub use comparison::{
    bn_cosq, comparison_angle, kappa_inner_product, lss_form, lss_via_sturm, quadruple_defect,
    sturm_slack, DirectionGram, WeightedStar,
};
pub use error::{Error, MetricError, Result, Violation};
pub use metric::{perimeter_and_size, validate_metric, DiscreteGeodesic, FiniteMetricSpace};
pub use model_space::{
    exp_from_gram, kappa_trig, model_distance, realize_triangle, Kappa, ModelConfig, Regime,
};
pub use rigidity::{
    comparison_gap, embed_star, realize_flat_quadruple, FlatRealization, StarEmbedding,
};

/// Crate version, stamped into every CLI report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
