//! C ABI over `curvkit`.
//!
//! Spaces and model configurations cross the boundary as opaque handles
//! owned by the caller and released with the matching `_free` function.
//! Every fallible call returns a [`CurvkitStatus`]; on failure a message is
//! available from [`curvkit_last_error`] on the same thread. Outputs are
//! written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use curvkit::{Error, FiniteMetricSpace, Kappa, MaxKappa, ModelConfig, PackingMode, WeightedStar};

/// Opaque validated finite metric space.
pub struct CurvkitSpace(FiniteMetricSpace);

/// Opaque point configuration in a model space.
pub struct CurvkitModelConfig(ModelConfig);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidMetric = 2,
    InvalidArgument = 3,
    IndexOutOfRange = 4,
    /// A comparison angle or model triangle does not exist.
    Undefined = 5,
    NotEqualityCase = 6,
    NotFlat = 7,
    /// A numerical precondition failed, such as an indefinite Gram matrix.
    Numerical = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvkitPackingMode {
    Exhaustive = 0,
    Heuristic = 1,
    Auto = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvkitMaxKappaOutcome {
    Bounded = 0,
    VacuityLimited = 1,
    Unbounded = 2,
    NoLowerBound = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CurvkitCertReport {
    pub kappa: f64,
    pub passed: bool,
    pub tol_defect: f64,
    /// NaN when no quadruple was evaluated.
    pub worst_defect: f64,
    pub has_witness: bool,
    pub witness: [usize; 4],
    pub quadruples_checked: u64,
    pub undefined_skipped: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CurvkitMaxKappaReport {
    pub outcome: CurvkitMaxKappaOutcome,
    /// Supremum estimate for `Bounded` and `VacuityLimited`, the ceiling for
    /// `Unbounded`, the bottom of the range for `NoLowerBound`.
    pub kappa: f64,
    /// Last passing and first failing κ for `Bounded`, NaN otherwise.
    pub passing: f64,
    pub failing: f64,
    pub has_witness: bool,
    pub witness: [usize; 4],
    pub worst_defect: f64,
    pub precision: f64,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub vacuity_threshold: f64,
    pub evaluations: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CurvkitStatus {
    match e {
        Error::InvalidMetric(_) => CurvkitStatus::InvalidMetric,
        Error::IndexOutOfRange { .. } => CurvkitStatus::IndexOutOfRange,
        Error::UndefinedAngle { .. }
        | Error::InadmissibleTriangle { .. }
        | Error::TriangleInequality { .. }
        | Error::PerimeterBound { .. }
        | Error::Antipodal(..) => CurvkitStatus::Undefined,
        Error::NotEqualityCase { .. } => CurvkitStatus::NotEqualityCase,
        Error::NotFlat { .. } | Error::Betweenness { .. } => CurvkitStatus::NotFlat,
        Error::IndefiniteGram { .. } | Error::InvalidGram(_) | Error::ChartViolation { .. } => CurvkitStatus::Numerical,
        _ => CurvkitStatus::InvalidArgument,
    }
}

struct Fail(CurvkitStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type Outcome = Result<(), Fail>;

fn guard(f: impl FnOnce() -> Outcome) -> CurvkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CurvkitStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CurvkitStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(CurvkitStatus::NullPointer, format!("{what} is null"))
}

unsafe fn space_ref<'a>(space: *const CurvkitSpace) -> Result<&'a FiniteMetricSpace, Fail> {
    space.as_ref().map(|s| &s.0).ok_or_else(|| null("space"))
}

unsafe fn config_ref<'a>(cfg: *const CurvkitModelConfig) -> Result<&'a ModelConfig, Fail> {
    cfg.as_ref().map(|c| &c.0).ok_or_else(|| null("config"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

fn kappa(v: f64) -> Result<Kappa, Fail> {
    Ok(Kappa::new(v)?)
}

unsafe fn star<'a>(
    space: &'a FiniteMetricSpace,
    p: usize,
    points: *const usize,
    weights: *const f64,
    m: usize,
) -> Result<WeightedStar<'a>, Fail> {
    let pts = slice(points, m, "points")?.to_vec();
    if weights.is_null() {
        Ok(WeightedStar::uniform(space, p, pts)?)
    } else {
        Ok(WeightedStar::new(space, p, pts, slice(weights, m, "weights")?.to_vec())?)
    }
}

fn opt_f64(v: f64) -> Option<f64> {
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn curvkit_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn curvkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Validates a row-major `n × n` distance matrix.
///
/// # Safety
/// `d` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_space_new(d: *const f64, n: usize, out: *mut *mut CurvkitSpace) -> CurvkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let n2 = n.checked_mul(n).ok_or_else(|| Fail(CurvkitStatus::InvalidArgument, "n too large".into()))?;
        let flat = slice(d, n2, "d")?;
        let rows: Vec<Vec<f64>> = flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let space = curvkit::validate_metric(&rows, None).map_err(Error::from)?;
        write(out, Box::into_raw(Box::new(CurvkitSpace(space))), "out")
    })
}

/// # Safety
/// `space` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn curvkit_space_free(space: *mut CurvkitSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvkit_space_len(space: *const CurvkitSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_space_distance(
    space: *const CurvkitSpace,
    i: usize,
    j: usize,
    out: *mut f64,
) -> CurvkitStatus {
    guard(|| write(out, space_ref(space)?.distance(i, j)?, "out"))
}

/// `S_κ(r)` and `C_κ(r)`.
///
/// # Safety
/// `sn` and `cs` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_kappa_trig(k: f64, r: f64, sn: *mut f64, cs: *mut f64) -> CurvkitStatus {
    guard(|| {
        if sn.is_null() || cs.is_null() {
            return Err(null("output"));
        }
        let (s, c) = curvkit::kappa_trig(kappa(k)?, r);
        sn.write(s);
        cs.write(c);
        Ok(())
    })
}

/// Comparison angle at `x`. `defined` is false when the perimeter reaches
/// the model bound, in which case `angle` is NaN.
///
/// # Safety
/// `space` must be a live handle; `angle` and `defined` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_comparison_angle(
    k: f64,
    space: *const CurvkitSpace,
    x: usize,
    y: usize,
    z: usize,
    angle: *mut f64,
    defined: *mut bool,
) -> CurvkitStatus {
    guard(|| {
        if angle.is_null() || defined.is_null() {
            return Err(null("output"));
        }
        let a = curvkit::comparison_angle(kappa(k)?, space_ref(space)?, x, y, z)?;
        angle.write(a.unwrap_or(f64::NAN));
        defined.write(a.is_some());
        Ok(())
    })
}

/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_quadruple_defect(
    k: f64,
    space: *const CurvkitSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
    out: *mut f64,
) -> CurvkitStatus {
    guard(|| write(out, curvkit::quadruple_defect(kappa(k)?, space_ref(space)?, x, y, z, w)?, "out"))
}

/// Sweeps every quadruple at curvature `k`.
///
/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_certify(
    space: *const CurvkitSpace,
    k: f64,
    tol_defect: f64,
    out: *mut CurvkitCertReport,
) -> CurvkitStatus {
    guard(|| {
        let r = curvkit::certify_kappa(space_ref(space)?, kappa(k)?, tol_defect)?;
        let report = CurvkitCertReport {
            kappa: r.kappa.value(),
            passed: r.passed,
            tol_defect: r.tol_defect,
            worst_defect: r.worst_defect.unwrap_or(f64::NAN),
            has_witness: r.witness.is_some(),
            witness: r.witness.unwrap_or([0; 4]),
            quadruples_checked: r.quadruples_checked as u64,
            undefined_skipped: r.undefined_skipped as u64,
        };
        write(out, report, "out")
    })
}

/// Bisects for the largest certified κ. NaN for `lo` or `hi` selects the
/// default search range.
///
/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_max_kappa(
    space: *const CurvkitSpace,
    precision: f64,
    lo: f64,
    hi: f64,
    tol_defect: f64,
    out: *mut CurvkitMaxKappaReport,
) -> CurvkitStatus {
    guard(|| {
        let r = curvkit::max_kappa(space_ref(space)?, precision, opt_f64(lo), opt_f64(hi), tol_defect)?;
        let nan = f64::NAN;
        let (outcome, k, passing, failing, witness, worst) = match r.outcome {
            MaxKappa::Bounded { kappa, passing, failing, witness, worst_defect } => {
                (CurvkitMaxKappaOutcome::Bounded, kappa, passing, failing, Some(witness), worst_defect)
            }
            MaxKappa::VacuityLimited { kappa } => (CurvkitMaxKappaOutcome::VacuityLimited, kappa, nan, nan, None, nan),
            MaxKappa::Unbounded { ceiling } => (CurvkitMaxKappaOutcome::Unbounded, ceiling, nan, nan, None, nan),
            MaxKappa::NoLowerBound { kappa_lo, witness, worst_defect } => {
                (CurvkitMaxKappaOutcome::NoLowerBound, kappa_lo, nan, nan, Some(witness), worst_defect)
            }
        };
        let report = CurvkitMaxKappaReport {
            outcome,
            kappa: k,
            passing,
            failing,
            has_witness: witness.is_some(),
            witness: witness.unwrap_or([0; 4]),
            worst_defect: worst,
            precision: r.precision,
            kappa_lo: r.kappa_lo,
            kappa_hi: r.kappa_hi,
            vacuity_threshold: r.vacuity_threshold,
            evaluations: r.evaluations as u64,
        };
        write(out, report, "out")
    })
}

/// LSS form of the star at `p` over `m` points. Null `weights` means unit
/// weights.
///
/// # Safety
/// `points` (and `weights` if non-null) must hold `m` elements; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_lss_form(
    k: f64,
    space: *const CurvkitSpace,
    p: usize,
    points: *const usize,
    weights: *const f64,
    m: usize,
    out: *mut f64,
) -> CurvkitStatus {
    guard(|| {
        let s = star(space_ref(space)?, p, points, weights, m)?;
        write(out, curvkit::lss_form(kappa(k)?, &s)?, "out")
    })
}

/// Embeds a zero-LSS star in the model space. The configuration lists `p`
/// first, then the points in order. NaN `tol_zero` selects the default.
///
/// # Safety
/// As for [`curvkit_lss_form`]; `out` and `max_residual` (if non-null) writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn curvkit_embed_star(
    k: f64,
    space: *const CurvkitSpace,
    p: usize,
    points: *const usize,
    weights: *const f64,
    m: usize,
    tol_zero: f64,
    out: *mut *mut CurvkitModelConfig,
    max_residual: *mut f64,
) -> CurvkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = star(space_ref(space)?, p, points, weights, m)?;
        let e = curvkit::embed_star(kappa(k)?, &s, opt_f64(tol_zero))?;
        if !max_residual.is_null() {
            max_residual.write(e.max_residual);
        }
        out.write(Box::into_raw(Box::new(CurvkitModelConfig(e.config))));
        Ok(())
    })
}

/// Places a flat quadruple in the model plane, in the order `x, y, z, w`.
///
/// # Safety
/// `space` must be a live handle; `out` and `max_residual` (if non-null) writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn curvkit_realize_flat_quadruple(
    k: f64,
    space: *const CurvkitSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
    tol: f64,
    out: *mut *mut CurvkitModelConfig,
    max_residual: *mut f64,
) -> CurvkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = curvkit::realize_flat_quadruple(kappa(k)?, space_ref(space)?, x, y, z, w, tol)?;
        if !max_residual.is_null() {
            max_residual.write(f.max_residual);
        }
        out.write(Box::into_raw(Box::new(CurvkitModelConfig(f.config))));
        Ok(())
    })
}

/// `d(x, w) − d(x̃, w̃)` against the comparison triangle of `x, y, z`.
///
/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn curvkit_comparison_gap(
    k: f64,
    space: *const CurvkitSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
    tol: f64,
    out: *mut f64,
) -> CurvkitStatus {
    guard(|| write(out, curvkit::comparison_gap(kappa(k)?, space_ref(space)?, x, y, z, w, tol)?, "out"))
}

/// # Safety
/// `cfg` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn curvkit_config_free(cfg: *mut CurvkitModelConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvkit_config_len(cfg: *const CurvkitModelConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.len())
}

/// Intrinsic dimension of the model space, or 0 for a null handle.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvkit_config_dim(cfg: *const CurvkitModelConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.dim())
}

/// Coordinates per point in the chart, or 0 for a null handle.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvkit_config_ambient_dim(cfg: *const CurvkitModelConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.ambient_dim())
}

/// Copies the chart coordinates of point `i` into `buf`.
///
/// # Safety
/// `cfg` must be a live handle and `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn curvkit_config_point(
    cfg: *const CurvkitModelConfig,
    i: usize,
    buf: *mut f64,
    len: usize,
) -> CurvkitStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        let p = c
            .points()
            .get(i)
            .ok_or(Error::IndexOutOfRange { index: i, len: c.len() })?;
        if len < p.len() {
            return Err(Fail(CurvkitStatus::BufferTooSmall, format!("point has {} coordinates, buffer holds {len}", p.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, p.len()).copy_from_slice(p);
        Ok(())
    })
}

/// Model distance between points `i` and `j`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_config_distance(
    cfg: *const CurvkitModelConfig,
    i: usize,
    j: usize,
    out: *mut f64,
) -> CurvkitStatus {
    guard(|| write(out, config_ref(cfg)?.distance(i, j)?, "out"))
}

/// Largest `q`-point packing radius. `packer` may be null; otherwise it
/// receives the `q` chosen indices.
///
/// # Safety
/// `space` must be a live handle; `radius`, `certified` writable; `packer`
/// null or holding `q` writable elements.
#[no_mangle]
pub unsafe extern "C" fn curvkit_packing_radius(
    space: *const CurvkitSpace,
    q: usize,
    mode: CurvkitPackingMode,
    radius: *mut f64,
    packer: *mut usize,
    certified: *mut bool,
) -> CurvkitStatus {
    guard(|| {
        if radius.is_null() || certified.is_null() {
            return Err(null("output"));
        }
        let mode = match mode {
            CurvkitPackingMode::Exhaustive => PackingMode::Exhaustive,
            CurvkitPackingMode::Heuristic => PackingMode::Heuristic,
            CurvkitPackingMode::Auto => PackingMode::Auto,
        };
        let r = curvkit::packing_radius(space_ref(space)?, q, mode)?;
        if !packer.is_null() {
            std::slice::from_raw_parts_mut(packer, r.packer.len()).copy_from_slice(&r.packer);
        }
        radius.write(r.radius);
        certified.write(r.is_certified_max);
        Ok(())
    })
}

/// `½ arccos(1 / (1 − q))`; NaN for `q < 2`.
#[no_mangle]
pub extern "C" fn curvkit_packing_bound(q: usize) -> f64 {
    curvkit::packing_bound(q)
}

/// Applies the curvature-raising transform entrywise.
///
/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvkit_metric_transform(
    space: *const CurvkitSpace,
    k: f64,
    alpha: f64,
    out: *mut *mut CurvkitSpace,
) -> CurvkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = curvkit::metric_transform(space_ref(space)?, kappa(k)?, alpha)?;
        write(out, Box::into_raw(Box::new(CurvkitSpace(t))), "out")
    })
}
