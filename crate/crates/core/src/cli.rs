//! The `curvkit` command-line front end.
//!
//! Every command prints one report: tool version, SHA-256 of the input,
//! tolerances used, a status and the full result. Exit status is 0 when
//! the checked property holds (or a construction succeeded), 1 when it
//! fails with a witness, 2 on input or usage errors.

mod input;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::applications::{
    embed_packer, generate, metric_transform, packing_bound, packing_radius, villani_flatness, GeneratorKind,
    PackingMode,
};
use crate::certifier::{certify_kappa, max_kappa};
use crate::comparison::{lss_form, lss_via_sturm, quadruple_defect, sturm_slack, WeightedStar};
use crate::error::Error;
use crate::metric::{DiscreteGeodesic, FiniteMetricSpace};
use crate::model_space::{Kappa, Regime};
use crate::rigidity::{comparison_gap_detail, default_tol_zero, embed_star, realize_flat_quadruple};
use crate::tol;

pub use input::{parse_matrix, InputError};
pub use output::{Format, Report, Status};

#[derive(Debug, Parser)]
#[command(name = "curvkit", version, about = "Curvature lower bounds for finite metric spaces")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; text rounds to 6 digits and is not meant for machines.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "CURVKIT_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct MatrixArg {
    /// Distance matrix (CSV or JSON); `-` reads standard input.
    input: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the quadruple condition at one κ.
    Certify {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        /// Allowed negative defect (radians).
        #[arg(long, default_value_t = tol::DEFECT)]
        tol: f64,
    },
    /// Largest κ at which the quadruple condition holds.
    Maxk {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long, default_value_t = 1e-7)]
        precision: f64,
        #[arg(long, allow_hyphen_values = true)]
        kappa_lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        kappa_hi: Option<f64>,
        #[arg(long, default_value_t = tol::DEFECT)]
        tol: f64,
    },
    /// Defect of one quadruple `x,y,z,w` at x.
    Quad {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        /// Four indices or labels, comma-separated.
        #[arg(long)]
        points: String,
        #[arg(long, default_value_t = tol::DEFECT)]
        tol: f64,
    },
    /// LSS form and, for κ ≤ 0, Sturm's slack of a weighted star.
    Lss {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        /// JSON `{"p": ..., "points": [...], "lambda": [...]}`.
        #[arg(long)]
        weights: PathBuf,
        /// Allowed negative value relative to `(Σ λ_i d(p, x_i))²`.
        #[arg(long, default_value_t = tol::ZERO_REL)]
        tol: f64,
    },
    /// Embed a zero-LSS star into the model space.
    Embed {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long)]
        weights: PathBuf,
        /// Absolute equality tolerance; defaults to 1e-8 · (Σ λ_i d(p, x_i))².
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Realize a zero-defect quadruple `x,y,z,w` in the model plane.
    Flat {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long)]
        points: String,
        #[arg(long, default_value_t = tol::DEFECT)]
        tol: f64,
    },
    /// Comparison gap `d(x,w) − d(x̃,w̃)` for `x,y,z,w` with w on [y,z].
    Gap {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long)]
        points: String,
        #[arg(long, default_value_t = tol::DEFECT)]
        tol: f64,
    },
    /// q-th packing radius compared with the curvature-≥1 bound.
    Pack {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long, default_value_t = tol::DEFECT)]
        tol: f64,
    },
    /// Quadrilateral inequality for two sampled geodesics.
    Villani {
        #[command(flatten)]
        m: MatrixArg,
        /// JSON `{"gamma": {"points": [...], "params": [...]}, "eta": {...}}`.
        #[arg(long)]
        geodesics: PathBuf,
        #[arg(long)]
        t: f64,
        /// Snapping tolerance for t, and relative equality tolerance.
        #[arg(long, default_value_t = tol::METRIC_REL)]
        tol: f64,
    },
    /// Apply the curvature-≥κ metric transform.
    Transform {
        #[command(flatten)]
        m: MatrixArg,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long)]
        alpha: f64,
    },
    /// Generate a synthetic space.
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        /// Tripod leg lengths, comma-separated.
        #[arg(long, default_value = "1,1,1")]
        legs: String,
        /// Number of legs of a star.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Size of the spherical simplex.
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exhaustive,
    Heuristic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Sphere,
    Euclidean,
    Hyperbolic,
    Tripod,
    Star,
    Simplex,
}

struct Outcome {
    status: Status,
    result: Value,
    matrix: Option<FiniteMetricSpace>,
}

impl Outcome {
    fn new(status: Status, result: Value) -> Self {
        Outcome { status, result, matrix: None }
    }

    fn holds_if(ok: bool, result: Value) -> Self {
        Self::new(if ok { Status::Holds } else { Status::Fails }, result)
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Certify { .. } => "certify",
        Command::Maxk { .. } => "maxk",
        Command::Quad { .. } => "quad",
        Command::Lss { .. } => "lss",
        Command::Embed { .. } => "embed",
        Command::Flat { .. } => "flat",
        Command::Gap { .. } => "gap",
        Command::Pack { .. } => "pack",
        Command::Villani { .. } => "villani",
        Command::Transform { .. } => "transform",
        Command::Gen { .. } => "gen",
    }
}

/// Parses arguments, runs one command and writes its report. Returns the
/// process exit status.
pub fn run_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return if code == 0 { 0 } else { 2 };
        }
    };
    run(cli, out, err)
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut report = Report::new(command_name(&cli.command));
    let outcome = match cli.threads {
        Some(0) => Err(InputError::Usage("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut report)),
            Err(e) => Err(InputError::Usage(format!("cannot start {t} threads: {e}"))),
        },
        None => dispatch(&cli.command, &mut report),
    };
    let matrix = match outcome {
        Ok(o) => {
            report.status = o.status;
            report.result = o.result;
            o.matrix
        }
        Err(e) => {
            let _ = writeln!(err, "curvkit: {e}");
            report.status = Status::Error;
            report.result = e.detail();
            None
        }
    };
    let text = output::render(&report, cli.format, matrix.as_ref());
    let _ = out.write_all(text.as_bytes());
    report.status.exit_code()
}

fn load(m: &MatrixArg, report: &mut Report) -> Result<FiniteMetricSpace, InputError> {
    let bytes = input::read_bytes(&m.input)?;
    report.input_digest = Some(input::digest(&bytes));
    input::parse_matrix(&bytes)
}

fn kappa(v: f64) -> Result<Kappa, InputError> {
    Ok(Kappa::new(v)?)
}

fn positive_tol(name: &str, v: f64) -> Result<f64, InputError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(InputError::Usage(format!("{name} must be positive, got {v}")))
    }
}

fn four(space: &FiniteMetricSpace, list: &str) -> Result<[usize; 4], InputError> {
    let v = input::resolve_list(space, list)?;
    <[usize; 4]>::try_from(v.as_slice()).map_err(|_| InputError::Usage(format!("--points needs four entries, got {}", v.len())))
}

fn labelled(space: &FiniteMetricSpace, idx: &[usize]) -> Value {
    json!(idx.iter().map(|&i| space.label(i)).collect::<Vec<_>>())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn dispatch(command: &Command, report: &mut Report) -> Result<Outcome, InputError> {
    match command {
        Command::Certify { m, kappa: k, tol } => {
            let tol = positive_tol("--tol", *tol)?;
            report.tolerances.insert("defect", tol);
            let space = load(m, report)?;
            let r = certify_kappa(&space, kappa(*k)?, tol)?;
            let mut result = to_value(&r);
            result["n"] = json!(space.len());
            result["verdict"] = json!(if r.passed { "quadruple condition holds" } else { "quadruple condition fails" });
            result["witness_labels"] = r.witness.map_or(Value::Null, |w| labelled(&space, &w));
            Ok(Outcome::holds_if(r.passed, result))
        }
        Command::Maxk { m, precision, kappa_lo, kappa_hi, tol } => {
            let tol = positive_tol("--tol", *tol)?;
            let precision = positive_tol("--precision", *precision)?;
            report.tolerances.insert("defect", tol);
            report.tolerances.insert("precision", precision);
            let space = load(m, report)?;
            let r = max_kappa(&space, precision, *kappa_lo, *kappa_hi, tol)?;
            let mut result = to_value(&r);
            result["estimate"] = json!(r.estimate());
            let found = !matches!(r.outcome, crate::certifier::MaxKappa::NoLowerBound { .. });
            if !found {
                result["message"] = json!("no lower bound found in range");
            }
            Ok(Outcome::holds_if(found, result))
        }
        Command::Quad { m, kappa: k, points, tol } => {
            let tol = positive_tol("--tol", *tol)?;
            report.tolerances.insert("defect", tol);
            let space = load(m, report)?;
            let [x, y, z, w] = four(&space, points)?;
            let kappa = kappa(*k)?;
            let (perimeters, size) = crate::metric::perimeter_and_size(&space, x, y, z, w)?;
            let defect = match quadruple_defect(kappa, &space, x, y, z, w) {
                Ok(d) => Some(d),
                Err(Error::UndefinedAngle { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let constrained = size < kappa.perimeter_bound();
            let result = json!({
                "kappa": kappa.value(),
                "quadruple": [x, y, z, w],
                "labels": labelled(&space, &[x, y, z, w]),
                "defect": defect,
                "perimeters": perimeters,
                "size": size,
                "size_bound": if kappa.perimeter_bound().is_finite() { json!(kappa.perimeter_bound()) } else { Value::Null },
                "constrained": constrained,
            });
            let ok = !constrained || defect.is_some_and(|d| d >= -tol);
            Ok(Outcome::holds_if(ok, result))
        }
        Command::Lss { m, kappa: k, weights, tol } => {
            let tol = positive_tol("--tol", *tol)?;
            let space = load(m, report)?;
            let w = input::read_weights(weights, &space)?;
            let kappa = kappa(*k)?;
            let star = WeightedStar::new(&space, w.p, w.points.clone(), w.lambda.clone())?;
            let lss = lss_form(kappa, &star)?;
            let scale = star.scale();
            report.tolerances.insert("negative_rel", tol);
            let (slack, via) = if kappa.regime() == Regime::Elliptic {
                (None, None)
            } else {
                (Some(sturm_slack(kappa, &star)?), Some(lss_via_sturm(kappa, &star)?))
            };
            let result = json!({
                "kappa": kappa.value(),
                "p": w.p,
                "points": w.points,
                "lambda": w.lambda,
                "lss": if lss.is_finite() { json!(lss) } else { Value::Null },
                "lss_defined": lss.is_finite(),
                "scale": scale,
                "sturm_slack": slack,
                "lss_via_sturm": via,
            });
            Ok(Outcome::holds_if(!lss.is_finite() || lss >= -tol * scale, result))
        }
        Command::Embed { m, kappa: k, weights, tol } => {
            let space = load(m, report)?;
            let w = input::read_weights(weights, &space)?;
            let kappa = kappa(*k)?;
            let star = WeightedStar::new(&space, w.p, w.points, w.lambda)?;
            let tol_zero = match tol {
                Some(t) => positive_tol("--tol", *t)?,
                None => default_tol_zero(&star),
            };
            report.tolerances.insert("zero", tol_zero);
            match embed_star(kappa, &star, Some(tol_zero)) {
                Ok(e) => {
                    let mut result = to_value(&e);
                    result["labels"] = labelled(&space, &e.indices);
                    Ok(Outcome::new(Status::Holds, result))
                }
                Err(Error::NotEqualityCase { lss, tol }) => Ok(Outcome::new(
                    Status::Fails,
                    json!({ "reason": "not an equality case", "lss": lss, "tol_zero": tol }),
                )),
                Err(e @ Error::IndefiniteGram { .. }) => Ok(Outcome::new(
                    Status::Fails,
                    json!({ "reason": "inconsistent angle data", "detail": e.to_string(), "error": to_value(&e) }),
                )),
                Err(e) => Err(e.into()),
            }
        }
        Command::Flat { m, kappa: k, points, tol } => {
            let tol = positive_tol("--tol", *tol)?;
            report.tolerances.insert("defect", tol);
            let space = load(m, report)?;
            let [x, y, z, w] = four(&space, points)?;
            match realize_flat_quadruple(kappa(*k)?, &space, x, y, z, w, tol) {
                Ok(f) => {
                    let ok = f.consistent;
                    let mut result = to_value(&f);
                    result["labels"] = labelled(&space, &f.indices);
                    Ok(Outcome::holds_if(ok, result))
                }
                Err(e @ (Error::NotFlat { .. } | Error::Betweenness { .. } | Error::UndefinedAngle { .. })) => {
                    Ok(Outcome::new(Status::Fails, json!({ "reason": e.to_string(), "error": to_value(&e) })))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Gap { m, kappa: k, points, tol } => {
            let tol = positive_tol("--tol", *tol)?;
            report.tolerances.insert("between", tol);
            report.tolerances.insert("gap", tol);
            let space = load(m, report)?;
            let [x, y, z, w] = four(&space, points)?;
            let g = comparison_gap_detail(kappa(*k)?, &space, x, y, z, w, tol)?;
            let ok = g.gap >= -tol;
            let mut result = to_value(&g);
            result["quadruple"] = json!([x, y, z, w]);
            result["labels"] = labelled(&space, &[x, y, z, w]);
            Ok(Outcome::holds_if(ok, result))
        }
        Command::Pack { m, q, mode, tol } => {
            let tol = positive_tol("--tol", *tol)?;
            report.tolerances.insert("bound", tol);
            let space = load(m, report)?;
            let mode = match mode {
                ModeArg::Auto => PackingMode::Auto,
                ModeArg::Exhaustive => PackingMode::Exhaustive,
                ModeArg::Heuristic => PackingMode::Heuristic,
            };
            let p = packing_radius(&space, *q, mode)?;
            let bound = packing_bound(*q);
            let within = p.radius <= bound + tol;
            let attains = (p.radius - bound).abs() <= tol;
            let mut result = to_value(&p);
            result["labels"] = labelled(&space, &p.packer);
            result["bound"] = json!(bound);
            result["within_bound"] = json!(within);
            result["attains_bound"] = json!(attains);
            if attains {
                result["embedding"] = match embed_packer(&space, &p.packer) {
                    Ok(cfg) => to_value(&cfg),
                    Err(e) => json!({ "error": e.to_string() }),
                };
            }
            Ok(Outcome::holds_if(within, result))
        }
        Command::Villani { m, geodesics, t, tol } => {
            let tol = positive_tol("--tol", *tol)?;
            report.tolerances.insert("snap", tol);
            report.tolerances.insert("equality_rel", tol);
            let space = load(m, report)?;
            let g = input::read_geodesics(geodesics)?;
            let (gi, gp) = g.gamma.resolve(&space)?;
            let (ei, ep) = g.eta.resolve(&space)?;
            let gamma = DiscreteGeodesic::new(&space, gi, gp)?;
            let eta = DiscreteGeodesic::new(&space, ei, ep)?;
            let r = villani_flatness(&gamma, &eta, *t, tol, tol)?;
            let ok = r.gap >= -tol * r.lhs.max(r.rhs.abs()).max(1.0);
            Ok(Outcome::holds_if(ok, to_value(&r)))
        }
        Command::Transform { m, kappa: k, alpha } => {
            let space = load(m, report)?;
            let kappa = kappa(*k)?;
            let t = metric_transform(&space, kappa, *alpha)?;
            let mut result = to_value(&t);
            result["kappa"] = json!(kappa.value());
            result["alpha"] = json!(alpha);
            Ok(Outcome { status: Status::Ok, result, matrix: Some(t) })
        }
        Command::Gen { kind, n, dim, kappa: k, legs, k: legs_k, q, seed } => {
            let kind = match kind {
                KindArg::Sphere => GeneratorKind::Sphere { n: *n, dim: *dim, kappa: k.unwrap_or(1.0) },
                KindArg::Euclidean => GeneratorKind::Euclidean { n: *n, dim: *dim },
                KindArg::Hyperbolic => GeneratorKind::Hyperbolic { n: *n, dim: *dim, kappa: k.unwrap_or(-1.0) },
                KindArg::Tripod => {
                    let v: Vec<f64> = legs
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| InputError::Usage(format!("--legs: {e}")))?;
                    let legs = <[f64; 3]>::try_from(v.as_slice())
                        .map_err(|_| InputError::Usage(format!("--legs needs three lengths, got {}", v.len())))?;
                    GeneratorKind::Tripod { legs }
                }
                KindArg::Star => GeneratorKind::Star { k: *legs_k },
                KindArg::Simplex => GeneratorKind::SimplexOnSphere { q: *q },
            };
            let g = generate(&kind, *seed)?;
            let mut result = to_value(&g.space);
            result["generator"] = to_value(&kind);
            result["seed"] = json!(seed);
            result["coordinates"] = g.config.as_ref().map_or(Value::Null, to_value);
            Ok(Outcome { status: Status::Ok, result, matrix: Some(g.space) })
        }
    }
}
