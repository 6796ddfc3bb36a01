//! Configuration parsing, command dispatch and output documents.

use std::str::FromStr;
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::germ::Sign;
use crate::kneading::{self, KneadingMatrix, MatrixMode, DEFAULT_ORDER};
use crate::map::{Branch, MapSpec, Tolerances};
use crate::oracle;
use crate::poly::Poly;
use crate::ratfunc::RationalFunction;
use crate::scalar::{format_rational, parse_rational, Rational, Real};
use crate::spectral::{self, DualOperatorMatrices};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    KneadingMatrix,
    Determinant,
    Entropy,
    Zeros,
    DualCheck,
    LapCounts,
    OmegaIdentity,
    RuelleDet,
    SpectralReport,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Command as ValueEnum>::from_str(s, false).map_err(|_| Error::Usage(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Numeric,
}

#[derive(Clone, Debug)]
pub enum AnyMap {
    Exact(MapSpec<Rational>),
    Numeric(MapSpec<f64>),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub map: AnyMap,
    pub mode: Mode,
    pub tolerances: Tolerances,
    pub tol_zero: f64,
    pub series_order: usize,
    pub nmax: usize,
    /// `None` picks the command's default: CSV for sequences, JSON otherwise.
    pub output: Option<OutputFormat>,
    /// `--n` override of `nmax` or the series order.
    pub n: Option<usize>,
    /// `--t` evaluation point, `"p/q"` or decimal.
    pub t: Option<String>,
}

pub const DEFAULT_NMAX: usize = 20;
pub const DEFAULT_TOL_ZERO: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "kneading", about = "Kneading determinants and transfer operator spectra of piecewise monotone maps")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON map configuration
    #[arg(long)]
    pub config: std::path::PathBuf,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
}

fn cfg_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::config(path.into(), message.into())
}

/// A number field: JSON number or `"p/q"` / decimal string.
fn number(v: &Value, path: &str) -> Result<Rational> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(cfg_err(path, "expected a number or \"p/q\" string")),
    };
    if let Some(r) = parse_rational(&text) {
        return Ok(r);
    }
    // exponent notation
    match text.parse::<f64>() {
        Ok(x) if x.is_finite() => Rational::from_float(x).ok_or_else(|| cfg_err(path, "not a finite number")),
        _ => Err(cfg_err(path, format!("cannot parse {text:?} as a number"))),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| cfg_err(join(path, key), "required"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn usize_field(obj: &Map<String, Value>, key: &str, default: usize) -> Result<usize> {
    match obj.get(key) {
        None => Ok(default),
        Some(v) => v.as_u64().map(|n| n as usize).ok_or_else(|| cfg_err(key, "expected a non-negative integer")),
    }
}

fn f64_field(obj: &Map<String, Value>, key: &str, default: f64) -> Result<f64> {
    match obj.get(key) {
        None => Ok(default),
        Some(v) => {
            let x = v.as_f64().ok_or_else(|| cfg_err(key, "expected a number"))?;
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(cfg_err(key, "expected a positive number"))
            }
        }
    }
}

/// Raw branch description before the scalar type is fixed.
enum RawBranch {
    Linear { slope: Rational, intercept: Rational, weight: Rational },
    Generic { samples: Vec<(Rational, Rational)>, left: Rational, right: Rational, weight: Rational },
}

fn parse_branch(v: &Value, path: &str) -> Result<RawBranch> {
    let obj = v.as_object().ok_or_else(|| cfg_err(path, "expected an object"))?;
    let kind = obj.get("type").and_then(Value::as_str).unwrap_or("linear");
    let weight = match obj.get("weight") {
        Some(w) => number(w, &join(path, "weight"))?,
        None => Rational::from_integer(1.into()),
    };
    match kind {
        "linear" => Ok(RawBranch::Linear {
            slope: number(field(obj, "slope", path)?, &join(path, "slope"))?,
            intercept: number(field(obj, "intercept", path)?, &join(path, "intercept"))?,
            weight,
        }),
        "generic" => {
            let sp = join(path, "samples");
            let arr = field(obj, "samples", path)?.as_array().ok_or_else(|| cfg_err(&sp, "expected an array of [x, y] pairs"))?;
            let mut samples = Vec::with_capacity(arr.len());
            for (i, s) in arr.iter().enumerate() {
                let p = format!("{sp}[{i}]");
                match s.as_array().map(Vec::as_slice) {
                    Some([x, y]) => samples.push((number(x, &p)?, number(y, &p)?)),
                    _ => return Err(cfg_err(p, "expected [x, y]")),
                }
            }
            Ok(RawBranch::Generic {
                samples,
                left: number(field(obj, "left_limit", path)?, &join(path, "left_limit"))?,
                right: number(field(obj, "right_limit", path)?, &join(path, "right_limit"))?,
                weight,
            })
        }
        other => Err(cfg_err(join(path, "type"), format!("unknown branch type {other:?}"))),
    }
}

/// Monotone piecewise-linear interpolant through the samples and the two
/// one-sided endpoint limits.
fn interpolant(lo: f64, hi: f64, left: f64, right: f64, samples: &[(f64, f64)]) -> crate::map::Evaluator<f64> {
    let mut pts: Vec<(f64, f64)> = vec![(lo, left)];
    pts.extend(samples.iter().copied().filter(|(x, _)| *x > lo && *x < hi));
    pts.push((hi, right));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Arc::new(move |x: &f64| {
        let i = pts.partition_point(|p| p.0 <= *x).clamp(1, pts.len() - 1);
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    })
}

/// Parses a JSON configuration and validates the map.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Value = serde_json::from_str(text).map_err(|e| cfg_err("", format!("invalid JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| cfg_err("", "expected an object"))?;
    let interval = field(obj, "interval", "")?.as_array().ok_or_else(|| cfg_err("interval", "expected [a, b]"))?;
    if interval.len() != 2 {
        return Err(cfg_err("interval", "expected [a, b]"));
    }
    let a = number(&interval[0], "interval[0]")?;
    let b = number(&interval[1], "interval[1]")?;
    let cuts = match obj.get("cuts") {
        None => Vec::new(),
        Some(v) => {
            let arr = v.as_array().ok_or_else(|| cfg_err("cuts", "expected an array"))?;
            arr.iter().enumerate().map(|(i, c)| number(c, &format!("cuts[{i}]"))).collect::<Result<Vec<_>>>()?
        }
    };
    let branches = field(obj, "branches", "")?.as_array().ok_or_else(|| cfg_err("branches", "expected an array"))?;
    let raw = branches.iter().enumerate().map(|(i, b)| parse_branch(b, &format!("branches[{i}]"))).collect::<Result<Vec<_>>>()?;
    let any_generic = raw.iter().any(|b| matches!(b, RawBranch::Generic { .. }));
    let mode = match obj.get("mode").map(|m| m.as_str()) {
        None => {
            if any_generic {
                Mode::Numeric
            } else {
                Mode::Exact
            }
        }
        Some(Some("exact")) => Mode::Exact,
        Some(Some("numeric")) => Mode::Numeric,
        Some(_) => return Err(cfg_err("mode", "expected \"exact\" or \"numeric\"")),
    };
    if mode == Mode::Exact {
        if let Some(i) = raw.iter().position(|b| matches!(b, RawBranch::Generic { .. })) {
            return Err(cfg_err(format!("branches[{i}].type"), "generic branches require numeric mode"));
        }
    }
    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        eps_germ: f64_field(obj, "eps_germ", defaults.eps_germ)?,
        eps_inv: f64_field(obj, "eps_inv", defaults.eps_inv)?,
        eps_markov: f64_field(obj, "eps_markov", defaults.eps_markov)?,
        ..defaults
    };
    let series_order = usize_field(obj, "series_order", DEFAULT_ORDER)?;
    if series_order == 0 {
        return Err(cfg_err("series_order", "must be positive"));
    }
    let nmax = usize_field(obj, "nmax", DEFAULT_NMAX)?;
    if nmax == 0 {
        return Err(cfg_err("nmax", "must be positive"));
    }
    let tol_zero = f64_field(obj, "tol_zero", DEFAULT_TOL_ZERO)?;

    let bounds: Vec<Rational> = std::iter::once(a.clone()).chain(cuts.iter().cloned()).chain(std::iter::once(b.clone())).collect();
    let map = match mode {
        Mode::Exact => {
            let brs = raw
                .into_iter()
                .map(|r| match r {
                    RawBranch::Linear { slope, intercept, weight } => Branch::linear(slope, intercept, weight),
                    RawBranch::Generic { .. } => unreachable!("rejected above"),
                })
                .collect();
            AnyMap::Exact(MapSpec::new(a, b, cuts, brs)?.with_tolerances(tolerances))
        }
        Mode::Numeric => {
            let f = |x: &Rational| x.as_f64();
            let mut brs = Vec::with_capacity(raw.len());
            for (k, r) in raw.into_iter().enumerate() {
                brs.push(match r {
                    RawBranch::Linear { slope, intercept, weight } => Branch::linear(f(&slope), f(&intercept), f(&weight)),
                    RawBranch::Generic { samples, left, right, weight } => {
                        let (lo, hi) = match (bounds.get(k), bounds.get(k + 1)) {
                            (Some(lo), Some(hi)) => (f(lo), f(hi)),
                            _ => return Err(cfg_err("branches", "one branch per cut interval required")),
                        };
                        let s: Vec<(f64, f64)> = samples.iter().map(|(x, y)| (f(x), f(y))).collect();
                        let (l, r) = (f(&left), f(&right));
                        let sign = if r >= l { Sign::Plus } else { Sign::Minus };
                        Branch::generic(interpolant(lo, hi, l, r, &s), l, r, sign, f(&weight))
                    }
                });
            }
            AnyMap::Numeric(
                MapSpec::new(f(&a), f(&b), cuts.iter().map(f).collect(), brs)?.with_tolerances(tolerances),
            )
        }
    };
    Ok(RunConfig {
        map,
        mode,
        tolerances,
        tol_zero,
        series_order,
        nmax,
        output: None,
        n: None,
        t: None,
    })
}

/// Scalars that know their JSON form: exact rationals become integers or
/// `"p/q"` strings, floats are written with 17 significant digits.
pub trait Emit: Real {
    fn from_rational(r: &Rational) -> Option<Self>;
    fn emit(&self) -> Value;
    fn emit_csv(&self) -> String;
}

impl Emit for Rational {
    fn from_rational(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }

    fn emit(&self) -> Value {
        if self.is_integer() {
            if let Some(i) = self.to_integer().to_i64() {
                return json!(i);
            }
        }
        Value::String(format_rational(self))
    }

    fn emit_csv(&self) -> String {
        format_rational(self)
    }
}

impl Emit for f64 {
    fn from_rational(r: &Rational) -> Option<Self> {
        Real::from_f64(r.as_f64())
    }

    fn emit(&self) -> Value {
        float(*self)
    }

    fn emit_csv(&self) -> String {
        format_f64(*self)
    }
}

/// Decimal text with 17 significant digits, trailing zeros removed.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "Infinity".into() } else { "-Infinity".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let body = if (-6..21).contains(&exp) {
        if exp < 0 {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        } else {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                format!("{}{}", digits, "0".repeat(int_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        }
    } else {
        let (head, tail) = digits.split_at(1);
        if tail.is_empty() {
            format!("{head}e{exp}")
        } else {
            format!("{head}.{tail}e{exp}")
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format_f64(x));
    }
    serde_json::from_str(&format_f64(x)).unwrap_or(Value::Null)
}

fn complex(z: Complex64) -> Value {
    json!({"re": float(z.re), "im": float(z.im)})
}

fn poly_json<T: Emit>(p: &Poly<T>) -> Value {
    if p.coeffs().is_empty() {
        return json!([0]);
    }
    Value::Array(p.coeffs().iter().map(Emit::emit).collect())
}

fn ratfunc_json<T: Emit>(r: &RationalFunction<T>) -> Value {
    json!({"num": poly_json(r.numerator()), "den": poly_json(r.denominator())})
}

fn error_doc(e: &Error) -> Value {
    json!({"error": e.code(), "detail": e.to_string()})
}

/// Exit status for an error: 1 for usage and configuration problems, 2 for
/// domain errors.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config { .. } | Error::InvalidMap(_) => 1,
        _ => 2,
    }
}

enum Doc {
    Json(Value),
    Csv(String),
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn parse_t<T: Emit>(text: &str) -> Result<T> {
    let r = parse_rational(text)
        .or_else(|| text.parse::<f64>().ok().and_then(Rational::from_float))
        .ok_or_else(|| Error::Usage(format!("--t: cannot parse {text:?}")))?;
    T::from_rational(&r).ok_or_else(|| Error::Usage("--t out of range".into()))
}

fn command_for<T: Emit>(command: Command, spec: &MapSpec<T>, cfg: &RunConfig) -> Result<Doc> {
    let mode_name = if T::EXACT { "exact" } else { "numeric" };
    let format = cfg.output;
    let sequence_default = |f: Option<OutputFormat>| f.unwrap_or(OutputFormat::Csv);
    let json_only = |f: Option<OutputFormat>| -> Result<()> {
        match f {
            Some(OutputFormat::Csv) => Err(Error::Usage(format!("{command:?} has no CSV form"))),
            _ => Ok(()),
        }
    };
    let nmax = cfg.n.unwrap_or(cfg.nmax);
    match command {
        Command::Validate => {
            json_only(format)?;
            Ok(Doc::Json(json!({
                "valid": true,
                "mode": mode_name,
                "d": spec.d(),
                "interval": [spec.a().emit(), spec.b().emit()],
                "unit_weights": spec.has_unit_weights(),
                "markov": oracle::markov_transition(spec).is_ok(),
            })))
        }
        Command::KneadingMatrix => {
            let order = cfg.n.unwrap_or(cfg.series_order);
            let matrix = if T::EXACT && cfg.n.is_none() {
                kneading::kneading_matrix(spec, MatrixMode::exact())?
            } else {
                kneading::kneading_matrix(spec, MatrixMode::Series(order))?
            };
            match (&matrix, format.unwrap_or(OutputFormat::Json)) {
                (KneadingMatrix::Exact(m), OutputFormat::Json) => Ok(Doc::Json(json!({
                    "mode": mode_name,
                    "rows": m.to_rows().iter().map(|r| r.iter().map(ratfunc_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
                }))),
                (KneadingMatrix::Series(m), OutputFormat::Json) => Ok(Doc::Json(json!({
                    "mode": mode_name,
                    "order": order,
                    "rows": m.to_rows().iter().map(|r| r.iter().map(|s| s.coeffs().iter().map(Emit::emit).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                }))),
                (_, OutputFormat::Csv) => {
                    let series = match &matrix {
                        KneadingMatrix::Series(m) => m.clone(),
                        KneadingMatrix::Exact(m) => m.map(|r| r.to_series(order).expect("denominator with unit constant term")),
                    };
                    let mut rows = Vec::new();
                    for i in 0..series.rows() {
                        for j in 0..series.cols() {
                            for (n, c) in series.get(i, j).coeffs().iter().enumerate() {
                                rows.push(format!("{i},{j},{n},{}", c.emit_csv()));
                            }
                        }
                    }
                    Ok(Doc::Csv(csv("row,col,n,coefficient", rows)))
                }
            }
        }
        Command::Determinant => {
            let order = cfg.n.unwrap_or(cfg.series_order);
            let exact = spectral::exact_determinant(spec)?;
            let series: Vec<T> = match &exact {
                Some(d) => d.taylor(order).expect("denominator with unit constant term"),
                None => {
                    let m = kneading::kneading_matrix(spec, MatrixMode::Series(order))?;
                    kneading::mt_determinant(&m).as_series().expect("series mode").coeffs().to_vec()
                }
            };
            if format == Some(OutputFormat::Csv) {
                return Ok(Doc::Csv(csv("n,coefficient", series.iter().enumerate().map(|(n, c)| format!("{n},{}", c.emit_csv())))));
            }
            let mut doc = Map::new();
            doc.insert("mode".into(), json!(mode_name));
            if let Some(d) = &exact {
                doc.insert("exact".into(), ratfunc_json(d));
            }
            doc.insert("series".into(), Value::Array(series.iter().map(Emit::emit).collect()));
            if let Some(t) = &cfg.t {
                let tv: T = parse_t(t)?;
                doc.insert("t".into(), tv.emit());
                match &exact {
                    Some(d) => {
                        doc.insert("value".into(), d.eval(&tv).emit());
                    }
                    None => {
                        let v = kneading::eval_determinant(spec, Complex64::new(tv.as_f64(), 0.0), cfg.tol_zero)?;
                        doc.insert("value".into(), float(v.value.re));
                        doc.insert("error_bound".into(), float(v.error_bound));
                        doc.insert("order".into(), json!(v.order));
                    }
                }
            }
            Ok(Doc::Json(Value::Object(doc)))
        }
        Command::Entropy => {
            json_only(format)?;
            let z = spectral::smallest_zero(spec, cfg.tol_zero)?;
            Ok(Doc::Json(json!({
                "t_star": float(z.t_star),
                "h_top": z.h_top.map_or(Value::Null, float),
                "rho_sp": float(z.rho_sp),
                "method": z.method.name(),
            })))
        }
        Command::Zeros => {
            let z = spectral::peripheral_zeros(spec, cfg.tol_zero)?;
            if format == Some(OutputFormat::Csv) {
                return Ok(Doc::Csv(csv(
                    "re,im,multiplicity",
                    z.zeros.iter().map(|p| format!("{},{},{}", format_f64(p.t.re), format_f64(p.t.im), p.multiplicity)),
                )));
            }
            Ok(Doc::Json(json!({
                "radius": float(z.radius),
                "complete": z.complete,
                "method": z.method,
                "zeros": z.zeros.iter().map(|p| json!({"t": complex(p.t), "multiplicity": p.multiplicity})).collect::<Vec<_>>(),
            })))
        }
        Command::DualCheck => {
            json_only(format)?;
            let dual = DualOperatorMatrices::new(spec, cfg.n.unwrap_or(10_000))?;
            let checks = dual.kernel_and_antisymmetry();
            let points: Vec<T> = match &cfg.t {
                Some(t) => vec![parse_t(t)?],
                None => vec![T::zero(), T::from_ratio(1, 7), T::from_ratio(3, 10)],
            };
            let residuals = points
                .iter()
                .map(|t| Ok(json!({"t": t.emit(), "residual": dual.factorization_residual(t)?.emit()})))
                .collect::<Result<Vec<_>>>()?;
            let mut doc = Map::new();
            doc.insert("carrier".into(), json!(dual.carrier.iter().map(ToString::to_string).collect::<Vec<_>>()));
            doc.insert("kernel_residual".into(), checks.kernel.emit());
            doc.insert("antisymmetry_residual".into(), checks.antisymmetry.emit());
            doc.insert("idempotence_residual".into(), dual.idempotence_defect().emit());
            doc.insert("p_rank".into(), json!(dual.p_rank(1e-9)));
            doc.insert("d_plus_1".into(), json!(spec.d() + 1));
            doc.insert("factorization_residuals".into(), Value::Array(residuals));
            doc.insert("eigenvalues".into(), Value::Array(dual.eigenvalues().into_iter().map(complex).collect()));
            if let Some(d) = spectral::exact_determinant(spec)? {
                let (l, s) = dual.characteristic_determinants();
                let holds = RationalFunction::from_poly(l) == d * RationalFunction::from_poly(s);
                doc.insert("determinant_identity".into(), json!(holds));
            }
            Ok(Doc::Json(Value::Object(doc)))
        }
        Command::LapCounts => {
            let seq = oracle::omega_sequence(spec, nmax)?;
            match sequence_default(format) {
                OutputFormat::Csv => Ok(Doc::Csv(csv("n,count", seq.iter().enumerate().map(|(i, w)| format!("{},{}", i + 1, w.emit_csv()))))),
                OutputFormat::Json => Ok(Doc::Json(json!({"counts": seq.iter().map(Emit::emit).collect::<Vec<_>>()}))),
            }
        }
        Command::OmegaIdentity => {
            let rows = (1..=nmax).map(|n| oracle::omega_identity_check(spec, n)).collect::<Result<Vec<_>>>()?;
            match sequence_default(format) {
                OutputFormat::Csv => Ok(Doc::Csv(csv(
                    "n,lhs,rhs,residual",
                    rows.iter().enumerate().map(|(i, r)| format!("{},{},{},{}", i + 1, r.lhs.emit_csv(), r.rhs.emit_csv(), r.residual.emit_csv())),
                ))),
                OutputFormat::Json => Ok(Doc::Json(json!({
                    "rows": rows.iter().enumerate().map(|(i, r)| json!({"n": i + 1, "lhs": r.lhs.emit(), "rhs": r.rhs.emit(), "residual": r.residual.emit()})).collect::<Vec<_>>(),
                }))),
            }
        }
        Command::RuelleDet => {
            json_only(format)?;
            let t = oracle::markov_transition(spec)?;
            let p = oracle::ruelle_determinant(&t);
            let mut doc = json!({
                "poly": poly_json(&p),
                "transition": t.to_rows().iter().map(|r| r.iter().map(Emit::emit).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
            if let Some(d) = spectral::exact_determinant(spec)? {
                doc["ratio_to_kneading"] = ratfunc_json(&(RationalFunction::from_poly(p) / d));
            }
            Ok(Doc::Json(doc))
        }
        Command::SpectralReport => {
            json_only(format)?;
            let r = spectral::spectral_report(spec, cfg.tol_zero, nmax.clamp(1, 30))?;
            let oracle_entropy = oracle::entropy_oracle(spec, nmax)?;
            Ok(Doc::Json(json!({
                "mode": mode_name,
                "t_star": float(r.t_star),
                "h_top": r.h_top.map_or(Value::Null, float),
                "rho_sp": float(r.rho_sp),
                "rho_infty": float(r.rho_infty),
                "rho_1": r.rho_1.iter().copied().map(float).collect::<Vec<_>>(),
                "method": r.method.name(),
                "peripheral_zeros": r.peripheral_zeros.zeros.iter().map(|p| json!({"t": complex(p.t), "multiplicity": p.multiplicity})).collect::<Vec<_>>(),
                "zeros_complete": r.peripheral_zeros.complete,
                "oracle_entropy": float(oracle_entropy.value),
                "oracle_entropy_sequence": oracle_entropy.sequence.iter().copied().map(float).collect::<Vec<_>>(),
            })))
        }
    }
}

fn render(doc: Doc) -> String {
    match doc {
        Doc::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
        Doc::Csv(s) => s,
    }
}

/// Runs a command; returns the exit status and the document for standard
/// output. Errors are reported as `{"error": code, "detail": ...}`.
pub fn run(command: Command, cfg: &RunConfig) -> (i32, String) {
    let mut cfg = cfg.clone();
    if command == Command::LapCounts || command == Command::OmegaIdentity {
        cfg.output = cfg.output.or(Some(OutputFormat::Csv));
    }
    let result = match &cfg.map {
        AnyMap::Exact(spec) => command_for(command, spec, &cfg),
        AnyMap::Numeric(spec) => command_for(command, spec, &cfg),
    };
    match result {
        Ok(doc) => (0, render(doc)),
        Err(e) => (exit_code(&e), render(Doc::Json(error_doc(&e)))),
    }
}

/// Entry point shared by the binary and the tests. Returns the exit
/// status, standard output and standard error.
pub fn main_with_args<I, S>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (code, String::new(), e.to_string());
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            let e = Error::Usage("--threads must be positive".into());
            return (1, render(Doc::Json(error_doc(&e))), e.to_string());
        }
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            let e = Error::Usage(format!("cannot read {}: {e}", cli.config.display()));
            return (1, render(Doc::Json(error_doc(&e))), e.to_string());
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return (exit_code(&e), render(Doc::Json(error_doc(&e))), e.to_string()),
    };
    cfg.output = cli.output;
    cfg.n = cli.n;
    cfg.t = cli.t;
    let (code, out) = run(cli.command, &cfg);
    let err = if code == 0 { String::new() } else { out.clone() };
    (code, out, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = r#"{
        "interval": [0, 1],
        "cuts": ["1/2"],
        "branches": [
            {"type": "linear", "slope": 2, "intercept": 0, "weight": 1},
            {"type": "linear", "slope": 1, "intercept": "-1/2", "weight": 1}
        ],
        "mode": "exact"
    }"#;

    fn golden() -> RunConfig {
        parse_config(GOLDEN).unwrap()
    }

    #[test]
    fn parses_golden_config() {
        let cfg = golden();
        assert_eq!(cfg.mode, Mode::Exact);
        assert_eq!(cfg.series_order, DEFAULT_ORDER);
        match cfg.map {
            AnyMap::Exact(spec) => assert_eq!(spec.d(), 1),
            AnyMap::Numeric(_) => panic!("expected exact mode"),
        }
    }

    #[test]
    fn missing_branches() {
        let err = parse_config(r#"{"interval": [0, 1], "cuts": []}"#).unwrap_err();
        assert_eq!(err.to_string(), "branches: required");
    }

    #[test]
    fn zero_slope_is_rejected_by_validation() {
        let text = GOLDEN.replace(r#""slope": 2"#, r#""slope": "0""#);
        assert!(matches!(parse_config(&text), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn generic_branch_needs_numeric_mode() {
        let text = r#"{"interval": [0, 1], "branches": [{"type": "generic", "samples": [[0.5, 0.25]], "left_limit": 0, "right_limit": 1}], "mode": "exact"}"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().starts_with("branches[0].type"));
        let cfg = parse_config(&text.replace("exact", "numeric")).unwrap();
        let (code, out) = run(Command::LapCounts, &RunConfig { n: Some(3), ..cfg });
        assert_eq!(code, 0);
        assert_eq!(out, "n,count\n1,1\n2,1\n3,1\n");
    }

    #[test]
    fn entropy_document() {
        let (code, out) = run(Command::Entropy, &golden());
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!((v["t_star"].as_f64().unwrap() - 0.618_033_988_749_895).abs() < 1e-12);
        assert!((v["h_top"].as_f64().unwrap() - 0.481_211_825_059_603_4).abs() < 1e-12);
        assert_eq!(v["method"], "exact-sturm");
    }

    #[test]
    fn ruelle_document() {
        let (code, out) = run(Command::RuelleDet, &golden());
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["poly"], json!([1, -1, -1]));
    }

    #[test]
    fn lap_count_csv() {
        let (code, out) = run(Command::LapCounts, &RunConfig { n: Some(4), ..golden() });
        assert_eq!(code, 0);
        assert_eq!(out, "n,count\n1,2\n2,3\n3,5\n4,8\n");
    }

    #[test]
    fn domain_errors_are_structured() {
        let text = r#"{"interval": [0, 1], "cuts": [0.5], "branches": [
            {"slope": 1.4142135623730951, "intercept": 0}, {"slope": 1, "intercept": -0.5}], "mode": "numeric"}"#;
        let (code, out) = run(Command::RuelleDet, &parse_config(text).unwrap());
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["error"], "NotMarkov");
        assert!(v["detail"].is_string());
    }

    #[test]
    fn exact_output_is_deterministic() {
        let a = run(Command::DualCheck, &golden());
        let b = run(Command::DualCheck, &golden());
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a.1).unwrap();
        assert_eq!(v["kernel_residual"], json!(0));
        assert_eq!(v["p_rank"], json!(2));
        assert_eq!(v["determinant_identity"], json!(true));
    }

    #[test]
    fn determinant_document() {
        let (code, out) = run(Command::Determinant, &RunConfig { n: Some(6), t: Some("1/3".into()), ..golden() });
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["exact"]["num"], json!([1, -1, -1]));
        assert_eq!(v["exact"]["den"], json!([1, -1, -1, 1]));
        assert_eq!(v["series"], json!([1, 0, 0, -1, -1, -2, -2]));
        // (1 - 1/3 - 1/9) / ((2/3)^2 (4/3)) = 15/16
        assert_eq!(v["value"], json!("15/16"));
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(0.618_033_988_749_894_8), "0.61803398874989479");
        assert_eq!(format_f64(-2.0), "-2");
        assert_eq!(format_f64(1e-9), "1.0000000000000001e-9");
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(1.0e22), "1e22");
        assert_eq!(format_f64(123.25), "123.25");
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 6.02e23, -4.9e-324] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn usage_errors() {
        let (code, _, err) = main_with_args(["kneading", "entropy"]);
        assert_eq!(code, 1);
        assert!(!err.is_empty());
        let (code, out, _) = main_with_args(["kneading", "entropy", "--config", "/nonexistent/config.json"]);
        assert_eq!(code, 1);
        assert!(out.contains("Usage"));
        assert_eq!("dual-check".parse::<Command>().unwrap(), Command::DualCheck);
        let (code, out) = run(Command::Entropy, &RunConfig { output: Some(OutputFormat::Csv), ..golden() });
        assert_eq!(code, 1);
        assert!(out.contains("Usage"));
    }
}
