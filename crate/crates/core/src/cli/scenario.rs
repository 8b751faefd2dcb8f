//! JSON scenarios and their reports.

use std::path::Path;
use std::sync::Arc;

use num_traits::Zero;
use serde::Deserialize;
use serde_json::{json, Value as Json};

use super::eval::{EvalError, Session, Value};
use super::expr::parse_decimal;
use super::numexpr::ZFunction;
use super::CliError;
use crate::algebra::{parse_rational, Rational, UnivariateSeries};
use crate::classes::CharSeries;
use crate::numeric::bott_chern::{bott_chern_numeric, integrate_log_weight, verify_downstairs};
use crate::numeric::forms::{char_form, connection_curvature, ddc, degree, first_chern_line, MetricFn};
use crate::numeric::{
    BottChernOptions, CMat, Chart, ChartGrid, Cutoff, DeformationDatum, HermitianMetric, MetricSample, NumericError, C64,
};
use crate::rr::{build_tower, err_transfer_o, err_transfer_ominus1, euler_characteristic, solve_r, tower_identity_check};

/// Rounds to 12 significant digits; NaN and infinities are kept.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// JSON number with 12 significant digits (`null` if not finite).
pub fn num(x: f64) -> Json {
    let r = round12(x);
    if r.is_finite() {
        json!(r)
    } else {
        Json::Null
    }
}

/// `%.12g`-style text.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..12).contains(&exp) {
        trim(format!("{:.*}", (11 - exp).max(0) as usize, x))
    } else {
        format!("{}e{exp}", trim(mant.to_string()))
    }
}

/// A coefficient given as a JSON integer, float or string (`"1/3"`, `"0.25"`).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Coeff {
    pub fn to_rational(&self) -> Result<Rational, CliError> {
        let text = match self {
            Coeff::Int(k) => return Ok(Rational::from_integer((*k).into())),
            Coeff::Float(x) => x.to_string(),
            Coeff::Text(s) => s.clone(),
        };
        let t = text.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let v = parse_rational(body)
            .or_else(|| parse_decimal(body))
            .ok_or_else(|| CliError::Input(format!("not a rational number: '{text}'")))?;
        Ok(if neg { -v } else { v })
    }
}

pub fn series_from(coeffs: &[Coeff]) -> Result<UnivariateSeries, CliError> {
    if coeffs.is_empty() {
        return Err(CliError::Input("empty coefficient list".into()));
    }
    Ok(UnivariateSeries::from_coeffs(coeffs.iter().map(Coeff::to_rational).collect::<Result<_, _>>()?))
}

fn rationals_json(s: &UnivariateSeries) -> Json {
    Json::Array(s.coeffs().iter().map(|c| Json::String(c.to_string())).collect())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ClassSpec {
    Named(String),
    Additive { additive: Vec<Coeff> },
    Multiplicative { multiplicative: Vec<Coeff> },
}

impl Default for ClassSpec {
    fn default() -> Self {
        ClassSpec::Named("ch".into())
    }
}

impl ClassSpec {
    fn build(&self) -> Result<CharSeries, CliError> {
        match self {
            ClassSpec::Named(n) if n == "ch" => Ok(CharSeries::ChernCharacter),
            ClassSpec::Named(n) if n == "td" => Ok(CharSeries::Todd),
            ClassSpec::Named(n) => Err(CliError::Input(format!("unknown class '{n}' (use ch, td, additive, multiplicative)"))),
            ClassSpec::Additive { additive } => {
                CharSeries::additive(series_from(additive)?).map_err(|e| CliError::Input(e.to_string()))
            }
            ClassSpec::Multiplicative { multiplicative } => {
                CharSeries::multiplicative(series_from(multiplicative)?).map_err(|e| CliError::Input(e.to_string()))
            }
        }
    }
}

/// A metric on the base chart: one expression for a line bundle or a matrix
/// of expressions.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Scalar(String),
    Matrix(Vec<Vec<String>>),
}

impl MetricSpec {
    fn rank(&self) -> usize {
        match self {
            MetricSpec::Scalar(_) => 1,
            MetricSpec::Matrix(rows) => rows.len(),
        }
    }

    fn build(&self) -> Result<MetricFn, CliError> {
        let rows: Vec<Vec<String>> = match self {
            MetricSpec::Scalar(s) => vec![vec![s.clone()]],
            MetricSpec::Matrix(rows) => rows.clone(),
        };
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Input("metric matrix must be square and non-empty".into()));
        }
        let fns: Vec<Vec<ZFunction>> = rows
            .iter()
            .map(|r| r.iter().map(|s| ZFunction::parse(s).map_err(CliError::from)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        Ok(Arc::new(move |z: C64| {
            let mut m = CMat::zeros(n, n);
            for (i, row) in fns.iter().enumerate() {
                for (j, f) in row.iter().enumerate() {
                    m[(i, j)] = f.eval(z);
                }
            }
            m
        }))
    }
}

fn real_matrix(rows: &[Vec<f64>], cols_if_empty: usize) -> CMat {
    if rows.is_empty() {
        return CMat::zeros(0, cols_if_empty);
    }
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    CMat::from_real_rows(&refs)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DatumSpec {
    /// `E1 = E2 = L`, metric `rho1` on `E1` and `rho2` on `E2`.
    MetricChange { rho1: MetricSpec, rho2: MetricSpec },
    Split { h1: MetricSpec, h3: MetricSpec },
    Sequence { h1: MetricSpec, h2: MetricSpec, h3: Option<MetricSpec>, iota: Vec<Vec<f64>>, pi: Vec<Vec<f64>> },
}

impl DatumSpec {
    fn build(&self) -> Result<DeformationDatum, CliError> {
        Ok(match self {
            DatumSpec::MetricChange { rho1, rho2 } => {
                if rho1.rank() != 1 || rho2.rank() != 1 {
                    return Err(CliError::Input("metric_change needs line-bundle metrics".into()));
                }
                DeformationDatum::metric_change(rho1.build()?, rho2.build()?)
            }
            DatumSpec::Split { h1, h3 } => DeformationDatum::split(h1.build()?, h3.build()?, h1.rank(), h3.rank()),
            DatumSpec::Sequence { h1, h2, h3, iota, pi } => {
                let h3f = h3.as_ref().map(|m| m.build()).transpose()?;
                DeformationDatum::new(h1.build()?, h2.build()?, h3f, real_matrix(iota, 0), real_matrix(pi, h2.rank()))
                    .map_err(|e| CliError::Input(e.to_string()))?
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum CutoffSpec {
    #[default]
    Mollifier,
    Smoothstep,
}

impl CutoffSpec {
    fn build(self) -> Cutoff {
        match self {
            CutoffSpec::Mollifier => Cutoff::Mollifier,
            CutoffSpec::Smoothstep => Cutoff::SmoothStep { inner: 0.25 },
        }
    }
}

fn default_n() -> usize {
    128
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NumericCheck {
    /// `int c1(O(k), h)` with `h = e^{-weight} FS^k`, compared with `k`.
    Degree {
        degree: i32,
        #[serde(default)]
        weight: Option<String>,
        #[serde(default = "default_n")]
        n: usize,
        tolerance: f64,
    },
    /// `dd^c(-log |s|^2)` against the curvature route, max-norm.
    TwoPath {
        degree: i32,
        #[serde(default)]
        weight: Option<String>,
        #[serde(default = "default_n")]
        n: usize,
        tolerance: f64,
    },
    Downstairs {
        datum: DatumSpec,
        #[serde(default)]
        class: ClassSpec,
        #[serde(default)]
        cutoff: CutoffSpec,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default)]
        coarse_n: Option<usize>,
        tolerance: f64,
        #[serde(default)]
        min_ratio: Option<f64>,
    },
    Splitting {
        datum: DatumSpec,
        #[serde(default)]
        class: ClassSpec,
        #[serde(default = "default_n")]
        n: usize,
        tolerance: f64,
        #[serde(default = "default_true")]
        pullback: bool,
    },
    CutoffIndependence {
        datum: DatumSpec,
        #[serde(default)]
        class: ClassSpec,
        #[serde(default = "default_n")]
        n: usize,
        tolerance: f64,
    },
    LogWeight {
        density_z: String,
        density_w: String,
        expected: f64,
        tolerance: f64,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolicCase {
    #[serde(default)]
    pub setup: Option<String>,
    pub expr: String,
    #[serde(default)]
    pub expected: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerConfig {
    pub base: String,
    pub f: String,
    pub f_prime: String,
    #[serde(default = "default_p")]
    pub p: Vec<Coeff>,
    #[serde(default = "default_e")]
    pub e: String,
}

fn default_p() -> Vec<Coeff> {
    vec![Coeff::Int(0), Coeff::Int(1)]
}

fn default_e() -> String {
    "O".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    Symbolic {
        name: String,
        cases: Vec<SymbolicCase>,
    },
    Numeric {
        name: String,
        checks: Vec<NumericCheck>,
    },
    SolveR {
        name: String,
        order: usize,
        /// Round trip: targets are computed from this series.
        #[serde(default)]
        series: Option<Vec<Coeff>>,
        #[serde(default)]
        target_o: Option<Vec<Coeff>>,
        #[serde(default)]
        target_o1: Option<Vec<Coeff>>,
        #[serde(default)]
        expected: Option<Vec<Coeff>>,
    },
    TowerCheck {
        name: String,
        configs: Vec<TowerConfig>,
    },
    Hrr {
        name: String,
        max_n: u32,
        max_k: i64,
    },
}

impl Scenario {
    pub fn name(&self) -> &str {
        match self {
            Scenario::Symbolic { name, .. }
            | Scenario::Numeric { name, .. }
            | Scenario::SolveR { name, .. }
            | Scenario::TowerCheck { name, .. }
            | Scenario::Hrr { name, .. } => name,
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            Scenario::Symbolic { .. } => "symbolic",
            Scenario::Numeric { .. } => "numeric",
            Scenario::SolveR { .. } => "solve-r",
            Scenario::TowerCheck { .. } => "tower-check",
            Scenario::Hrr { .. } => "hrr",
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("invalid scenario at line {}, column {}: {e}", e.line(), e.column())))
}

/// A finished report: JSON summary, overall verdict, optional CSV grids.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: Json,
    pub pass: bool,
    pub grids: Vec<(String, String)>,
}

pub fn run_scenario(s: &Scenario) -> Result<Report, CliError> {
    let (results, grids) = match s {
        Scenario::Symbolic { cases, .. } => (run_symbolic(cases)?, Vec::new()),
        Scenario::Numeric { checks, .. } => run_numeric(checks)?,
        Scenario::SolveR { order, series, target_o, target_o1, expected, .. } => {
            (vec![run_solve_r(*order, series.as_deref(), target_o.as_deref(), target_o1.as_deref(), expected.as_deref())?], Vec::new())
        }
        Scenario::TowerCheck { configs, .. } => (configs.iter().map(run_tower).collect::<Result<_, _>>()?, Vec::new()),
        Scenario::Hrr { max_n, max_k, .. } => (hrr_table(*max_n, *max_k), Vec::new()),
    };
    let pass = results.iter().all(|r| r["pass"] == json!(true));
    let json = json!({
        "name": s.name(),
        "mode": s.mode(),
        "pass": pass,
        "results": results,
    });
    Ok(Report { json, pass, grids })
}

fn run_symbolic(cases: &[SymbolicCase]) -> Result<Vec<Json>, CliError> {
    let mut out = Vec::new();
    for case in cases {
        let mut session = Session::new();
        if let Some(setup) = &case.setup {
            session.run(setup)?;
        }
        let value = session.run(&case.expr)?;
        let mut entry = json!({ "expr": case.expr, "value": value.to_string() });
        let pass = match &case.expected {
            Some(text) => {
                // read the expected value on the space the result lives on
                if let Value::Element(_, space) = &value {
                    session.set_ambient(space.clone());
                }
                let expected = session.run(text)?;
                entry["expected"] = json!(expected.to_string());
                session.values_equal(&value, &expected)
            }
            None => true,
        };
        entry["pass"] = json!(pass);
        out.push(entry);
    }
    Ok(out)
}

/// `chi(P^n, O(k))` against binomials for `0 <= n <= max_n`, `-n <= k <= max_k`.
pub fn hrr_table(max_n: u32, max_k: i64) -> Vec<Json> {
    let mut out = Vec::new();
    for n in 0..=max_n {
        for k in -(n as i64)..=max_k {
            let chi = euler_characteristic(n, k);
            let expected = if k < 0 { Rational::zero() } else { crate::rr::binomial_rational(n as i64 + k, n as i64) };
            out.push(json!({
                "n": n,
                "k": k,
                "chi": chi.to_string(),
                "expected": expected.to_string(),
                "pass": chi == expected,
            }));
        }
    }
    out
}

pub fn run_solve_r(
    order: usize,
    series: Option<&[Coeff]>,
    target_o: Option<&[Coeff]>,
    target_o1: Option<&[Coeff]>,
    expected: Option<&[Coeff]>,
) -> Result<Json, CliError> {
    use crate::rr::ErrOperatorResult;
    let m = order / 2;
    let (to, to1, expected) = match (series, target_o, target_o1) {
        (Some(s), None, None) => {
            let r = series_from(s)?.with_order(order);
            let to = err_transfer_o(&r, m).map_err(CliError::compute)?;
            let to1 = err_transfer_ominus1(&r, m).map_err(CliError::compute)?;
            (to, to1, Some(r))
        }
        (None, Some(a), Some(b)) => {
            let wrap = |c: &[Coeff]| series_from(c).map(|s| ErrOperatorResult { series_in_u: s });
            (wrap(a)?, wrap(b)?, expected.map(series_from).transpose()?.map(|s| s.with_order(order)))
        }
        _ => return Err(CliError::Input("give either 'series' or both 'target_o' and 'target_o1'".into())),
    };
    let sol = solve_r(&to, &to1, order).map_err(CliError::compute)?;
    let r = sol.series();
    let pass = expected.as_ref().is_none_or(|e| *e == r);
    Ok(json!({
        "order": order,
        "target_o": rationals_json(&to.series_in_u),
        "target_o1": rationals_json(&to1.series_in_u),
        "r": rationals_json(&r),
        "r_even": rationals_json(&sol.r_even),
        "r_odd": rationals_json(&sol.r_odd),
        "pass": pass,
    }))
}

fn space_of(session: &mut Session, text: &str) -> Result<Arc<crate::spaces::SpaceModel>, CliError> {
    match session.run(text)? {
        Value::Space(s) => Ok(s),
        other => Err(CliError::Input(format!("'{text}' is not a space (got {other})"))),
    }
}

fn bundle_of(session: &mut Session, text: &str) -> Result<crate::classes::FormalBundle, CliError> {
    match session.run(text)? {
        Value::Bundle(b, _) => Ok(b),
        other => Err(CliError::Input(format!("'{text}' is not a bundle (got {other})"))),
    }
}

pub fn run_tower(cfg: &TowerConfig) -> Result<Json, CliError> {
    let mut session = Session::new();
    let y = space_of(&mut session, &cfg.base)?;
    session.set_ambient(y.clone());
    let f = bundle_of(&mut session, &cfg.f)?;
    let fp = bundle_of(&mut session, &cfg.f_prime)?;
    let tower = build_tower(&y, &f, &fp).map_err(CliError::compute)?;
    let nz = tower.z.ring().ngens();
    let nx = tower.x.ring().ngens();
    session.register_hyperplane(&tower.z, tower.z.ring().generator(nz - 1));
    session.register_hyperplane(&tower.x, tower.x.ring().generator(nx - 1));
    session.set_ambient(tower.x.clone());
    let e = bundle_of(&mut session, &cfg.e)?;
    let p = series_from(&cfg.p)?;
    let report = tower_identity_check(&tower, &p, &e).map_err(CliError::compute)?;
    Ok(json!({
        "base": cfg.base,
        "f": cfg.f,
        "f_prime": cfg.f_prime,
        "e": cfg.e,
        "lhs": tower.y.reduce(&report.lhs).map_err(CliError::compute)?.to_string(),
        "residual": report.residual.to_string(),
        "pass": report.holds(),
    }))
}

fn line_metric(degree: i32, weight: &Option<String>) -> Result<HermitianMetric, CliError> {
    let w = ZFunction::parse(weight.as_deref().unwrap_or("0"))?;
    Ok(HermitianMetric::line(degree, Arc::new(move |z| w.eval(z).re)))
}

fn check_grid(n: usize) -> Result<(), CliError> {
    if !(8..=4096).contains(&n) {
        return Err(CliError::Input(format!("grid size {n} out of range 8..=4096")));
    }
    Ok(())
}

fn numeric_failure(kind: &str, e: NumericError) -> Json {
    json!({ "kind": kind, "error": e.to_string(), "pass": false })
}

fn grid_csv(values: &[(C64, f64, f64, f64)]) -> String {
    let mut s = String::from("re,im,lhs,rhs,residual\n");
    for (p, a, b, r) in values {
        s.push_str(&format!("{},{},{},{},{}\n", fmt12(p.re), fmt12(p.im), fmt12(*a), fmt12(*b), fmt12(*r)));
    }
    s
}

/// CSV grids as `(file name, contents)`.
type Grids = Vec<(String, String)>;

fn run_numeric(checks: &[NumericCheck]) -> Result<(Vec<Json>, Grids), CliError> {
    let mut out = Vec::new();
    let mut grids = Vec::new();
    for (idx, check) in checks.iter().enumerate() {
        let started = std::time::Instant::now();
        let mut entry = match check {
            NumericCheck::Degree { degree: k, weight, n, tolerance } => {
                check_grid(*n)?;
                let metric = line_metric(*k, weight)?;
                match degree(&metric, *n) {
                    Ok(v) => json!({
                        "kind": "degree", "n": n, "degree": k, "value": num(v),
                        "error": num((v - *k as f64).abs()), "tolerance": num(*tolerance),
                        "pass": (v - *k as f64).abs() < *tolerance,
                    }),
                    Err(e) => numeric_failure("degree", e),
                }
            }
            NumericCheck::TwoPath { degree: k, weight, n, tolerance } => {
                check_grid(*n)?;
                let metric = line_metric(*k, weight)?;
                match two_path(&metric, *n) {
                    Ok(diff) => json!({
                        "kind": "two_path", "n": n, "degree": k, "max_diff": num(diff),
                        "tolerance": num(*tolerance), "pass": diff < *tolerance,
                    }),
                    Err(e) => numeric_failure("two_path", e),
                }
            }
            NumericCheck::Downstairs { datum, class, cutoff, n, coarse_n, tolerance, min_ratio } => {
                check_grid(*n)?;
                let d = datum.build()?;
                let phi = class.build()?;
                let opts = BottChernOptions { cutoff: cutoff.build(), ..Default::default() };
                let fine = verify_downstairs(&d, &phi, &ChartGrid::new(Chart::Z, *n), &opts);
                match fine {
                    Err(e) => numeric_failure("downstairs", e),
                    Ok(fine) => {
                        let mut pass = fine.max_residual < *tolerance;
                        let mut entry = json!({
                            "kind": "downstairs", "n": n, "max_residual": num(fine.max_residual),
                            "tolerance": num(*tolerance),
                        });
                        if let Some(cn) = coarse_n {
                            check_grid(*cn)?;
                            match verify_downstairs(&d, &phi, &ChartGrid::new(Chart::Z, *cn), &opts) {
                                Ok(coarse) => {
                                    let ratio = coarse.max_residual / fine.max_residual;
                                    entry["coarse_n"] = json!(cn);
                                    entry["coarse_max_residual"] = num(coarse.max_residual);
                                    entry["ratio"] = num(ratio);
                                    if let Some(min) = min_ratio {
                                        entry["min_ratio"] = num(*min);
                                        pass &= ratio >= *min;
                                    }
                                }
                                Err(e) => {
                                    entry["coarse_error"] = json!(e.to_string());
                                    pass = false;
                                }
                            }
                        }
                        let g = &fine.lhs.grid;
                        let rows: Vec<_> = (0..g.len())
                            .filter(|&k| g.fits(k, g.order.half_width()))
                            .map(|k| (g.point_at(k), fine.lhs.values[k], fine.rhs.values[k], fine.residual.values[k]))
                            .collect();
                        grids.push((format!("check{idx}_downstairs.csv"), grid_csv(&rows)));
                        entry["pass"] = json!(pass);
                        entry
                    }
                }
            }
            NumericCheck::Splitting { datum, class, n, tolerance, pullback } => {
                check_grid(*n)?;
                let d = datum.build()?;
                let phi = class.build()?;
                let opts = BottChernOptions { split_pullback: *pullback, ..Default::default() };
                match bott_chern_numeric(&d, &phi, &ChartGrid::new(Chart::Z, *n), &opts) {
                    Ok(bc) => {
                        let m = bc.grade0.max_abs();
                        json!({
                            "kind": "splitting", "n": n, "max_abs": num(m), "pullback": bc.pullback,
                            "tolerance": num(*tolerance), "pass": m < *tolerance,
                        })
                    }
                    Err(e) => numeric_failure("splitting", e),
                }
            }
            NumericCheck::CutoffIndependence { datum, class, n, tolerance } => {
                check_grid(*n)?;
                let d = datum.build()?;
                let phi = class.build()?;
                match cutoff_independence(&d, &phi, *n) {
                    Ok((ddc_diff, raw_diff)) => json!({
                        "kind": "cutoff_independence", "n": n, "ddc_max_diff": num(ddc_diff),
                        "raw_max_diff": num(raw_diff), "tolerance": num(*tolerance), "pass": ddc_diff < *tolerance,
                    }),
                    Err(e) => numeric_failure("cutoff_independence", e),
                }
            }
            NumericCheck::LogWeight { density_z, density_w, expected, tolerance } => {
                let fz = ZFunction::parse(density_z)?;
                let fw = ZFunction::parse(density_w)?;
                let v = integrate_log_weight(&|z| fz.eval(z).re, &|w| fw.eval(w).re, &BottChernOptions::default(), 64);
                json!({
                    "kind": "log_weight", "value": num(v), "expected": num(*expected),
                    "tolerance": num(*tolerance), "pass": (v - expected).abs() < *tolerance,
                })
            }
        };
        entry["seconds"] = num(started.elapsed().as_secs_f64());
        out.push(entry);
    }
    Ok((out, grids))
}

/// Max-norm difference of `first_chern_line` and the curvature route on the
/// z chart, over nodes where every stencil fits.
pub fn two_path(metric: &HermitianMetric, n: usize) -> Result<f64, NumericError> {
    let grid = ChartGrid::new(Chart::Z, n);
    let sample = MetricSample::from_metric(&grid, metric)?;
    let ones = vec![C64::new(1.0, 0.0); grid.len()];
    let a = first_chern_line(&sample, &ones)?;
    let b = char_form(&connection_curvature(&sample)?, 1, &CharSeries::ChernCharacter).grade1;
    Ok(a.sub(&b).max_abs_inside(grid.order.half_width()))
}

/// `(max |dd^c phi_1 - dd^c phi_2|, max |phi_1 - phi_2|)` for the two cutoffs.
pub fn cutoff_independence(d: &DeformationDatum, phi: &CharSeries, n: usize) -> Result<(f64, f64), NumericError> {
    let grid = ChartGrid::new(Chart::Z, n);
    let a = BottChernOptions { cutoff: Cutoff::Mollifier, split_pullback: false, ..Default::default() };
    let b = BottChernOptions { cutoff: Cutoff::SmoothStep { inner: 0.25 }, ..a.clone() };
    let fa = bott_chern_numeric(d, phi, &grid, &a)?.grade0;
    let fb = bott_chern_numeric(d, phi, &grid, &b)?.grade0;
    let margin = grid.order.half_width();
    let ddc_diff = ddc(&fa)?.sub(&ddc(&fb)?).max_abs_inside(margin);
    Ok((ddc_diff, fa.sub(&fb).max_abs_inside(margin)))
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(2.0), "2");
        assert_eq!(fmt12(1.5e-7), "1.5e-7");
        assert_eq!(fmt12(-123456.0), "-123456");
        assert_eq!(fmt12(6.02214076e23), "6.02214076e23");
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(num(f64::NAN), Json::Null);
    }

    #[test]
    fn coefficients() {
        let c: Vec<Coeff> = serde_json::from_str(r#"[0, "1/3", 0.25, "-2", "-0.5"]"#).unwrap();
        let r: Vec<String> = c.iter().map(|x| x.to_rational().unwrap().to_string()).collect();
        assert_eq!(r, ["0", "1/3", "1/4", "-2", "-1/2"]);
        assert!(Coeff::Text("x".into()).to_rational().is_err());
    }

    #[test]
    fn symbolic_scenario() {
        let s = parse_scenario(
            r#"{"mode": "symbolic", "name": "s", "cases": [
                {"expr": "integrate(P(2), ch(O(3))*td(T))", "expected": "10"},
                {"setup": "X = proj_bundle(universal2(8), S)", "expr": "pushforward(proj(X), A(X)^3)",
                 "expected": "c1^2/4 - c2"},
                {"expr": "integrate(P(1), c(1, T))", "expected": "3"}
            ]}"#,
        )
        .unwrap();
        let rep = run_scenario(&s).unwrap();
        assert!(!rep.pass);
        let results = rep.json["results"].as_array().unwrap();
        assert_eq!(results[0]["pass"], json!(true));
        assert_eq!(results[1]["pass"], json!(true));
        assert_eq!(results[2]["pass"], json!(false));
    }

    #[test]
    fn malformed_scenarios() {
        assert!(matches!(parse_scenario("{ not json"), Err(CliError::Input(_))));
        assert!(parse_scenario(r#"{"mode": "bogus", "name": "x"}"#).is_err());
        assert!(parse_scenario(r#"{"mode": "hrr", "name": "x", "max_n": 1}"#).is_err());
    }

    #[test]
    fn hrr_and_solve_r() {
        let rep = run_scenario(&Scenario::Hrr { name: "h".into(), max_n: 2, max_k: 2 }).unwrap();
        assert!(rep.pass);
        let j = run_solve_r(4, Some(&[Coeff::Int(0), Coeff::Int(1), Coeff::Int(0), Coeff::Text("1/3".into())]), None, None, None)
            .unwrap();
        assert_eq!(j["pass"], json!(true));
        assert_eq!(j["r"], json!(["0", "1", "0", "1/3", "0"]));
    }

    #[test]
    fn tower_config() {
        let cfg = TowerConfig {
            base: "P(2)".into(),
            f: "sum(O(1), O)".into(),
            f_prime: "T".into(),
            p: default_p(),
            e: "O(-1)".into(),
        };
        assert_eq!(run_tower(&cfg).unwrap()["pass"], json!(true));
    }

    #[test]
    fn numeric_checks_run() {
        let s = parse_scenario(
            r#"{"mode": "numeric", "name": "n", "checks": [
                {"kind": "degree", "degree": 1, "n": 48, "tolerance": 1e-3},
                {"kind": "log_weight", "density_z": "1/(pi*(1+abs2(z))^2)", "density_w": "1/(pi*(1+abs2(z))^2)",
                 "expected": 0, "tolerance": 1e-10},
                {"kind": "splitting", "datum": {"type": "split", "h1": "1/(1+abs2(z))", "h3": "1"},
                 "n": 16, "tolerance": 1e-8}
            ]}"#,
        )
        .unwrap();
        let rep = run_scenario(&s).unwrap();
        assert!(rep.pass, "{}", rep.json);
    }
}
