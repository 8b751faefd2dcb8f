//! Python bindings for `charclass`.

use std::sync::Mutex;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use charclass::algebra::{parse_rational, Rational, UnivariateSeries};
use charclass::cli::scenario::{num, parse_scenario, run_scenario, two_path};
use charclass::cli::{parse_expr, render, Session as CoreSession};
use charclass::numeric::bott_chern::verify_downstairs;
use charclass::numeric::{BottChernOptions, Chart, ChartGrid, Cutoff, DeformationDatum, HermitianMetric};
use charclass::rr;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn rational(text: &str) -> PyResult<Rational> {
    let t = text.trim();
    match t.strip_prefix('-') {
        Some(rest) => parse_rational(rest).map(|r| -r),
        None => parse_rational(t),
    }
    .ok_or_else(|| value_err(format!("not a rational: '{text}'")))
}

fn strings(s: &UnivariateSeries) -> Vec<String> {
    s.coeffs().iter().map(|c| c.to_string()).collect()
}

/// Exact truncated power series; coefficients are given and returned as
/// strings such as `"1/3"`.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Series {
    inner: UnivariateSeries,
}

#[pymethods]
impl Series {
    #[new]
    #[pyo3(signature = (coeffs, order=None))]
    fn new(coeffs: Vec<String>, order: Option<usize>) -> PyResult<Self> {
        if coeffs.is_empty() {
            return Err(value_err("empty coefficient list"));
        }
        let cs = coeffs.iter().map(|c| rational(c)).collect::<PyResult<Vec<_>>>()?;
        let order = order.unwrap_or(cs.len() - 1);
        Ok(Self { inner: UnivariateSeries::new(cs, order) })
    }

    #[staticmethod]
    fn todd(order: usize) -> Self {
        Self { inner: UnivariateSeries::todd(order) }
    }

    #[staticmethod]
    fn exp(order: usize) -> Self {
        Self { inner: UnivariateSeries::exp_x(order) }
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn coeffs(&self) -> Vec<String> {
        strings(&self.inner)
    }

    fn __add__(&self, other: &Series) -> PyResult<Series> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(value_err)? })
    }

    fn __sub__(&self, other: &Series) -> PyResult<Series> {
        Ok(Self { inner: self.inner.sub(&other.inner).map_err(value_err)? })
    }

    fn __mul__(&self, other: &Series) -> PyResult<Series> {
        Ok(Self { inner: self.inner.mul(&other.inner).map_err(value_err)? })
    }

    fn __truediv__(&self, other: &Series) -> PyResult<Series> {
        Ok(Self { inner: self.inner.div(&other.inner).map_err(value_err)? })
    }

    fn compose(&self, inner: &Series) -> PyResult<Series> {
        Ok(Self { inner: self.inner.compose(&inner.inner).map_err(value_err)? })
    }

    fn __eq__(&self, other: &Series) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Series({:?}, order={})", strings(&self.inner), self.inner.order())
    }
}

/// Evaluation session of the expression language; bindings persist between
/// calls to `run`.
#[pyclass]
struct Session {
    inner: Mutex<CoreSession>,
}

#[pymethods]
impl Session {
    #[new]
    fn new() -> Self {
        Self { inner: Mutex::new(CoreSession::new()) }
    }

    /// Runs `;`-separated statements and returns the last value as text.
    fn run(&self, text: &str) -> PyResult<String> {
        let mut s = self.inner.lock().map_err(runtime_err)?;
        s.run(text).map(|v| v.to_string()).map_err(value_err)
    }
}

/// Evaluates a program in a fresh session.
#[pyfunction]
fn eval(text: &str) -> PyResult<String> {
    CoreSession::new().run(text).map(|v| v.to_string()).map_err(value_err)
}

/// Parses and re-renders an expression.
#[pyfunction]
fn normalize(text: &str) -> PyResult<String> {
    parse_expr(text).map(|e| render(&e)).map_err(value_err)
}

#[pyfunction]
fn euler_characteristic(n: u32, k: i64) -> String {
    rr::euler_characteristic(n, k).to_string()
}

/// Error-transfer image of `p` for `which` in `{"O", "O-1"}` as
/// coefficients of a series in `u`.
#[pyfunction]
fn err_transfer(p: &Series, which: &str, order: usize) -> PyResult<Vec<String>> {
    let r = match which {
        "O" => rr::err_transfer_o(&p.inner, order),
        "O-1" => rr::err_transfer_ominus1(&p.inner, order),
        _ => return Err(value_err("which must be 'O' or 'O-1'")),
    }
    .map_err(value_err)?;
    Ok(strings(&r.series_in_u))
}

#[pyfunction]
fn solve_r(target_o: &Series, target_o1: &Series, order: usize) -> PyResult<Series> {
    let a = rr::ErrOperatorResult { series_in_u: target_o.inner.clone() };
    let b = rr::ErrOperatorResult { series_in_u: target_o1.inner.clone() };
    Ok(Series { inner: rr::solve_r(&a, &b, order).map_err(value_err)?.series() })
}

/// Runs a JSON scenario; returns `(passed, report_json)`.
#[pyfunction]
fn run_scenario_json(py: Python<'_>, text: &str) -> PyResult<(bool, String)> {
    let s = parse_scenario(text).map_err(value_err)?;
    let rep = py.detach(|| run_scenario(&s)).map_err(value_err)?;
    Ok((rep.pass, serde_json::to_string(&rep.json).map_err(runtime_err)?))
}

/// `int c1(O(k))` for the metric `exp(-weight) FS^k` on an `n x n` grid.
#[pyfunction]
#[pyo3(signature = (k, n, weight="0"))]
fn degree(py: Python<'_>, k: i32, n: usize, weight: &str) -> PyResult<f64> {
    let w = charclass::cli::numexpr::ZFunction::parse(weight).map_err(value_err)?;
    let metric = HermitianMetric::line(k, std::sync::Arc::new(move |z| w.eval(z).re));
    py.detach(|| charclass::numeric::forms::degree(&metric, n)).map_err(value_err)
}

/// Max difference of the two first-Chern-form routes on the z chart.
#[pyfunction]
#[pyo3(signature = (k, n, weight="0"))]
fn two_path_difference(py: Python<'_>, k: i32, n: usize, weight: &str) -> PyResult<f64> {
    let w = charclass::cli::numexpr::ZFunction::parse(weight).map_err(value_err)?;
    let metric = HermitianMetric::line(k, std::sync::Arc::new(move |z| w.eval(z).re));
    py.detach(|| two_path(&metric, n)).map_err(value_err)
}

/// Downstairs residual for a change of metric on a line bundle, both
/// metrics given as expressions in `z`.
#[pyfunction]
#[pyo3(signature = (rho1, rho2, n, cutoff="mollifier"))]
fn downstairs_residual(py: Python<'_>, rho1: &str, rho2: &str, n: usize, cutoff: &str) -> PyResult<f64> {
    use charclass::cli::numexpr::ZFunction;
    use charclass::numeric::CMat;
    let a = ZFunction::parse(rho1).map_err(value_err)?;
    let b = ZFunction::parse(rho2).map_err(value_err)?;
    let cutoff = match cutoff {
        "mollifier" => Cutoff::Mollifier,
        "smoothstep" => Cutoff::SmoothStep { inner: 0.25 },
        _ => return Err(value_err("cutoff must be 'mollifier' or 'smoothstep'")),
    };
    let datum = DeformationDatum::metric_change(
        std::sync::Arc::new(move |z| CMat::scalar(a.eval(z).re)),
        std::sync::Arc::new(move |z| CMat::scalar(b.eval(z).re)),
    );
    let opts = BottChernOptions { cutoff, ..Default::default() };
    let rep = py
        .detach(|| {
            verify_downstairs(&datum, &charclass::CharSeries::ChernCharacter, &ChartGrid::new(Chart::Z, n), &opts)
        })
        .map_err(value_err)?;
    Ok(num(rep.max_residual).as_f64().unwrap_or(f64::NAN))
}

#[pymodule]
fn pycharclass(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Series>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(eval, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(euler_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(err_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(solve_r, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario_json, m)?)?;
    m.add_function(wrap_pyfunction!(degree, m)?)?;
    m.add_function(wrap_pyfunction!(two_path_difference, m)?)?;
    m.add_function(wrap_pyfunction!(downstairs_residual, m)?)?;
    Ok(())
}
