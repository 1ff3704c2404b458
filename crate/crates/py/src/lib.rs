//! Python bindings. Heavy results (portraits, scans, reports) cross the
//! boundary as plain dicts built from their JSON form; products and
//! coefficient series stay as native objects.

use blaschke_core::asymptotics::{compare, predict_peak as core_predict};
use blaschke_core::coefficients::{self, Column, SamplerOptions};
use blaschke_core::examples::{reference_spec, ExampleSpec, Family};
use blaschke_core::model_space::{self, Spectrum};
use blaschke_core::phase::{self, PhasePortrait, SearchOptions};
use blaschke_core::{BlaschkeProduct, Error, ErrorKind};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde_json::Value;

create_exception!(blaschke, BlaschkeError, PyException);
create_exception!(blaschke, ValidationError, BlaschkeError);
create_exception!(blaschke, BudgetError, BlaschkeError);
create_exception!(blaschke, NumericalError, BlaschkeError);

fn py_err(e: Error) -> PyErr {
    let msg = format!("{}: {}", e.name(), e);
    match e.kind() {
        ErrorKind::Validation => ValidationError::new_err(msg),
        ErrorKind::Budget => BudgetError::new_err(msg),
        ErrorKind::Numerical => NumericalError::new_err(msg),
    }
}

fn to_py<'py>(py: Python<'py>, v: Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn dump<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn sampler(eps: f64, sample_cap: Option<usize>) -> SamplerOptions {
    let mut opts = SamplerOptions::with_eps(eps);
    if let Some(cap) = sample_cap {
        opts.cap = cap;
    }
    opts
}

/// Finite Blaschke product from its zeros in the open unit disc.
#[pyclass(name = "BlaschkeProduct", frozen, skip_from_py_object, module = "blaschke")]
#[derive(Clone)]
struct PyProduct {
    inner: BlaschkeProduct,
}

#[pymethods]
impl PyProduct {
    #[new]
    fn new(zeros: Vec<Complex64>) -> PyResult<Self> {
        BlaschkeProduct::new(zeros).map(|inner| PyProduct { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        BlaschkeProduct::from_json(text).map(|inner| PyProduct { inner }).map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn zeros(&self) -> Vec<Complex64> {
        self.inner.zeros().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn __len__(&self) -> usize {
        self.inner.degree()
    }

    fn __call__(&self, z: Complex64) -> Complex64 {
        self.inner.eval(z)
    }

    fn boundary(&self, theta: f64) -> Complex64 {
        self.inner.eval_boundary(theta)
    }

    fn psi_prime(&self, theta: f64) -> f64 {
        self.inner.psi_prime(theta)
    }

    fn psi_derivative(&self, theta: f64, order: usize) -> PyResult<f64> {
        self.inner.psi_derivative(theta, order).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("BlaschkeProduct(degree={})", self.inner.degree())
    }
}

/// Coefficients of `Bⁿ` with the sampling diagnostics.
#[pyclass(name = "CoefficientSeries", frozen, module = "blaschke")]
struct PySeries {
    inner: coefficients::CoefficientSeries,
}

#[pymethods]
impl PySeries {
    #[getter]
    fn n(&self) -> u64 {
        self.inner.n
    }

    #[getter]
    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.coeffs.clone()
    }

    #[getter]
    fn samples(&self) -> usize {
        self.inner.samples
    }

    #[getter]
    fn aliasing_bound(&self) -> f64 {
        self.inner.aliasing_bound
    }

    /// `(max |c_k|, argmax k)`.
    fn sup(&self) -> (f64, usize) {
        self.inner.sup()
    }

    fn l1(&self) -> f64 {
        self.inner.l1()
    }

    fn l2(&self) -> f64 {
        self.inner.l2()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __getitem__(&self, k: usize) -> PyResult<Complex64> {
        self.inner
            .coeffs
            .get(k)
            .copied()
            .ok_or_else(|| pyo3::exceptions::PyIndexError::new_err(k))
    }
}

fn portrait(b: &PyProduct, grid_size: Option<usize>, tol: Option<f64>) -> PyResult<PhasePortrait> {
    let mut opts = SearchOptions::for_product(&b.inner);
    if let Some(g) = grid_size {
        opts.grid_size = g;
    }
    if let Some(t) = tol {
        opts.tol = t;
    }
    phase::analyze_with(&b.inner, opts).map_err(py_err)
}

/// Critical points of `ψ''`, their orders and the dominant class.
#[pyfunction]
#[pyo3(signature = (product, grid_size=None, tol=None))]
fn analyze<'py>(
    py: Python<'py>,
    product: &PyProduct,
    grid_size: Option<usize>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, dump(&portrait(product, grid_size, tol)?))
}

#[pyfunction]
#[pyo3(signature = (product, n, eps=coefficients::DEFAULT_EPS, sample_cap=None))]
fn fourier_coeffs(py: Python<'_>, product: &PyProduct, n: u64, eps: f64, sample_cap: Option<usize>) -> PyResult<PySeries> {
    let opts = sampler(eps, sample_cap);
    py.detach(|| coefficients::fourier_coeffs_with(&product.inner, n, opts))
        .map(|inner| PySeries { inner })
        .map_err(py_err)
}

/// Norm rows over `n_list` plus fitted exponents for the sup and ℓ¹ columns
/// (present when at least four rows are available).
#[pyfunction]
#[pyo3(signature = (product, n_list, eps=coefficients::DEFAULT_EPS, sample_cap=None))]
fn norm_scan<'py>(
    py: Python<'py>,
    product: &PyProduct,
    n_list: Vec<u64>,
    eps: f64,
    sample_cap: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = sampler(eps, sample_cap);
    let scan = py
        .detach(|| coefficients::norm_scan_with(&product.inner, &n_list, opts))
        .map_err(py_err)?;
    let fit = |c| {
        if scan.rows.len() >= 4 {
            coefficients::fit_exponent(&scan, c).map(|f| dump(&f)).map_err(py_err)
        } else {
            Ok(Value::Null)
        }
    };
    let doc = serde_json::json!({
        "rows": dump(&scan.rows),
        "fit_sup": fit(Column::Sup)?,
        "fit_l1": fit(Column::L1)?,
    });
    to_py(py, doc)
}

/// Least-squares slope of `log y` against `log x`.
#[pyfunction]
fn fit_power_law<'py>(py: Python<'py>, xs: Vec<f64>, ys: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let f = coefficients::fit_power_law(&xs, &ys).map_err(py_err)?;
    to_py(py, dump(&f))
}

/// Stationary-phase peak prediction for `Bⁿ`; with `check=True` the
/// coefficients are computed too and compared at the predicted index.
#[pyfunction]
#[pyo3(signature = (product, n, check=false, eps=coefficients::DEFAULT_EPS))]
fn predict_peak<'py>(
    py: Python<'py>,
    product: &PyProduct,
    n: u64,
    check: bool,
    eps: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = portrait(product, None, None)?;
    let prediction = core_predict(&product.inner, &p, n).map_err(py_err)?;
    let mut doc = serde_json::json!({ "prediction": dump(&prediction) });
    if check {
        let series = py
            .detach(|| coefficients::fourier_coeffs(&product.inner, n, eps))
            .map_err(py_err)?;
        doc["comparison"] = dump(&compare(&prediction, &series));
    }
    to_py(py, doc)
}

/// Build an example family member. `family` is one of `general_N`,
/// `deg2_conjugate`, `deg2_real`, `deg4`; without `params` the reference
/// parameters are used. Returns `(product, info)`.
#[pyfunction]
#[pyo3(signature = (family, params=None))]
fn example<'py>(py: Python<'py>, family: &str, params: Option<&str>) -> PyResult<(PyProduct, Bound<'py, PyAny>)> {
    let fam: Family = serde_json::from_value(Value::String(family.into()))
        .map_err(|_| ValidationError::new_err(format!("InvalidInput: unknown family {family:?}")))?;
    let mut spec: ExampleSpec = reference_spec(fam);
    if let Some(text) = params {
        spec.params = serde_json::from_str(text).map_err(|e| ValidationError::new_err(format!("InvalidInput: {e}")))?;
    }
    let built = spec.build().map_err(py_err)?;
    let info = to_py(py, dump(&built))?;
    Ok((PyProduct { inner: built.product }, info))
}

/// Schäffer report for the spectrum given by the zeros of `product`.
#[pyfunction]
#[pyo3(signature = (product, n, eps=coefficients::DEFAULT_EPS))]
fn schaffer<'py>(py: Python<'py>, product: &PyProduct, n: u64, eps: f64) -> PyResult<Bound<'py, PyAny>> {
    let sigma = Spectrum::from_product(&product.inner).map_err(py_err)?;
    let report = py
        .detach(|| model_space::schaffer_lower_bound(&sigma, n, eps))
        .map_err(py_err)?;
    to_py(py, dump(&report))
}

#[pymodule]
mod blaschke {
    #[pymodule_export]
    use super::{
        analyze, example, fit_power_law, fourier_coeffs, norm_scan, predict_peak, schaffer, PyProduct, PySeries,
    };

    use pyo3::prelude::*;

    #[pymodule_init]
    fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
        let py = m.py();
        m.add("BlaschkeError", py.get_type::<super::BlaschkeError>())?;
        m.add("ValidationError", py.get_type::<super::ValidationError>())?;
        m.add("BudgetError", py.get_type::<super::BudgetError>())?;
        m.add("NumericalError", py.get_type::<super::NumericalError>())?;
        Ok(())
    }
}
