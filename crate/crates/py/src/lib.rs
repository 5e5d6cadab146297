//! Python bindings for `squeezelab`.

use num_bigint::BigInt;
use num_complex::Complex64;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use squeezelab::algebra::{self, AlgebraBudget, CoefficientSeries, NormalOrderedPoly};
use squeezelab::evolve::{self, SqueezePropagator, DEFAULT_TOL};
use squeezelab::series;
use squeezelab::state;
use squeezelab::verify::{self, Check, VerifyConfig};
use squeezelab::{Error, FockDim, SqueezeParams};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        Error::Budget { .. } => PyMemoryError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn dim(levels: usize) -> PyResult<FockDim> {
    FockDim::new(levels).map_err(py_err)
}

/// Normal-ordered polynomial in `a^dag` and `a` with exact rational
/// coefficients.
#[pyclass(name = "Poly", module = "squeezelab_py", frozen)]
#[derive(Clone)]
struct PyPoly(NormalOrderedPoly);

#[pymethods]
impl PyPoly {
    #[staticmethod]
    fn one() -> Self {
        PyPoly(NormalOrderedPoly::one())
    }

    #[staticmethod]
    fn number() -> Self {
        PyPoly(NormalOrderedPoly::number())
    }

    /// `a^dag^n`.
    #[staticmethod]
    fn creation(n: u32) -> Self {
        PyPoly(NormalOrderedPoly::creation_power(n))
    }

    /// `a^n`.
    #[staticmethod]
    fn annihilation(n: u32) -> Self {
        PyPoly(NormalOrderedPoly::annihilation_power(n))
    }

    /// `[a^n, a^dag^n]`.
    #[staticmethod]
    fn a_n(n: u32) -> Self {
        PyPoly(algebra::a_n_commutator(n))
    }

    /// `m`-fold commutator of `a^dag^n - a^n` with `a^dag a`.
    #[staticmethod]
    fn nested(n: u32, m: u32) -> PyResult<Self> {
        algebra::nested_commutator(n, m).map(PyPoly).map_err(py_err)
    }

    fn __add__(&self, other: &Self) -> Self {
        PyPoly(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &Self) -> Self {
        PyPoly(self.0.sub(&other.0))
    }

    fn __mul__(&self, other: &Self) -> Self {
        PyPoly(self.0.multiply(&other.0))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn commutator(&self, other: &Self) -> Self {
        PyPoly(self.0.commutator(&other.0))
    }

    fn adjoint(&self) -> Self {
        PyPoly(self.0.adjoint())
    }

    fn degree(&self) -> u32 {
        self.0.degree()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// `{(p, q): (numerator, denominator)}` for `a^dag^p a^q` terms.
    fn terms(&self) -> Vec<((u32, u32), (BigInt, BigInt))> {
        self.0.terms().map(|(&(p, q), c)| ((p, q), (c.numer().clone(), c.denom().clone()))).collect()
    }

    /// `<0|P|0>` as `(numerator, denominator)`.
    fn vacuum_expectation(&self) -> (BigInt, BigInt) {
        let v = self.0.vacuum_expectation();
        (v.numer().clone(), v.denom().clone())
    }

    /// `<m|P|m>` as `(numerator, denominator)`.
    fn diagonal(&self, m: u64) -> (BigInt, BigInt) {
        let v = self.0.diagonal_on_number_state(m);
        (v.numer().clone(), v.denom().clone())
    }

    fn matrix_element(&self, row: u64, col: u64) -> f64 {
        self.0.matrix_element(row, col)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly({})", self.0)
    }
}

/// Reusable evolution along `r = t e^{i phase}` at a fixed truncation.
#[pyclass(name = "Propagator", module = "squeezelab_py", frozen)]
struct PyPropagator(SqueezePropagator);

#[pymethods]
impl PyPropagator {
    #[new]
    #[pyo3(signature = (order, levels, phase = 0.0))]
    fn new(order: u32, levels: usize, phase: f64) -> PyResult<Self> {
        SqueezePropagator::new(order, dim(levels)?, phase).map(PyPropagator).map_err(py_err)
    }

    #[getter]
    fn order(&self) -> u32 {
        self.0.order()
    }

    #[getter]
    fn levels(&self) -> usize {
        self.0.dim().size()
    }

    /// Amplitudes of the state at modulus `t`.
    fn state(&self, py: Python<'_>, t: f64) -> PyResult<Vec<Complex64>> {
        py.detach(|| self.0.state(t)).map(|s| s.into_amplitudes()).map_err(py_err)
    }

    fn mean_photon(&self, py: Python<'_>, t: f64) -> PyResult<f64> {
        py.detach(|| self.0.state(t)).map(|s| state::mean_photon(&s)).map_err(py_err)
    }
}

/// Amplitudes of `exp(r a^dag^n - r^* a^n)|0>` truncated to `levels`.
#[pyfunction]
#[pyo3(signature = (order, r, levels, tol = DEFAULT_TOL))]
fn squeezed_state(py: Python<'_>, order: u32, r: Complex64, levels: usize, tol: f64) -> PyResult<Vec<Complex64>> {
    let params = SqueezeParams::new(order, r).map_err(py_err)?;
    let d = dim(levels)?;
    py.detach(|| evolve::squeezed_state(&params, d, tol)).map(|s| s.into_amplitudes()).map_err(py_err)
}

/// `<a^dag a>` of the truncated squeezed state.
#[pyfunction]
#[pyo3(signature = (order, r, levels, tol = DEFAULT_TOL))]
fn mean_photon(py: Python<'_>, order: u32, r: Complex64, levels: usize, tol: f64) -> PyResult<f64> {
    let params = SqueezeParams::new(order, r).map_err(py_err)?;
    let d = dim(levels)?;
    py.detach(|| evolve::squeezed_state(&params, d, tol)).map(|s| state::mean_photon(&s)).map_err(py_err)
}

/// Rows of `(N, r, mean_photon, leakage, norm_error, status)`.
#[pyfunction]
#[pyo3(signature = (order, r_grid, levels, tol = DEFAULT_TOL, tail = None))]
fn sweep(
    py: Python<'_>,
    order: u32,
    r_grid: Vec<f64>,
    levels: Vec<usize>,
    tol: f64,
    tail: Option<usize>,
) -> PyResult<Vec<(usize, f64, f64, f64, f64, String)>> {
    let result =
        py.detach(|| evolve::sweep_photon_number_with_tail(order, &r_grid, &levels, tol, tail)).map_err(py_err)?;
    Ok(result
        .rows
        .into_iter()
        .map(|r| (r.levels, r.r, r.mean_photon, r.leakage, r.norm_error, r.status.label().to_owned()))
        .collect())
}

/// `[(m, numerator, denominator)]` for powers `1..=2 count`.
#[pyfunction]
#[pyo3(signature = (order, count, max_terms = None, max_degree = None))]
fn coefficients(
    py: Python<'_>,
    order: u32,
    count: u32,
    max_terms: Option<usize>,
    max_degree: Option<u32>,
) -> PyResult<Vec<(u32, BigInt, BigInt)>> {
    let defaults = AlgebraBudget::default();
    let budget = AlgebraBudget {
        max_terms: max_terms.unwrap_or(defaults.max_terms),
        max_degree: max_degree.unwrap_or(defaults.max_degree),
    };
    let s = py.detach(|| algebra::coefficients_with(order, count, &budget)).map_err(py_err)?;
    Ok(s.entries.into_iter().map(|(m, c)| (m, c.numer().clone(), c.denom().clone())).collect())
}

fn fit_dict<'py>(py: Python<'py>, fit: &series::FitResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", fit.order)?;
    d.set_item("M", fit.count)?;
    d.set_item("points_used", fit.points_used.clone())?;
    d.set_item("alpha", fit.alpha)?;
    d.set_item("alpha_stderr", fit.alpha_stderr)?;
    d.set_item("intercept", fit.intercept)?;
    d.set_item("radius", fit.radius)?;
    Ok(d)
}

/// Exponential fit of the coefficients of order `order`.
#[pyfunction]
#[pyo3(signature = (order, count = None, points = 5))]
fn fit<'py>(py: Python<'py>, order: u32, count: Option<u32>, points: usize) -> PyResult<Bound<'py, PyDict>> {
    let count = count.unwrap_or_else(|| series::default_fit_count(order));
    let result = py
        .detach(|| algebra::coefficients(order, count).and_then(|s| series::fit_exponential(&s, points)))
        .map_err(py_err)?;
    fit_dict(py, &result)
}

/// Root-test values `(m, |c_m|^(1/m))`.
#[pyfunction]
fn root_test(py: Python<'_>, order: u32, count: u32) -> PyResult<Vec<(u32, f64)>> {
    let s: CoefficientSeries = py.detach(|| algebra::coefficients(order, count)).map_err(py_err)?;
    Ok(series::root_test_sequence(&s))
}

/// Rows of `(r, numeric_N, numeric_Nprime, taylor, diff_num, diff_taylor, converged)`.
#[pyfunction]
#[pyo3(signature = (order, levels, r_grid, count = 20, agree_tol = 1e-6))]
fn compare(
    py: Python<'_>,
    order: u32,
    levels: (usize, usize),
    r_grid: Vec<f64>,
    count: u32,
    agree_tol: f64,
) -> PyResult<Vec<(f64, f64, f64, f64, f64, f64, bool)>> {
    let table = py
        .detach(|| {
            algebra::coefficients(order, count)
                .and_then(|s| series::compare_taylor_numeric(&s, levels, &r_grid, agree_tol))
        })
        .map_err(py_err)?;
    Ok(table
        .rows
        .into_iter()
        .map(|r| (r.r, r.numeric_a, r.numeric_b, r.taylor, r.diff_num, r.diff_taylor, r.converged))
        .collect())
}

/// Runs named checks (all by default) and returns `(name, n, passed, summary)`.
#[pyfunction]
#[pyo3(signature = (checks = None, orders = None))]
fn run_checks(
    py: Python<'_>,
    checks: Option<Vec<String>>,
    orders: Option<Vec<u32>>,
) -> PyResult<Vec<(String, u32, bool, String)>> {
    let checks: Vec<Check> = match checks {
        None => Check::ALL.to_vec(),
        Some(names) => names.iter().map(|c| c.parse()).collect::<Result<_, _>>().map_err(py_err)?,
    };
    let mut cfg = VerifyConfig::default();
    if let Some(orders) = orders {
        cfg.orders = orders;
    }
    let outcomes = py.detach(|| verify::run_checks(&checks, &cfg)).map_err(py_err)?;
    Ok(outcomes.into_iter().map(|o| (o.check.name().to_owned(), o.order, o.passed, o.summary)).collect())
}

/// Diagonal of `[a^n, a^dag^n]` on `|m>`.
#[pyfunction]
fn commutator_closed_form(n: u64, m: u64) -> BigInt {
    squeezelab::commutator_closed_form(n, m)
}

#[pymodule]
fn squeezelab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoly>()?;
    m.add_class::<PyPropagator>()?;
    m.add_function(wrap_pyfunction!(squeezed_state, m)?)?;
    m.add_function(wrap_pyfunction!(mean_photon, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(root_test, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_closed_form, m)?)?;
    Ok(())
}
