//! Python bindings: matrices, signals, the confined set, the four greedy
//! solvers and the probability bounds.

use ::confined_omp as core;
use ::confined_omp::{BoundKind, Error, SolverConfig};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::RankDeficient { .. } => PyArithmeticError::new_err(err.to_string()),
        Error::Io(_) => PyOSError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

#[pyclass(name = "CombMatrix", module = "confined_omp_py")]
struct PyCombMatrix {
    inner: core::CombMatrix,
}

#[pymethods]
impl PyCombMatrix {
    /// Random `m x n` matrix with `d` ones per column.
    #[new]
    fn new(m: usize, n: usize, d: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: core::gen_comb_matrix(m, n, d, seed).py()? })
    }

    #[staticmethod]
    fn from_columns(m: usize, d: usize, cols: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(Self { inner: core::CombMatrix::from_columns(m, d, cols).py()? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: core::CombMatrix::read_text(text.as_bytes()).py()? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    /// Row indices of the ones in column `j`.
    fn col(&self, j: usize) -> PyResult<Vec<usize>> {
        if j >= self.inner.n() {
            return Err(PyValueError::new_err(format!("column {j} out of range")));
        }
        Ok(self.inner.col(j).to_vec())
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.matvec(&x).py()
    }

    /// Row-major dense copy as a list of rows.
    fn to_dense(&self) -> Vec<Vec<f64>> {
        let (m, n) = (self.inner.m(), self.inner.n());
        let mut rows = vec![vec![0.0; n]; m];
        for j in 0..n {
            for &i in self.inner.col(j) {
                rows[i][j] = 1.0;
            }
        }
        rows
    }

    fn __repr__(&self) -> String {
        format!("CombMatrix(m={}, n={}, d={})", self.inner.m(), self.inner.n(), self.inner.d())
    }
}

#[pyclass(name = "SignalModel", module = "confined_omp_py")]
struct PySignalModel {
    inner: core::SignalModel,
}

#[pymethods]
impl PySignalModel {
    #[staticmethod]
    #[pyo3(signature = (mean = 0.0, std_dev = 1.0))]
    fn gaussian(mean: f64, std_dev: f64) -> PyResult<Self> {
        Ok(Self { inner: core::SignalModel::gaussian(mean, std_dev).py()? })
    }

    #[staticmethod]
    #[pyo3(signature = (amplitude = 1.0))]
    fn flat(amplitude: f64) -> PyResult<Self> {
        Ok(Self { inner: core::SignalModel::flat(amplitude).py()? })
    }

    /// CDF of the sum of `ell` independent nonzero entries at `x`.
    fn cdf_conv(&self, ell: usize, x: f64) -> PyResult<f64> {
        core::cdf_conv(&self.inner, ell, x).py()
    }

    fn __repr__(&self) -> String {
        match &self.inner {
            core::SignalModel::Gaussian { mean, std_dev } => format!("SignalModel.gaussian({mean}, {std_dev})"),
            core::SignalModel::Flat { amplitude } => format!("SignalModel.flat({amplitude})"),
            core::SignalModel::Custom(_) => "SignalModel.custom".into(),
        }
    }
}

/// Draws a `k`-sparse signal; returns `(support, values, dense)`.
#[pyfunction]
fn gen_signal(n: usize, k: usize, model: &PySignalModel, seed: u64) -> PyResult<(Vec<usize>, Vec<f64>, Vec<f64>)> {
    let s = core::gen_signal(n, k, &model.inner, seed).py()?;
    Ok((s.support().to_vec(), s.values().to_vec(), s.to_dense()))
}

#[pyfunction]
fn gen_noise(m: usize, eta: f64, seed: u64) -> PyResult<Vec<f64>> {
    core::gen_noise(m, eta, seed).py()
}

#[pyclass(name = "ConfinedSet", module = "confined_omp_py", get_all)]
struct PyConfinedSet {
    epsilon: f64,
    e_rows: Vec<usize>,
    gamma: Vec<usize>,
}

impl From<core::ConfinedSet> for PyConfinedSet {
    fn from(s: core::ConfinedSet) -> Self {
        Self { epsilon: s.epsilon, e_rows: s.e_rows, gamma: s.gamma }
    }
}

#[pymethods]
impl PyConfinedSet {
    fn __len__(&self) -> usize {
        self.gamma.len()
    }
}

#[pyfunction]
#[pyo3(signature = (a, y, epsilon = core::DEFAULT_EPSILON))]
fn confined_set(a: &PyCombMatrix, y: Vec<f64>, epsilon: f64) -> PyResult<PyConfinedSet> {
    Ok(core::compute_confined_set(&a.inner, &y, epsilon).py()?.into())
}

/// Returns `(k_hat, below_min_support)`.
#[pyfunction]
fn estimate_sparsity(nonzero_count: usize, m: usize, d: usize, k_max: usize) -> PyResult<(usize, bool)> {
    let e = core::estimate_sparsity(nonzero_count, m, d, k_max).py()?;
    Ok((e.k_hat, e.below_min_support))
}

#[pyfunction]
fn flat_sparsity_exact(y: Vec<f64>, d: usize, theta: f64) -> usize {
    core::flat_sparsity_exact(&y, d, theta)
}

#[pyclass(name = "GreedyResult", module = "confined_omp_py", get_all)]
struct PyGreedyResult {
    x_hat: Vec<f64>,
    support: Vec<usize>,
    residual_norms: Vec<f64>,
    iterations: usize,
    stop: &'static str,
    selection_order: Vec<usize>,
    additions: u64,
    comparisons: u64,
    inner_products: u64,
    preprocessing_flops: u64,
    threshold_tests: u64,
    gamma: Option<Vec<usize>>,
}

#[pymethods]
impl PyGreedyResult {
    #[getter]
    fn identification_flops(&self) -> u64 {
        self.additions + self.comparisons
    }

    #[getter]
    fn total_flops(&self) -> u64 {
        self.additions + self.comparisons + self.preprocessing_flops
    }
}

impl From<core::GreedyResult> for PyGreedyResult {
    fn from(r: core::GreedyResult) -> Self {
        let stop = match r.stop {
            core::StopReason::ConfinedExact => "confined_exact",
            core::StopReason::ResidualThreshold => "residual_threshold",
            core::StopReason::MaxIterations => "max_iterations",
            core::StopReason::GammaExhausted => "gamma_exhausted",
        };
        let c = r.counters;
        Self {
            x_hat: r.x_hat,
            support: r.support,
            residual_norms: r.residual_norms,
            iterations: r.iterations,
            stop,
            selection_order: r.selection_order,
            additions: c.additions,
            comparisons: c.comparisons,
            inner_products: c.inner_products,
            preprocessing_flops: c.preprocessing_flops,
            threshold_tests: c.threshold_tests,
            gamma: r.confined.map(|s| s.gamma),
        }
    }
}

type Solver = fn(&core::CombMatrix, &[f64], &SolverConfig) -> core::Result<core::GreedyResult>;

fn solve(
    f: Solver,
    a: &PyCombMatrix,
    y: Vec<f64>,
    k: usize,
    batch: usize,
    epsilon: f64,
    residual_tol: f64,
) -> PyResult<PyGreedyResult> {
    let cfg = SolverConfig::new(k).with_batch(batch).with_epsilon(epsilon).with_residual_tol(residual_tol);
    Ok(f(&a.inner, &y, &cfg).py()?.into())
}

#[pyfunction]
#[pyo3(signature = (a, y, k, epsilon = core::DEFAULT_EPSILON, residual_tol = 1e-5))]
fn omp(a: &PyCombMatrix, y: Vec<f64>, k: usize, epsilon: f64, residual_tol: f64) -> PyResult<PyGreedyResult> {
    solve(core::omp, a, y, k, 1, epsilon, residual_tol)
}

#[pyfunction]
#[pyo3(name = "confined_omp", signature = (a, y, k, epsilon = core::DEFAULT_EPSILON, residual_tol = 1e-5))]
fn confined_omp_fn(a: &PyCombMatrix, y: Vec<f64>, k: usize, epsilon: f64, residual_tol: f64) -> PyResult<PyGreedyResult> {
    solve(core::confined_omp, a, y, k, 1, epsilon, residual_tol)
}

#[pyfunction]
#[pyo3(signature = (a, y, k, batch = 3, epsilon = core::DEFAULT_EPSILON, residual_tol = 1e-5))]
fn gomp(a: &PyCombMatrix, y: Vec<f64>, k: usize, batch: usize, epsilon: f64, residual_tol: f64) -> PyResult<PyGreedyResult> {
    solve(core::gomp, a, y, k, batch, epsilon, residual_tol)
}

#[pyfunction]
#[pyo3(signature = (a, y, k, batch = 3, epsilon = core::DEFAULT_EPSILON, residual_tol = 1e-5))]
fn confined_gomp(
    a: &PyCombMatrix,
    y: Vec<f64>,
    k: usize,
    batch: usize,
    epsilon: f64,
    residual_tol: f64,
) -> PyResult<PyGreedyResult> {
    solve(core::confined_gomp, a, y, k, batch, epsilon, residual_tol)
}

#[pyfunction]
fn relative_error(support: Vec<usize>, values: Vec<f64>, n: usize, x_hat: Vec<f64>) -> PyResult<f64> {
    let x = core::SparseSignal::new(n, support, values, core::SignalModel::default()).py()?;
    core::relative_error(&x, &x_hat).py()
}

#[pyclass(name = "BoundReport", module = "confined_omp_py", get_all)]
struct PyBoundReport {
    value: f64,
    raw: f64,
    valid: bool,
    clamped: bool,
    assumptions: Vec<String>,
}

impl From<core::BoundReport> for PyBoundReport {
    fn from(r: core::BoundReport) -> Self {
        Self {
            value: r.value,
            raw: r.raw,
            valid: r.valid,
            clamped: r.clamped,
            assumptions: r.assumptions.iter().map(|p| p.to_string()).collect(),
        }
    }
}

#[pymethods]
impl PyBoundReport {
    fn __float__(&self) -> f64 {
        self.value
    }

    fn __repr__(&self) -> String {
        format!("BoundReport(value={}, valid={}, clamped={})", self.value, self.valid, self.clamped)
    }
}

/// Law of the number of nonzero measurements as `[(v, P{nu = v}), ...]`.
#[pyfunction]
fn nu_distribution(m: usize, d: usize, k: usize) -> PyResult<Vec<(usize, f64)>> {
    let nu = core::nu_distribution(m, d, k).py()?;
    Ok((nu.support_lo..=nu.support_hi).map(|v| (v, nu.prob(v))).collect())
}

#[pyfunction]
fn expected_nu(m: usize, d: usize, k: usize) -> PyResult<f64> {
    core::expected_nu_closed(m, d, k).py()
}

#[pyfunction]
fn expected_gamma_size(m: usize, n: usize, d: usize, k: usize) -> PyResult<f64> {
    core::expected_gamma_size(m, n, d, k).py()
}

#[pyfunction]
fn conf_prob_lower_bound(m: usize, d: usize, k: usize, epsilon: f64, model: &PySignalModel) -> PyResult<PyBoundReport> {
    Ok(core::conf_prob_lower_bound(m, d, k, epsilon, &model.inner).py()?.into())
}

#[pyfunction]
fn recovery_prob_lower_bound(m: usize, n: usize, d: usize, k: usize) -> PyResult<PyBoundReport> {
    Ok(core::recovery_prob_lower_bound(m, n, d, k).py()?.into())
}

#[pyfunction]
fn pi_bar(m: usize, n: usize, d: usize, k: usize) -> PyResult<PyBoundReport> {
    Ok(core::pi_bar(m, n, d, k).py()?.into())
}

/// Returns `(d_star, d_int, pi_max, below_one)`.
#[pyfunction]
fn pi_bar_optimal_d(m: usize, k: usize, n: usize) -> PyResult<(f64, usize, f64, bool)> {
    let o = core::pi_bar_optimal_d(m, k, n).py()?;
    Ok((o.d_star, o.d_int, o.pi_max, o.below_one))
}

/// Returns `(m, prob_bound, exceeds_dimension)`.
#[pyfunction]
fn min_measurements(n: usize, k: usize) -> PyResult<(usize, f64, bool)> {
    let p = core::min_measurements(n, k).py()?;
    Ok((p.m, p.prob_bound, p.exceeds_dimension))
}

#[pyfunction]
fn noisy_conf_prob_lower_bound(
    m: usize,
    d: usize,
    k: usize,
    epsilon: f64,
    eta: f64,
    model: &PySignalModel,
) -> PyResult<PyBoundReport> {
    Ok(core::noisy_conf_prob_lower_bound(m, d, k, epsilon, eta, &model.inner).py()?.into())
}

#[pyfunction]
fn noisy_support_recovery_bound(
    m: usize,
    n: usize,
    d: usize,
    k: usize,
    eta: f64,
    model: &PySignalModel,
) -> PyResult<PyBoundReport> {
    Ok(core::noisy_support_recovery_bound(m, n, d, k, eta, &model.inner).py()?.into())
}

/// Column degree maximising a bound; `kind` is `"theorem4"` or `"pi_bar"`.
#[pyfunction]
#[pyo3(signature = (m, n, k, kind = "theorem4"))]
fn optimize_d(m: usize, n: usize, k: usize, kind: &str) -> PyResult<(usize, PyBoundReport)> {
    let kind = match kind {
        "theorem4" => BoundKind::Theorem4,
        "pi_bar" => BoundKind::PiBar,
        other => return Err(PyValueError::new_err(format!("unknown bound kind {other:?}"))),
    };
    let c = core::optimize_d(m, n, k, kind).py()?;
    Ok((c.d, c.report.into()))
}

#[pymodule]
fn confined_omp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCombMatrix>()?;
    m.add_class::<PySignalModel>()?;
    m.add_class::<PyConfinedSet>()?;
    m.add_class::<PyGreedyResult>()?;
    m.add_class::<PyBoundReport>()?;
    m.add_function(wrap_pyfunction!(gen_signal, m)?)?;
    m.add_function(wrap_pyfunction!(gen_noise, m)?)?;
    m.add_function(wrap_pyfunction!(confined_set, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_sparsity, m)?)?;
    m.add_function(wrap_pyfunction!(flat_sparsity_exact, m)?)?;
    m.add_function(wrap_pyfunction!(omp, m)?)?;
    m.add_function(wrap_pyfunction!(confined_omp_fn, m)?)?;
    m.add_function(wrap_pyfunction!(gomp, m)?)?;
    m.add_function(wrap_pyfunction!(confined_gomp, m)?)?;
    m.add_function(wrap_pyfunction!(relative_error, m)?)?;
    m.add_function(wrap_pyfunction!(nu_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(expected_nu, m)?)?;
    m.add_function(wrap_pyfunction!(expected_gamma_size, m)?)?;
    m.add_function(wrap_pyfunction!(conf_prob_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(recovery_prob_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(pi_bar, m)?)?;
    m.add_function(wrap_pyfunction!(pi_bar_optimal_d, m)?)?;
    m.add_function(wrap_pyfunction!(min_measurements, m)?)?;
    m.add_function(wrap_pyfunction!(noisy_conf_prob_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(noisy_support_recovery_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_d, m)?)?;
    Ok(())
}
