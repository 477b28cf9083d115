//! Python bindings: `import diophantine`.

use diophantine_core::dynamics::{FlowSystem, PERIOD};
use diophantine_core::eigen::{self, DenseComplexMatrix, EigenOptions};
use diophantine_core::hermite::{self, PermutationId};
use diophantine_core::matrices::{self, MatrixKind};
use diophantine_core::poly::{self, MonicPolynomial, RootOptions, ZeroVector};
use diophantine_core::report::{self, OrderingSelection, RunConfig, SimulationConfig, Tolerances};
use diophantine_core::{Error, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match report::exit_code(&e) {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

/// Ascending zeros of the Hermite polynomial of order `n`.
#[pyclass(name = "HermiteZeros", frozen)]
struct PyHermiteZeros {
    inner: hermite::HermiteZeros,
}

#[pymethods]
impl PyHermiteZeros {
    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }
    #[getter]
    fn zeros(&self) -> Vec<f64> {
        self.inner.zeros.clone()
    }
    #[getter]
    fn residual_first(&self) -> f64 {
        self.inner.residual_first
    }
    #[getter]
    fn residual_second(&self) -> f64 {
        self.inner.residual_second
    }
    fn __repr__(&self) -> String {
        format!("HermiteZeros(order={}, zeros={:?})", self.inner.order, self.inner.zeros)
    }
}

#[pyfunction]
fn hermite_zeros(n: usize) -> PyResult<PyHermiteZeros> {
    Ok(PyHermiteZeros { inner: hermite::hermite_zeros(n).map_err(to_py)? })
}

/// Ordering of the Hermite zeros into coefficient slots.
#[pyclass(name = "Ordering", frozen)]
struct PyOrdering {
    inner: PermutationId,
}

#[pymethods]
impl PyOrdering {
    #[staticmethod]
    fn from_rank(n: usize, rank: u128) -> PyResult<Self> {
        Ok(Self { inner: PermutationId::from_ordinal(n, rank).map_err(to_py)? })
    }
    #[staticmethod]
    fn from_word(word: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: PermutationId::from_word(word).map_err(to_py)? })
    }
    #[getter]
    fn rank(&self) -> u128 {
        self.inner.ordinal
    }
    #[getter]
    fn word(&self) -> Vec<usize> {
        self.inner.word.clone()
    }
    /// Coefficients of the permuted monic polynomial.
    fn coefficients(&self) -> PyResult<Vec<f64>> {
        Ok(self.inner.apply(&hermite::hermite_zeros(self.inner.n).map_err(to_py)?.zeros))
    }
    /// Zeros of the permuted polynomial, sorted by (re, im).
    fn zeros(&self) -> PyResult<Vec<C64>> {
        let h = hermite::hermite_zeros(self.inner.n).map_err(to_py)?;
        let p = hermite::permuted_polynomial(&h, &self.inner).map_err(to_py)?;
        Ok(poly::roots(&p, RootOptions::default()).map_err(to_py)?.into_inner())
    }
    fn __repr__(&self) -> String {
        format!("Ordering(rank={}, word={:?})", self.inner.ordinal, self.inner.word)
    }
}

/// All zeros of `z^N + c_1 z^(N-1) + ... + c_N`.
#[pyfunction]
#[pyo3(signature = (coefficients, tol = 1e-12, max_iter = 500))]
fn roots(coefficients: Vec<C64>, tol: f64, max_iter: usize) -> PyResult<Vec<C64>> {
    let p = MonicPolynomial::new(coefficients).map_err(to_py)?;
    Ok(poly::roots(&p, RootOptions { tol, max_iter }).map_err(to_py)?.into_inner())
}

/// A built `M1` or `M2` matrix.
#[pyclass(name = "DiophantineMatrix", frozen)]
struct PyMatrix {
    inner: matrices::DiophantineMatrix,
}

#[pymethods]
impl PyMatrix {
    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }
    #[getter]
    fn entries(&self) -> Vec<Vec<C64>> {
        self.inner.entries.rows()
    }
    #[getter]
    fn conditioning_warning(&self) -> bool {
        self.inner.conditioning_warning
    }
    fn trace(&self) -> C64 {
        self.inner.entries.trace()
    }
    fn determinant(&self) -> C64 {
        self.inner.entries.determinant()
    }
    /// Eigenvalues sorted by (re, im).
    fn eigenvalues(&self) -> PyResult<Vec<C64>> {
        sorted_eigenvalues(&self.inner.entries)
    }
    /// `(passed, max_deviation, eigenvalues)` against the expected spectrum.
    #[pyo3(signature = (tol = 1e-6))]
    fn spectrum_check(&self, tol: f64) -> PyResult<(bool, f64, Vec<C64>)> {
        let r = matrices::spectrum_check(&self.inner, tol, EigenOptions::default()).map_err(to_py)?;
        Ok((r.pass, r.max_deviation, r.eigenvalues))
    }
    fn __repr__(&self) -> String {
        format!("DiophantineMatrix(kind={}, n={})", self.inner.kind, self.inner.n)
    }
}

fn sorted_eigenvalues(m: &DenseComplexMatrix) -> PyResult<Vec<C64>> {
    let mut v = eigen::eigenvalues(m, EigenOptions::default()).map_err(to_py)?.eigenvalues;
    v.sort_by(poly::lexicographic);
    Ok(v)
}

#[pyfunction]
fn build_m1(zeros: Vec<C64>, coefficients: Vec<C64>) -> PyResult<PyMatrix> {
    let z = ZeroVector::new(zeros).map_err(to_py)?;
    Ok(PyMatrix { inner: matrices::build_m1(&z, &coefficients).map_err(to_py)? })
}

#[pyfunction]
fn build_m2(zeros: Vec<C64>, coefficients: Vec<C64>) -> PyResult<PyMatrix> {
    let z = ZeroVector::new(zeros).map_err(to_py)?;
    Ok(PyMatrix { inner: matrices::build_m2(&z, &coefficients).map_err(to_py)? })
}

/// Builds the matrix of `kind` (`"m1"`/`"m2"`) for the ordering of rank `rank`.
#[pyfunction]
fn build_for_ordering(kind: &str, n: usize, rank: u128) -> PyResult<PyMatrix> {
    let kind: MatrixKind = parse(kind)?;
    let perm = PermutationId::from_ordinal(n, rank).map_err(to_py)?;
    let h = hermite::hermite_zeros(n).map_err(to_py)?;
    let p = hermite::permuted_polynomial(&h, &perm).map_err(to_py)?;
    let z = poly::roots(&p, RootOptions::default()).map_err(to_py)?;
    let m = matrices::build(kind, &z, p.coefficients()).map_err(to_py)?.with_source(perm);
    Ok(PyMatrix { inner: m })
}

/// Eigenvalues of a square complex matrix given as a list of rows.
#[pyfunction]
fn eigenvalues(rows: Vec<Vec<C64>>) -> PyResult<Vec<C64>> {
    sorted_eigenvalues(&DenseComplexMatrix::from_rows(rows).map_err(to_py)?)
}

/// Result of a batch spectrum verification.
#[pyclass(name = "VerificationReport", frozen)]
struct PyReport {
    inner: report::VerificationReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> usize {
        self.inner.aggregate.pass
    }
    #[getter]
    fn failed(&self) -> usize {
        self.inner.aggregate.fail
    }
    #[getter]
    fn inconclusive(&self) -> usize {
        self.inner.aggregate.inconclusive
    }
    #[getter]
    fn max_deviation(&self) -> f64 {
        self.inner.aggregate.max_deviation
    }
    #[getter]
    fn notes(&self) -> Vec<String> {
        self.inner.notes.clone()
    }
    fn digest(&self) -> String {
        self.inner.digest()
    }
    fn to_json(&self) -> PyResult<String> {
        report::to_json(&self.inner).map_err(to_py)
    }
    fn to_csv(&self) -> PyResult<String> {
        report::verification_csv(&self.inner).map_err(to_py)
    }
    fn __repr__(&self) -> String {
        let a = &self.inner.aggregate;
        format!("VerificationReport(pass={}, fail={}, inconclusive={})", a.pass, a.fail, a.inconclusive)
    }
}

/// Checks spectra over orderings; `orderings` is `"all"`, `"sample:K[:SEED]"`
/// or comma-separated ranks.
#[pyfunction]
#[pyo3(signature = (n, kinds = vec!["m1".to_string(), "m2".to_string()], orderings = "all", seed = 42, jobs = 1, force = false, pass_tol = 1e-6))]
fn verify(
    py: Python<'_>,
    n: usize,
    kinds: Vec<String>,
    orderings: &str,
    seed: u64,
    jobs: usize,
    force: bool,
    pass_tol: f64,
) -> PyResult<PyReport> {
    let config = RunConfig {
        kinds: kinds.iter().map(|k| parse(k)).collect::<PyResult<_>>()?,
        orderings: OrderingSelection::parse(orderings, seed).map_err(to_py)?,
        tolerances: Tolerances { pass_tol, ..Tolerances::default() },
        seed,
        force,
        ..RunConfig::new(n)
    };
    let rep = py.detach(|| report::run_verification(&config, jobs)).map_err(to_py)?;
    Ok(PyReport { inner: rep })
}

/// Integrates a seeded perturbation of equilibrium; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (system, n, rank = 1, t_end = PERIOD, radius = 1e-2, seed = 42))]
fn simulate(py: Python<'_>, system: &str, n: usize, rank: u128, t_end: f64, radius: f64, seed: u64) -> PyResult<String> {
    let system: FlowSystem = parse(system)?;
    let config = SimulationConfig { rank, t_end, radius, seed, ..SimulationConfig::new(system, n) };
    let rep = py.detach(|| report::run_simulation(&config)).map_err(to_py)?;
    report::to_json(&rep).map_err(to_py)
}

/// Return distance `max |y(t_end) - y(0)|` of a seeded simulation.
#[pyfunction]
#[pyo3(signature = (system, n, rank = 1, t_end = PERIOD, radius = 1e-2, seed = 42))]
fn return_distance(py: Python<'_>, system: &str, n: usize, rank: u128, t_end: f64, radius: f64, seed: u64) -> PyResult<f64> {
    let system: FlowSystem = parse(system)?;
    let config = SimulationConfig { rank, t_end, radius, seed, ..SimulationConfig::new(system, n) };
    Ok(py.detach(|| report::run_simulation(&config)).map_err(to_py)?.return_distance)
}

/// Max relative deviation between the closed-form matrix and the
/// finite-difference Jacobian of the corresponding flow.
#[pyfunction]
#[pyo3(signature = (n, kind = "m1", rank = 1, h = None))]
fn oracle(n: usize, kind: &str, rank: u128, h: Option<f64>) -> PyResult<f64> {
    let kind: MatrixKind = parse(kind)?;
    Ok(report::run_oracle(n, rank, kind, h, &Tolerances::default()).map_err(to_py)?.deviation)
}

#[pymodule]
fn diophantine(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", report::VERSION)?;
    m.add_class::<PyHermiteZeros>()?;
    m.add_class::<PyOrdering>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(hermite_zeros, m)?)?;
    m.add_function(wrap_pyfunction!(roots, m)?)?;
    m.add_function(wrap_pyfunction!(build_m1, m)?)?;
    m.add_function(wrap_pyfunction!(build_m2, m)?)?;
    m.add_function(wrap_pyfunction!(build_for_ordering, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(return_distance, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    Ok(())
}
