//! Python module `rab`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rab_core::certify::{certify_weights, constraint_satisfaction as core_cs, Certificate};
use rab_core::dtpak::{self, DtpakOptions, SolveOutcome};
use rab_core::linalg::ComplexMatrix;
use rab_core::problem::{self, EpsilonRule, GeneratorConfig, RabProblem, TransformKind};
use rab_core::{rmvb, worked, Complex64, Error};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_transform(s: &str) -> PyResult<TransformKind> {
    match s {
        "tall5n" => Ok(TransformKind::Tall5N),
        "square" => Ok(TransformKind::SquareN),
        "identity" => Ok(TransformKind::Identity),
        "covariance-like" => Ok(TransformKind::CovarianceLike),
        other => Err(PyValueError::new_err(format!("unknown transform `{other}`"))),
    }
}

fn parse_rule(s: &str) -> PyResult<EpsilonRule> {
    match s {
        "full-rank-third" => Ok(EpsilonRule::FullRankThird),
        "rankdef-large" => Ok(EpsilonRule::RankDefLarge),
        "rankdef-small" => Ok(EpsilonRule::RankDefSmall),
        other => Err(PyValueError::new_err(format!("unknown epsilon rule `{other}`"))),
    }
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(py_err)
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// A problem instance: minimize `wᴴRw` subject to `wᴴa ≥ ε‖Aw‖ + 1`.
#[pyclass(name = "Problem", module = "rab", frozen)]
struct PyProblem {
    inner: RabProblem,
}

#[pymethods]
impl PyProblem {
    /// Build from nested lists of complex numbers. `A` defaults to the identity.
    #[new]
    #[pyo3(signature = (r, a, epsilon, transform=None))]
    fn new(
        r: Vec<Vec<Complex64>>,
        a: Vec<Complex64>,
        epsilon: f64,
        transform: Option<Vec<Vec<Complex64>>>,
    ) -> PyResult<Self> {
        let n = a.len();
        let transform = match transform {
            Some(rows) => matrix(rows)?,
            None => ComplexMatrix::identity(n),
        };
        let inner = RabProblem::new(matrix(r)?, a, transform, epsilon).map_err(py_err)?;
        Ok(PyProblem { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed=0, rank=None, sigma=None, transform="square", eps_rule="full-rank-third", eps_sq=None, theta=None))]
    #[allow(clippy::too_many_arguments)]
    fn generate(
        n: usize,
        seed: u64,
        rank: Option<usize>,
        sigma: Option<f64>,
        transform: &str,
        eps_rule: &str,
        eps_sq: Option<f64>,
        theta: Option<f64>,
    ) -> PyResult<Self> {
        let rank = rank.unwrap_or(n);
        let mut cfg = GeneratorConfig::full_rank(n, seed);
        cfg.covariance_rank = rank;
        cfg.sigma = sigma.unwrap_or(if rank < n { 0.0 } else { 0.1 });
        cfg.transform_kind = parse_transform(transform)?;
        cfg.epsilon_rule = match eps_sq {
            Some(e2) => EpsilonRule::Explicit(e2),
            None => parse_rule(eps_rule)?,
        };
        cfg.theta = theta;
        let inner = problem::generate(&cfg).map_err(py_err)?;
        Ok(PyProblem { inner })
    }

    /// Load a JSON problem file, rejecting instances that violate the assumptions.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let (inner, report) = problem::load(path).map_err(py_err)?;
        report.into_result().map_err(py_err)?;
        Ok(PyProblem { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (inner, report) = problem::from_json_str(text).map_err(py_err)?;
        report.into_result().map_err(py_err)?;
        Ok(PyProblem { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        problem::save(&self.inner, path).map_err(py_err)
    }

    fn to_json(&self) -> String {
        problem::to_json_string(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn r(&self) -> Vec<Vec<Complex64>> {
        matrix_rows(&self.inner.covariance)
    }

    #[getter]
    fn a(&self) -> Vec<Complex64> {
        self.inner.steering.clone()
    }

    #[getter]
    fn transform(&self) -> Vec<Vec<Complex64>> {
        matrix_rows(&self.inner.transform)
    }

    fn objective(&self, w: Vec<Complex64>) -> PyResult<f64> {
        self.inner.objective(&w).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(n={}, m={}, epsilon={})",
            self.inner.n(),
            self.inner.m(),
            self.inner.epsilon
        )
    }
}

/// Result of the closed-form solver. `w` is `None` when no optimum exists.
#[pyclass(name = "Solution", module = "rab", frozen, get_all)]
struct PySolution {
    verdict: String,
    w: Option<Vec<Complex64>>,
    objective: Option<f64>,
    mu: Option<f64>,
    k: Option<f64>,
    zero_mass: f64,
    total_mass: f64,
    epsilon_sq: f64,
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!("Solution(verdict={}, objective={:?})", self.verdict, self.objective)
    }
}

#[pyfunction]
fn solve(p: &PyProblem) -> PyResult<PySolution> {
    let out = dtpak::solve(&p.inner, &DtpakOptions::default()).map_err(py_err)?;
    let cl = *out.classification();
    let mut sol = PySolution {
        verdict: cl.verdict.to_string(),
        w: None,
        objective: None,
        mu: None,
        k: None,
        zero_mass: cl.zero_mass,
        total_mass: cl.total_mass,
        epsilon_sq: cl.epsilon_sq,
    };
    if let SolveOutcome::Solved(s) = out {
        sol.w = Some(s.w);
        sol.objective = Some(s.objective);
        sol.mu = Some(s.mu);
        sol.k = Some(s.k);
    }
    Ok(sol)
}

/// Classification of the optimum as a dict.
#[pyfunction]
fn classify<'py>(py: Python<'py>, p: &PyProblem) -> PyResult<Bound<'py, PyDict>> {
    let opts = DtpakOptions::default();
    let d = dtpak::diagonalize(&p.inner, &opts).map_err(py_err)?;
    let cl = dtpak::classify(&d, &opts);
    let out = PyDict::new(py);
    out.set_item("verdict", cl.verdict.as_str())?;
    out.set_item("zero_mass", cl.zero_mass)?;
    out.set_item("total_mass", cl.total_mass)?;
    out.set_item("epsilon_sq", cl.epsilon_sq)?;
    out.set_item("near_boundary", cl.near_boundary)?;
    Ok(out)
}

/// Baseline solver for full-rank covariances. Returns a dict with `w`,
/// `zeta` and `objective`.
#[pyfunction]
fn rmvb_solve<'py>(py: Python<'py>, p: &PyProblem) -> PyResult<Bound<'py, PyDict>> {
    let s = rmvb::rmvb_solve(&p.inner).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("w", s.w)?;
    out.set_item("zeta", s.zeta)?;
    out.set_item("objective", s.objective)?;
    Ok(out)
}

fn certificate_dict<'py>(py: Python<'py>, c: &Certificate) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("constraint_satisfaction", c.constraint_satisfaction)?;
    out.set_item("stationarity_residual", c.stationarity_residual)?;
    out.set_item("comp_slackness_residual", c.comp_slackness_residual)?;
    out.set_item("dual_feasibility", c.dual_feasibility)?;
    out.set_item("mu", c.mu)?;
    out.set_item("objective", c.objective)?;
    out.set_item("transform_consistency", c.transform_consistency)?;
    out.set_item("passes", c.passes())?;
    Ok(out)
}

/// KKT certificate for a claimed `w`. The multiplier is estimated when not given.
#[pyfunction]
#[pyo3(signature = (p, w, mu=None))]
fn certify<'py>(
    py: Python<'py>,
    p: &PyProblem,
    w: Vec<Complex64>,
    mu: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let c = certify_weights(&p.inner, &w, mu, &DtpakOptions::default()).map_err(py_err)?;
    certificate_dict(py, &c)
}

/// `max(0, ε‖Aw‖ + 1 − Re[wᴴa]) + |Im[wᴴa]|`.
#[pyfunction]
fn constraint_satisfaction(p: &PyProblem, w: Vec<Complex64>) -> PyResult<f64> {
    core_cs(&p.inner, &w).map_err(py_err)
}

/// Run the built-in two-element examples; one dict per example.
#[pyfunction]
fn run_examples<'py>(py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let reports = worked::run_all(&DtpakOptions::default()).map_err(py_err)?;
    reports
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("name", r.name)?;
            d.set_item("expected", r.expected.as_str())?;
            d.set_item("verdict", r.verdict.as_str())?;
            d.set_item("w", r.w.map(|w| w.to_vec()))?;
            d.set_item("objective", r.objective)?;
            d.set_item("passed", r.passed)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn rab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(rmvb_solve, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(constraint_satisfaction, m)?)?;
    m.add_function(wrap_pyfunction!(run_examples, m)?)?;
    Ok(())
}
