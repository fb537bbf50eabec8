//! Python bindings: a `Model` class plus functions for Riccati solutions,
//! horosphere reports, Monte-Carlo averages, suites and scans. Structured
//! results are returned as plain dicts and lists.

use horocurv::config::{ConfigOverrides, SuiteConfig};
use horocurv::models::{CurvatureMode, MetricModel, ModelSpec, Point};
use horocurv::riccati::{InitialCondition, RiccatiConfig};
use horocurv::{horosphere, liouville, report, riccati, GeomError, IntegratorConfig, TangentVector};
use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn err(e: GeomError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    horocurv::linalg::to_rows(m)
}

#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: MetricModel,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (name, dim=None, k=1.0, amplitude=0.05, curvature_mode="closed-form"))]
    fn new(name: &str, dim: Option<usize>, k: f64, amplitude: f64, curvature_mode: &str) -> PyResult<Self> {
        let mode: CurvatureMode = curvature_mode.parse().map_err(err)?;
        let spec = ModelSpec { name: name.into(), dim, k, amplitude, curvature_mode: mode };
        Ok(Self { inner: spec.build().map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn curvature_bound(&self) -> f64 {
        self.inner.curvature_bound()
    }

    #[getter]
    fn locally_symmetric(&self) -> bool {
        self.inner.is_locally_symmetric()
    }

    fn default_point(&self) -> Vec<f64> {
        self.inner.default_point().coords.as_slice().to_vec()
    }

    fn metric_at(&self, point: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.metric_at(&Point::new(&point)).map_err(err)?))
    }

    /// Unit vector along `direction` at `point`.
    fn unit_vector(&self, point: Vec<f64>, direction: Vec<f64>) -> PyResult<Vec<f64>> {
        let v = self.inner.unit_vector(&Point::new(&point), &direction).map_err(err)?;
        Ok(v.components.as_slice().to_vec())
    }

    /// `⟨R(e_i, v)v, e_j⟩` for a frame given as a list of vectors.
    fn curvature_operator(&self, point: Vec<f64>, v: Vec<f64>, frame: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let n = self.inner.dimension();
        if frame.iter().any(|e| e.len() != n) {
            return Err(err(GeomError::DimensionMismatch { expected: n, got: frame.len() }));
        }
        let f = DMatrix::from_fn(n, frame.len(), |i, j| frame[j][i]);
        let tv = TangentVector::from_slices(&point, &v);
        Ok(rows(&self.inner.curvature_operator(&tv, &f).map_err(err)?))
    }

    /// `(Ric(v), Scal)` for unit `v` at `point`.
    fn ricci_and_scalar(&self, point: Vec<f64>, v: Vec<f64>) -> PyResult<(f64, f64)> {
        self.inner.ricci_and_scalar(&TangentVector::from_slices(&point, &v)).map_err(err)
    }

    fn sectional_curvature(&self, point: Vec<f64>, u: Vec<f64>, w: Vec<f64>) -> PyResult<f64> {
        let (u, w) = (nalgebra::DVector::from_vec(u), nalgebra::DVector::from_vec(w));
        self.inner.sectional_curvature(&Point::new(&point), &u, &w).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Model(name={:?}, dimension={})", self.inner.name(), self.inner.dimension())
    }
}

fn riccati_config(horizon: f64, step: f64, tol: f64, initial: &str) -> PyResult<RiccatiConfig> {
    let initial = match initial {
        "large-multiple" => InitialCondition::LargeMultiple,
        "constant-curvature-guess" => InitialCondition::ConstantCurvatureGuess,
        other => return Err(PyValueError::new_err(format!("unknown initial condition `{other}`"))),
    };
    Ok(RiccatiConfig {
        integrator: IntegratorConfig::with_step(step),
        horizon,
        convergence_tol: tol,
        max_horizon: 2.0 * horizon,
        initial,
        ..Default::default()
    })
}

fn direction(model: &MetricModel, point: Option<Vec<f64>>, direction: Vec<f64>) -> PyResult<TangentVector> {
    let base = point.map(|p| Point::new(&p)).unwrap_or_else(|| model.default_point());
    model.unit_vector(&base, &direction).map_err(err)
}

/// Stable Riccati solution at `point` (default point if omitted) along `direction`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (model, direction, point=None, horizon=30.0, step=1e-3, tol=1e-6, initial="large-multiple"))]
fn stable_shape_operator<'py>(
    py: Python<'py>,
    model: &PyModel,
    direction: Vec<f64>,
    point: Option<Vec<f64>>,
    horizon: f64,
    step: f64,
    tol: f64,
    initial: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = riccati_config(horizon, step, tol, initial)?;
    let v = self::direction(&model.inner, point, direction)?;
    let run = riccati::stable_shape_operator(&model.inner, &v, &cfg).map_err(err)?;
    to_py(py, &run)
}

/// Horosphere report (scalar curvature, principal curvatures, gap) for one direction.
#[pyfunction]
#[pyo3(signature = (model, direction, point=None, horizon=30.0, step=1e-3, tol=1e-6))]
fn horosphere_report<'py>(
    py: Python<'py>,
    model: &PyModel,
    direction: Vec<f64>,
    point: Option<Vec<f64>>,
    horizon: f64,
    step: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = riccati_config(horizon, step, tol, "large-multiple")?;
    let v = self::direction(&model.inner, point, direction)?;
    let (_, rep) = horosphere::analyze(&model.inner, &v, &cfg).map_err(err)?;
    to_py(py, &rep)
}

#[pyfunction]
fn lemma_gap(lambdas: Vec<f64>) -> PyResult<f64> {
    horosphere::lemma_gap(&lambdas).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (model, point=None, samples=4096, seed=0))]
fn sectional_spread(model: &PyModel, point: Option<Vec<f64>>, samples: usize, seed: u64) -> PyResult<f64> {
    let p = point.map(|p| Point::new(&p)).unwrap_or_else(|| model.inner.probe_point());
    horosphere::sectional_spread(&model.inner, &p, samples, seed).map_err(err)
}

/// `(mean, std_error)` of `Ric(v)` over uniform unit vectors.
#[pyfunction]
#[pyo3(signature = (model, count=100_000, seed=0, point=None))]
fn sphere_average_ricci(model: &PyModel, count: usize, seed: u64, point: Option<Vec<f64>>) -> PyResult<(f64, f64)> {
    let p = point.map(|p| Point::new(&p)).unwrap_or_else(|| model.inner.default_point());
    let avg = liouville::ricci_average(&model.inner, &p, count, seed).map_err(err)?;
    Ok((avg.mean, avg.std_error))
}

#[allow(clippy::too_many_arguments)]
fn suite_config(
    model: Option<String>,
    dim: Option<usize>,
    k: Option<f64>,
    amplitude: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    step: Option<f64>,
    horizon: Option<f64>,
    tol: Option<f64>,
) -> PyResult<SuiteConfig> {
    let o = ConfigOverrides { model, dim, k, amplitude, samples, seed, step, horizon, tol, ..Default::default() };
    let cfg = SuiteConfig::default().apply(&o);
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// Runs the verification suite and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (model="hyperbolic", dim=None, k=None, amplitude=None, samples=None, seed=None, step=None, horizon=None, tol=None))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    model: &str,
    dim: Option<usize>,
    k: Option<f64>,
    amplitude: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    step: Option<f64>,
    horizon: Option<f64>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = suite_config(Some(model.into()), dim, k, amplitude, samples, seed, step, horizon, tol)?;
    to_py(py, &report::run_suite(&cfg).map_err(err)?)
}

/// Horosphere reports over sampled directions, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (model="hyperbolic", dim=None, k=None, amplitude=None, samples=None, seed=None, step=None, horizon=None, tol=None))]
#[allow(clippy::too_many_arguments)]
fn scan<'py>(
    py: Python<'py>,
    model: &str,
    dim: Option<usize>,
    k: Option<f64>,
    amplitude: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    step: Option<f64>,
    horizon: Option<f64>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = suite_config(Some(model.into()), dim, k, amplitude, samples, seed, step, horizon, tol)?;
    to_py(py, &report::scan(&cfg).map_err(err)?.rows)
}

#[pymodule]
pub fn pyhorocurv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(stable_shape_operator, m)?)?;
    m.add_function(wrap_pyfunction!(horosphere_report, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_gap, m)?)?;
    m.add_function(wrap_pyfunction!(sectional_spread, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_average_ricci, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}
