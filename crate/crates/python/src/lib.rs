//! Python bindings. Series are passed as lists of floats; experiment results
//! come back as JSON strings.

use diffyw::changepoint::{DEFAULT_WBS_INTERVALS, DEFAULT_WBS_THRESHOLD};
use diffyw::estimators::with_bootstrap;
use diffyw::experiments::{self, ScenarioSpec};
use diffyw::model::default_burnin;
use diffyw::{rng, ChangepointConfig, Error, Series};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(pydiffyw, DegenerateError, PyArithmeticError);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(_) => PyOSError::new_err(err.to_string()),
        Error::DegenerateSeries(_)
        | Error::NumericalDegeneracy { .. }
        | Error::SingularScale(_) => DegenerateError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn series(values: Vec<f64>) -> PyResult<Series> {
    Series::new(values).map_err(to_py)
}

#[pyclass(name = "ARModel", module = "pydiffyw", frozen)]
struct PyARModel {
    inner: diffyw::ARModel,
}

#[pymethods]
impl PyARModel {
    #[new]
    #[pyo3(signature = (coeffs, noise_var = 1.0))]
    fn new(coeffs: Vec<f64>, noise_var: f64) -> PyResult<Self> {
        Ok(Self {
            inner: diffyw::ARModel::new(coeffs, noise_var).map_err(to_py)?,
        })
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    #[getter]
    fn noise_var(&self) -> f64 {
        self.inner.noise_var()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    /// Exact autocovariances γ(0..=maxlag).
    fn acvf(&self, maxlag: usize) -> PyResult<Vec<f64>> {
        Ok(diffyw::theoretical_acvf(&self.inner, maxlag)
            .map_err(to_py)?
            .acvf)
    }

    /// Exact autocorrelations of the first differences, ρ_d(0..=maxlag).
    fn diff_acf(&self, maxlag: usize) -> PyResult<Vec<f64>> {
        diffyw::model::diff_acf(&self.inner, maxlag).map_err(to_py)
    }

    #[pyo3(signature = (n, seed = rng::DEFAULT_SEED, burnin = None))]
    fn simulate(&self, n: usize, seed: u64, burnin: Option<usize>) -> PyResult<Vec<f64>> {
        let burnin = burnin.unwrap_or_else(|| default_burnin(self.inner.order()));
        Ok(diffyw::simulate_ar(&self.inner, n, seed, burnin)
            .map_err(to_py)?
            .into_values())
    }

    fn __repr__(&self) -> String {
        format!(
            "ARModel(coeffs={:?}, noise_var={})",
            self.inner.coeffs(),
            self.inner.noise_var()
        )
    }
}

#[pyclass(name = "EstimationReport", module = "pydiffyw", frozen)]
struct PyReport {
    inner: diffyw::EstimationReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.name()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs.clone()
    }

    #[getter]
    fn noise_var(&self) -> Option<f64> {
        self.inner.noise_var
    }

    #[getter]
    fn causal(&self) -> bool {
        self.inner.diagnostics.causal
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.diagnostics.warnings.clone()
    }

    #[getter]
    fn bootstrap_se(&self) -> Option<Vec<f64>> {
        self.inner.diagnostics.bootstrap_se.clone()
    }

    fn to_model(&self) -> PyResult<PyARModel> {
        Ok(PyARModel {
            inner: self.inner.to_model().map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        let var = self
            .inner
            .noise_var
            .map_or("None".to_string(), |v| v.to_string());
        format!(
            "EstimationReport(method='{}', coeffs={:?}, noise_var={var})",
            self.inner.method, self.inner.coeffs
        )
    }
}

fn wrap(report: diffyw::Result<diffyw::EstimationReport>) -> PyResult<PyReport> {
    Ok(PyReport {
        inner: report.map_err(to_py)?,
    })
}

/// Difference Yule-Walker fit, optionally with parametric bootstrap SEs.
#[pyfunction]
#[pyo3(signature = (values, p = 1, bootstrap_reps = None, seed = rng::DEFAULT_SEED))]
fn diff_yule_walker(
    values: Vec<f64>,
    p: usize,
    bootstrap_reps: Option<usize>,
    seed: u64,
) -> PyResult<PyReport> {
    let s = series(values)?;
    let report = diffyw::diff_yule_walker(&s, p).and_then(|r| match bootstrap_reps {
        Some(reps) => with_bootstrap(r, &s, reps, seed),
        None => Ok(r),
    });
    wrap(report)
}

#[pyfunction]
#[pyo3(signature = (values, p = 1))]
fn classical_yule_walker(values: Vec<f64>, p: usize) -> PyResult<PyReport> {
    wrap(diffyw::classical_yule_walker(&series(values)?, p))
}

#[pyfunction]
fn ar1seg_estimate(values: Vec<f64>) -> PyResult<PyReport> {
    wrap(diffyw::ar1seg_estimate(&series(values)?))
}

#[pyfunction]
fn rolling_window_yw(values: Vec<f64>, p: usize, window: usize) -> PyResult<PyReport> {
    wrap(diffyw::rolling_window_yw(&series(values)?, p, window))
}

/// Yule-Walker after removing segment means at the given changepoint times.
#[pyfunction]
fn segmented_yule_walker(
    values: Vec<f64>,
    p: usize,
    changepoints: Vec<usize>,
) -> PyResult<PyReport> {
    let means = vec![0.0; changepoints.len() + 1];
    let config = ChangepointConfig::new(changepoints, means).map_err(to_py)?;
    wrap(diffyw::segmented_yule_walker(&series(values)?, p, &config))
}

#[pyfunction]
fn apply_mean_shifts(
    values: Vec<f64>,
    changepoints: Vec<usize>,
    means: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let config = ChangepointConfig::new(changepoints, means).map_err(to_py)?;
    Ok(diffyw::apply_mean_shifts(&series(values)?, &config)
        .map_err(to_py)?
        .into_values())
}

/// One-step prediction residuals `X_t − Σ φ_j X_{t−j}`, `t > p`.
#[pyfunction]
fn one_step_residuals(values: Vec<f64>, coeffs: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(diffyw::one_step_residuals(&series(values)?, &coeffs)
        .map_err(to_py)?
        .values)
}

/// Returns `(changepoint_times, segment_means)`.
#[pyfunction]
fn pelt_meanshift(values: Vec<f64>, penalty: f64) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let seg = diffyw::pelt_meanshift(&series(values)?, penalty).map_err(to_py)?;
    Ok((seg.changepoint_times, seg.segment_means))
}

/// Returns `(changepoint_times, segment_means)`.
#[pyfunction]
#[pyo3(signature = (values, num_intervals = DEFAULT_WBS_INTERVALS, threshold = DEFAULT_WBS_THRESHOLD, seed = rng::DEFAULT_SEED))]
fn wbs_meanshift(
    values: Vec<f64>,
    num_intervals: usize,
    threshold: f64,
    seed: u64,
) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let seg =
        diffyw::wbs_meanshift(&series(values)?, num_intervals, threshold, seed).map_err(to_py)?;
    Ok((seg.changepoint_times, seg.segment_means))
}

/// Run an experiment from a JSON spec; returns the summary rows as JSON.
#[pyfunction]
fn run_experiment(py: Python<'_>, spec_json: &str) -> PyResult<String> {
    let spec: ScenarioSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let result = py.detach(|| experiments::run(&spec)).map_err(to_py)?;
    serde_json::to_string(&result.summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
pub fn pydiffyw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyARModel>()?;
    m.add_class::<PyReport>()?;
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add("DEFAULT_SEED", rng::DEFAULT_SEED)?;
    m.add_function(wrap_pyfunction!(diff_yule_walker, m)?)?;
    m.add_function(wrap_pyfunction!(classical_yule_walker, m)?)?;
    m.add_function(wrap_pyfunction!(ar1seg_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(rolling_window_yw, m)?)?;
    m.add_function(wrap_pyfunction!(segmented_yule_walker, m)?)?;
    m.add_function(wrap_pyfunction!(apply_mean_shifts, m)?)?;
    m.add_function(wrap_pyfunction!(one_step_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(pelt_meanshift, m)?)?;
    m.add_function(wrap_pyfunction!(wbs_meanshift, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
