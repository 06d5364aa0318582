//! Python bindings: parameters, grids, initial data, the grid and
//! finite-volume solvers, fits, lemma checks and config-driven execution.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use psystem::analysis::{self, LifespanLaw};
use psystem::{experiment, thermo, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config { .. }
        | Error::InvalidParameter(_)
        | Error::Precondition(_)
        | Error::Domain { .. }
        | Error::DegenerateFit(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Parameters", from_py_object)]
#[derive(Clone)]
struct PyParameters(psystem::Parameters);

#[pymethods]
impl PyParameters {
    #[new]
    #[pyo3(signature = (gamma=1.4, lambda_=1.0, mu=0.5, epsilon=0.01))]
    fn new(gamma: f64, lambda_: f64, mu: f64, epsilon: f64) -> PyResult<Self> {
        psystem::Parameters::new(gamma, lambda_, mu, epsilon)
            .map(PyParameters)
            .map_err(py_err)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    /// `A(t) = exp(∫₀ᵗ λ/(2(1+τ)^μ) dτ)`.
    fn damping_weight(&self, t: f64) -> f64 {
        thermo::damping_weight(t, &self.0)
    }

    fn pressure(&self, u: f64) -> PyResult<f64> {
        thermo::pressure(u, &self.0).map_err(py_err)
    }

    fn sound_speed(&self, u: f64) -> PyResult<f64> {
        thermo::sound_speed(u, &self.0).map_err(py_err)
    }

    /// `(u, v) -> (r, s)`.
    fn to_riemann(&self, u: f64, v: f64) -> PyResult<(f64, f64)> {
        let rp = thermo::to_riemann(thermo::GasState { u, v }, &self.0).map_err(py_err)?;
        Ok((rp.r, rp.s))
    }

    /// `(r, s) -> (u, v)`.
    fn from_riemann(&self, r: f64, s: f64) -> PyResult<(f64, f64)> {
        let g = thermo::from_riemann(thermo::RiemannPair { r, s }, &self.0).map_err(py_err)?;
        Ok((g.u, g.v))
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "Parameters(gamma={}, lambda_={}, mu={}, epsilon={})",
            p.gamma, p.lambda, p.mu, p.epsilon
        )
    }
}

#[pyclass(name = "Grid", from_py_object)]
#[derive(Clone)]
struct PyGrid(psystem::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (x_min, x_max, n_cells, boundary="periodic"))]
    fn new(x_min: f64, x_max: f64, n_cells: usize, boundary: &str) -> PyResult<Self> {
        let b = boundary.parse().map_err(PyValueError::new_err)?;
        psystem::Grid::new(x_min, x_max, n_cells, b)
            .map(PyGrid)
            .map_err(py_err)
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.0.n_cells
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn centers(&self) -> Vec<f64> {
        self.0.centers()
    }
}

#[pyclass(name = "InitialData", from_py_object)]
#[derive(Clone)]
struct PyInitialData(psystem::InitialData);

#[pymethods]
impl PyInitialData {
    #[new]
    #[pyo3(signature = (family="sine", wavenumber=1.0, phase=0.0, center=0.0, width=1.0))]
    fn new(family: &str, wavenumber: f64, phase: f64, center: f64, width: f64) -> PyResult<Self> {
        let d = psystem::InitialData {
            family: family.parse().map_err(PyValueError::new_err)?,
            wavenumber,
            phase,
            center,
            width,
        };
        d.validate().map_err(py_err)?;
        Ok(PyInitialData(d))
    }
}

#[pyclass(name = "RunOutcome")]
struct PyRunOutcome(psystem::RunOutcome);

#[pymethods]
impl PyRunOutcome {
    /// `global_to_horizon`, `blow_up`, `vacuum` or `cfl_failure`.
    #[getter]
    fn status(&self) -> &'static str {
        self.0.status.name()
    }

    #[getter]
    fn status_time(&self) -> f64 {
        self.0.status.time()
    }

    #[getter]
    fn t_star(&self) -> Option<f64> {
        analysis::measure_lifespan(&self.0).time()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps
    }

    /// Rows `(t, sup_r, sup_s, sup_rx, sup_sx, sup_rt, sup_st)`.
    #[getter]
    fn series(&self) -> Vec<(f64, f64, f64, f64, f64, f64, f64)> {
        self.0
            .series
            .iter()
            .map(|s| (s.t, s.sup_r, s.sup_s, s.sup_rx, s.sup_sx, s.sup_rt, s.sup_st))
            .collect()
    }

    fn gradient_series(&self) -> Vec<(f64, f64)> {
        self.0.gradient_series()
    }

    fn rt_series(&self) -> Vec<(f64, f64)> {
        self.0.rt_series()
    }

    fn check_lemma_esp(&self) -> PyResult<bool> {
        analysis::check_lemma_esp(&self.0).map_err(py_err)
    }
}

#[pyfunction]
#[pyo3(signature = (data, grid, params, horizon, cfl=0.5, blowup_factor=1e4))]
fn run(
    data: &PyInitialData,
    grid: &PyGrid,
    params: &PyParameters,
    horizon: f64,
    cfl: f64,
    blowup_factor: f64,
) -> PyResult<PyRunOutcome> {
    let options = psystem::SolverOptions {
        cfl,
        blowup_factor,
        ..Default::default()
    };
    psystem::run(
        &data.0,
        &grid.0,
        &params.0,
        horizon,
        &psystem::SnapshotPolicy::default(),
        &options,
    )
    .map(PyRunOutcome)
    .map_err(py_err)
}

/// Finite-volume run; returns `(status, t, u, v)`.
#[pyfunction]
#[pyo3(signature = (data, grid, params, horizon, cfl=0.5))]
fn fv_run(
    data: &PyInitialData,
    grid: &PyGrid,
    params: &PyParameters,
    horizon: f64,
    cfl: f64,
) -> PyResult<(&'static str, f64, Vec<f64>, Vec<f64>)> {
    let o = psystem::fv_run(&data.0, &grid.0, &params.0, cfl, horizon).map_err(py_err)?;
    Ok((o.status.name(), o.status.time(), o.field.u, o.field.v))
}

/// `(exponent, constant, residual_rms, r_squared)`.
#[pyfunction]
fn fit_decay_exponent(series: Vec<(f64, f64)>, t_lo: f64, t_hi: f64) -> PyResult<(f64, f64, f64, f64)> {
    let f = analysis::fit_decay_exponent(&series, (t_lo, t_hi)).map_err(py_err)?;
    Ok((f.exponent, f.constant, f.residual_rms, f.r_squared))
}

/// `law` is `"power"` or `"exponential"`.
#[pyfunction]
#[pyo3(signature = (pairs, law="power"))]
fn fit_lifespan_scaling(pairs: Vec<(f64, f64)>, law: &str) -> PyResult<(f64, f64, f64, f64)> {
    let law: LifespanLaw = law.parse().map_err(PyValueError::new_err)?;
    let f = analysis::fit_lifespan_scaling(&pairs, law).map_err(py_err)?;
    Ok((f.exponent, f.constant, f.residual_rms, f.r_squared))
}

/// `(sup_value, argmax_t)` of the weighted damping integral.
#[pyfunction]
#[pyo3(signature = (params, t_max, n_quad=2000))]
fn check_lemma_dec_a(params: &PyParameters, t_max: f64, n_quad: usize) -> PyResult<(f64, f64)> {
    analysis::check_lemma_dec_a(&params.0, t_max, n_quad).map_err(py_err)
}

/// Blow-up time of the λ = 0 weighted Riccati equation on a constant
/// background `u`, or `None`.
#[pyfunction]
#[pyo3(signature = (y0, params, t_max, u=1.0, t0=0.0))]
fn lax_oracle_blowup_time(y0: f64, params: &PyParameters, t_max: f64, u: f64, t0: f64) -> PyResult<Option<f64>> {
    psystem::lax_oracle_blowup_time(y0, |_| u, t0, t_max, &params.0).map_err(py_err)
}

/// Parse flat `key=value` config text, run it, and return
/// `(exit_code, summary_json)`.
#[pyfunction]
fn execute_config(text: &str) -> PyResult<(i32, String)> {
    let cfg = experiment::parse_config(text).map_err(py_err)?;
    let exec = experiment::execute(&cfg).map_err(py_err)?;
    Ok((exec.exit_code, exec.summary.to_string()))
}

#[pymodule]
fn psystem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParameters>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyInitialData>()?;
    m.add_class::<PyRunOutcome>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(fv_run, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lifespan_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(check_lemma_dec_a, m)?)?;
    m.add_function(wrap_pyfunction!(lax_oracle_blowup_time, m)?)?;
    m.add_function(wrap_pyfunction!(execute_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
