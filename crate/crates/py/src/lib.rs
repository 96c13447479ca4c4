//! Python bindings: system specification, the exact engines, rate
//! extraction, and both non-Markovianity measures.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use spinbath::blp::{blp_measure, default_pairs};
use spinbath::channel::ChannelTrajectory;
use spinbath::correlations as corr;
use spinbath::dense::DenseEngine;
use spinbath::gaussian;
use spinbath::rates::{degree_from_rates, rates_analytic};
use spinbath::resolvent;
use spinbath::robustness::{trajectory_robustness, DEFAULT_BRANCH_WINDOW};
use spinbath::sector;
use spinbath::EnvInitialState;

fn err(e: spinbath::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_env(env: &str, beta: f64, h_prep: f64) -> PyResult<EnvInitialState> {
    match env {
        "vacuum" => Ok(EnvInitialState::Vacuum),
        "thermal" => Ok(EnvInitialState::Thermal { beta }),
        "ground" => Ok(EnvInitialState::Ground { h_prep }),
        _ => Err(PyValueError::new_err(format!(
            "env must be vacuum|thermal|ground, got '{env}'"
        ))),
    }
}

/// Emitter-chain system specification.
#[pyclass(name = "SystemSpec")]
#[derive(Clone)]
struct PySystemSpec {
    inner: spinbath::SystemSpec,
}

#[pymethods]
impl PySystemSpec {
    /// `delta` is the bare emitter splitting; the detuning from the
    /// Zeeman-shifted band center is `delta - 2 h`.
    #[new]
    fn new(n: usize, j: f64, h: f64, omega: f64, delta: f64, m0: usize) -> PyResult<Self> {
        Ok(PySystemSpec { inner: spinbath::SystemSpec::new(n, j, h, omega, delta, m0).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn m0(&self) -> usize {
        self.inner.m0
    }

    #[getter]
    fn detuning(&self) -> f64 {
        self.inner.detuning()
    }

    fn band_edges(&self) -> (f64, f64) {
        self.inner.band_edges()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "SystemSpec(n={}, j={}, h={}, omega={}, delta={}, m0={})",
            s.n, s.j, s.h, s.omega, s.delta, s.m0
        )
    }
}

/// Reconstructed dynamical map samples `(a, b, c)` on a uniform time grid.
#[pyclass(name = "Trajectory")]
struct PyTrajectory {
    inner: ChannelTrajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.t).collect()
    }

    #[getter]
    fn a(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.a).collect()
    }

    #[getter]
    fn c(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.c).collect()
    }

    #[getter]
    fn b(&self) -> Vec<Complex64> {
        self.inner.samples.iter().map(|s| s.b).collect()
    }

    /// Time-local rates: dict of lists
    /// `{t, E_LS, gamma1, gamma2, gamma3, mu, divergent}`.
    fn rates<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        use pyo3::types::PyDict;
        let rates = rates_analytic(&self.inner).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("t", rates.iter().map(|r| r.t).collect::<Vec<_>>())?;
        d.set_item("E_LS", rates.iter().map(|r| r.e_ls).collect::<Vec<_>>())?;
        d.set_item("gamma1", rates.iter().map(|r| r.gamma1).collect::<Vec<_>>())?;
        d.set_item("gamma2", rates.iter().map(|r| r.gamma2).collect::<Vec<_>>())?;
        d.set_item("gamma3", rates.iter().map(|r| r.gamma3).collect::<Vec<_>>())?;
        d.set_item("mu", rates.iter().map(|r| r.mu).collect::<Vec<_>>())?;
        d.set_item("divergent", rates.iter().map(|r| r.divergent).collect::<Vec<_>>())?;
        Ok(d)
    }

    /// Divisibility-robustness degree from the analytic rate expressions.
    fn degree(&self) -> PyResult<f64> {
        let rates = rates_analytic(&self.inner).map_err(err)?;
        Ok(degree_from_rates(&rates, self.inner.dt, false))
    }

    /// Divisibility-robustness degree from the generic per-step
    /// branch-and-project construction (no rate expressions).
    fn robustness_degree(&self) -> PyResult<f64> {
        Ok(trajectory_robustness(&self.inner, DEFAULT_BRANCH_WINDOW).map_err(err)?.degree)
    }

    /// BLP measure over the standard witness pairs.
    fn blp(&self) -> PyResult<f64> {
        Ok(blp_measure(&self.inner, &default_pairs()).map_err(err)?.n_blp)
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }
}

/// Vacuum dynamics in the single-excitation sector.
#[pyfunction]
fn evolve_vacuum(spec: &PySystemSpec, dt: f64, steps: usize) -> PyResult<PyTrajectory> {
    let res = sector::evolve_vacuum(&spec.inner, dt, steps).map_err(err)?;
    Ok(PyTrajectory { inner: res.trajectory })
}

/// Edge-coupled (`m0 = 1`) channel for any Gaussian environment.
#[pyfunction]
#[pyo3(signature = (spec, dt, steps, env = "vacuum", beta = 1.0, h_prep = 0.0))]
fn gaussian_channel(
    spec: &PySystemSpec,
    dt: f64,
    steps: usize,
    env: &str,
    beta: f64,
    h_prep: f64,
) -> PyResult<PyTrajectory> {
    let env = parse_env(env, beta, h_prep)?;
    let res = gaussian::channel_m01(&spec.inner, &env, dt, steps).map_err(err)?;
    Ok(PyTrajectory { inner: res.trajectory })
}

/// Full many-body process tomography (small chains only).
#[pyfunction]
#[pyo3(signature = (spec, dt, steps, env = "vacuum", beta = 1.0, h_prep = 0.0))]
fn dense_tomography(
    spec: &PySystemSpec,
    dt: f64,
    steps: usize,
    env: &str,
    beta: f64,
    h_prep: f64,
) -> PyResult<PyTrajectory> {
    let env = parse_env(env, beta, h_prep)?;
    let engine = DenseEngine::new(&spec.inner).map_err(err)?;
    Ok(PyTrajectory { inner: engine.tomography(&env, dt, steps).map_err(err)? })
}

/// Thermodynamic-limit vacuum amplitude `C_e(t)` by contour integration.
#[pyfunction]
#[pyo3(signature = (spec, dt, steps, eta = resolvent::DEFAULT_ETA))]
fn vacuum_amplitude_tdl(
    spec: &PySystemSpec,
    dt: f64,
    steps: usize,
    eta: f64,
) -> PyResult<Vec<Complex64>> {
    resolvent::vacuum_amplitude_tdl(&spec.inner, dt, steps, eta).map_err(err)
}

/// Bound-state energies outside the band, `(lower, upper)`.
#[pyfunction]
fn bound_states(spec: &PySystemSpec) -> (Option<f64>, Option<f64>) {
    let bs = resolvent::bound_states(&spec.inner);
    (bs.lower, bs.upper)
}

/// Finite-temperature bath correlators `(alpha_plus, alpha_minus)` via the
/// stabilized Gaussian trace.
#[pyfunction]
fn correlation_gaussian(
    spec: &PySystemSpec,
    beta: f64,
    dt: f64,
    steps: usize,
) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
    let series = corr::correlation_gaussian(&spec.inner, beta, dt, steps).map_err(err)?;
    Ok((series.alpha_plus, series.alpha_minus))
}

/// Correlation time of a real kernel sampled at `dt`:
/// `(tau_c, no_decay, slow_decay)`.
#[pyfunction]
fn correlation_time(kernel: Vec<f64>, dt: f64) -> (f64, bool, bool) {
    let ct = corr::correlation_time(&kernel, dt);
    (ct.tau_c, ct.no_decay, ct.slow_decay)
}

#[pymodule]
fn spinbath_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemSpec>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(evolve_vacuum, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_channel, m)?)?;
    m.add_function(wrap_pyfunction!(dense_tomography, m)?)?;
    m.add_function(wrap_pyfunction!(vacuum_amplitude_tdl, m)?)?;
    m.add_function(wrap_pyfunction!(bound_states, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_time, m)?)?;
    Ok(())
}
