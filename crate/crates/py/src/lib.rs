//! Python bindings: `import kgb`.

use kgb_core::closed_form::exact_csw_special;
use kgb_core::evolution::{
    evolve as run_evolve, linear_propagate as propagate, to_first_order, EvolveConfig,
};
use kgb_core::kdv::{run_kdv, KdvErrorTable, KdvRunConfig};
use kgb_core::model::{candidate_structure, energy, hamiltonian_structure, momentum};
use kgb_core::regimes::{classify as classify_speed, RegionReport};
use kgb_core::spectral::{build_grid, PeriodicGrid};
use kgb_core::wave_solver::{solve_wave as solve, GuessKind, Method, SolveOptions};
use kgb_core::{ErrorKind, ModelCoefficients, RealField};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: impl Into<kgb_core::Error>) -> PyErr {
    let e: kgb_core::Error = e.into();
    match e.kind() {
        ErrorKind::Validation => PyValueError::new_err(e.to_string()),
        ErrorKind::Numerical => PyArithmeticError::new_err(e.to_string()),
    }
}

fn field(grid: PeriodicGrid, values: Vec<f64>) -> PyResult<RealField> {
    RealField::new(grid, values).map_err(to_py)
}

/// Quadratic coefficients of f1 and f2 together with alpha.
#[pyclass(name = "Coefficients", frozen)]
struct PyCoefficients {
    inner: ModelCoefficients,
}

#[pymethods]
impl PyCoefficients {
    #[new]
    #[pyo3(signature = (alpha, a_uu=1.0, a_uv=1.0, a_vv=1.0, b_uu=1.0, b_uv=1.0, b_vv=1.0))]
    fn new(
        alpha: f64,
        a_uu: f64,
        a_uv: f64,
        a_vv: f64,
        b_uu: f64,
        b_uv: f64,
        b_vv: f64,
    ) -> PyResult<Self> {
        let inner =
            ModelCoefficients::new(alpha, [a_uu, a_uv, a_vv], [b_uu, b_uv, b_vv]).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    /// `(a_uu, a_uv, a_vv)`
    #[getter]
    fn a(&self) -> (f64, f64, f64) {
        (self.inner.a_uu, self.inner.a_uv, self.inner.a_vv)
    }

    /// `(b_uu, b_uv, b_vv)`
    #[getter]
    fn b(&self) -> (f64, f64, f64) {
        (self.inner.b_uu, self.inner.b_uv, self.inner.b_vv)
    }

    fn f1(&self, u: f64, v: f64) -> f64 {
        self.inner.f1(u, v)
    }

    fn f2(&self, u: f64, v: f64) -> f64 {
        self.inner.f2(u, v)
    }

    fn is_hamiltonian(&self) -> bool {
        hamiltonian_structure(&self.inner).is_ok()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "Coefficients(alpha={}, a_uu={}, a_uv={}, a_vv={}, b_uu={}, b_uv={}, b_vv={})",
            c.alpha, c.a_uu, c.a_uv, c.a_vv, c.b_uu, c.b_uv, c.b_vv
        )
    }
}

#[pyclass(name = "RegionReport", frozen, get_all)]
struct PyRegionReport {
    alpha: f64,
    c_s: f64,
    mu: f64,
    a: f64,
    b: f64,
    roots: Vec<(f64, f64)>,
    label: String,
    predicted: String,
    warnings: Vec<String>,
}

impl From<RegionReport> for PyRegionReport {
    fn from(r: RegionReport) -> Self {
        Self {
            alpha: r.alpha,
            c_s: r.c_s,
            mu: r.mu,
            a: r.a,
            b: r.b,
            roots: r.roots.iter().map(|z| (z.re, z.im)).collect(),
            label: r.label.as_str().to_string(),
            predicted: r.predicted.as_str().to_string(),
            warnings: r.warnings,
        }
    }
}

#[pymethods]
impl PyRegionReport {
    fn __repr__(&self) -> String {
        format!(
            "RegionReport(label={}, predicted={}, mu={})",
            self.label, self.predicted, self.mu
        )
    }
}

#[pyfunction]
fn classify(coeffs: &PyCoefficients, c_s: f64) -> PyResult<PyRegionReport> {
    Ok(classify_speed(&coeffs.inner, c_s).map_err(to_py)?.into())
}

#[pyclass(name = "WaveProfile", frozen, get_all)]
struct PyWaveProfile {
    x: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    c_s: f64,
    status: String,
    iterations: usize,
    res: f64,
    trace_m: Vec<f64>,
    trace_res: Vec<f64>,
    label: String,
    ripple_amplitude: f64,
    warnings: Vec<String>,
}

/// Traveling wave of speed `c_s` on `[-L, L)` with `N` nodes. `guess` is an
/// optional `(u, v)` pair; the default is the normal-form sech^2 profile.
#[pyfunction]
#[pyo3(signature = (coeffs, c_s, L=60.0, N=1024, tol=1e-10, max_iter=500, extrapolate=false, window=5, method="petviashvili", guess=None))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn solve_wave(
    py: Python<'_>,
    coeffs: &PyCoefficients,
    c_s: f64,
    L: f64,
    N: usize,
    tol: f64,
    max_iter: usize,
    extrapolate: bool,
    window: usize,
    method: &str,
    guess: Option<(Vec<f64>, Vec<f64>)>,
) -> PyResult<PyWaveProfile> {
    let grid = build_grid(L, N).map_err(to_py)?;
    let method = match method {
        "petviashvili" => Method::Petviashvili,
        "newton" => Method::Newton,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    let guess = match guess {
        Some((u, v)) => GuessKind::Custom(field(grid, u)?, field(grid, v)?),
        None => GuessKind::CswNormalForm,
    };
    let opts = SolveOptions {
        tol,
        max_iter,
        extrapolate,
        window,
        method,
    };
    let c = coeffs.inner;
    let p = py
        .detach(|| solve(&c, c_s, &grid, &guess, &opts))
        .map_err(to_py)?;
    Ok(PyWaveProfile {
        x: grid.nodes(),
        u: p.u.values().to_vec(),
        v: p.v.values().to_vec(),
        c_s,
        status: format!("{:?}", p.status),
        iterations: p.iterations,
        res: p.res,
        trace_m: p.trace.m,
        trace_res: p.trace.res,
        label: p.classified.label.as_str().to_string(),
        ripple_amplitude: p.ripple_amplitude,
        warnings: p.warnings,
    })
}

/// Closed-form coupled solitary wave. Returns `(coefficients, x, u, v)`.
#[pyfunction]
#[pyo3(signature = (alpha, c_s, b_uv, a_vv, L=60.0, N=1024))]
#[allow(non_snake_case, clippy::type_complexity)]
fn exact_csw(
    alpha: f64,
    c_s: f64,
    b_uv: f64,
    a_vv: f64,
    L: f64,
    N: usize,
) -> PyResult<(PyCoefficients, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let w = exact_csw_special(alpha, c_s, b_uv, a_vv).map_err(to_py)?;
    let grid = build_grid(L, N).map_err(to_py)?;
    let (u, v) = w.sample(&grid, 0.0);
    Ok((
        PyCoefficients { inner: w.coeffs },
        grid.nodes(),
        u.into_values(),
        v.into_values(),
    ))
}

#[pyclass(name = "EvolutionResult", frozen, get_all)]
struct PyEvolutionResult {
    t: f64,
    dt: f64,
    steps: usize,
    status: String,
    u: Vec<f64>,
    w: Vec<f64>,
    v: Vec<f64>,
    z: Vec<f64>,
    times: Vec<f64>,
    energy: Vec<f64>,
    momentum: Vec<f64>,
    energy_conserved: bool,
}

/// Integrate from `(u0, u1, v0, v1)` on `[-L, L)` to time `T`.
#[pyfunction]
#[pyo3(signature = (coeffs, L, u0, u1, v0, v1, T, dt=None, monitor_stride=100, dealias=true))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    coeffs: &PyCoefficients,
    L: f64,
    u0: Vec<f64>,
    u1: Vec<f64>,
    v0: Vec<f64>,
    v1: Vec<f64>,
    T: f64,
    dt: Option<f64>,
    monitor_stride: usize,
    dealias: bool,
) -> PyResult<PyEvolutionResult> {
    let grid = build_grid(L, u0.len()).map_err(to_py)?;
    let s0 = to_first_order(
        &field(grid, u0)?,
        &field(grid, u1)?,
        &field(grid, v0)?,
        &field(grid, v1)?,
    )
    .map_err(to_py)?;
    let mut cfg = EvolveConfig::new(coeffs.inner, T);
    cfg.dt = dt;
    cfg.monitor_stride = monitor_stride;
    cfg.dealias = dealias;
    let run = py.detach(|| run_evolve(s0, &cfg)).map_err(to_py)?;
    let f = &run.final_state;
    Ok(PyEvolutionResult {
        t: f.t,
        dt: run.dt,
        steps: run.steps,
        status: match &run.status {
            kgb_core::evolution::RunStatus::Completed => "Completed".to_string(),
            kgb_core::evolution::RunStatus::BlowupSuspected { reason, .. } => {
                format!("BlowupSuspected: {reason}")
            }
        },
        u: f.u.values().to_vec(),
        w: f.w.values().to_vec(),
        v: f.v.values().to_vec(),
        z: f.z.values().to_vec(),
        times: run.invariants.iter().map(|s| s.t).collect(),
        energy: run.invariants.iter().map(|s| s.energy).collect(),
        momentum: run.invariants.iter().map(|s| s.momentum).collect(),
        energy_conserved: run.energy_conserved,
    })
}

/// Exact linear flow. Returns `(u, u_t, v, v_t)` at time `t`.
#[pyfunction]
#[pyo3(signature = (alpha, L, u0, u1, v0, v1, t))]
#[allow(non_snake_case, clippy::type_complexity)]
fn linear_propagate(
    alpha: f64,
    L: f64,
    u0: Vec<f64>,
    u1: Vec<f64>,
    v0: Vec<f64>,
    v1: Vec<f64>,
    t: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let grid = build_grid(L, u0.len()).map_err(to_py)?;
    let [a, b, c, d] = propagate(
        alpha,
        &field(grid, u0)?,
        &field(grid, u1)?,
        &field(grid, v0)?,
        &field(grid, v1)?,
        t,
    )
    .map_err(to_py)?;
    Ok((
        a.into_values(),
        b.into_values(),
        c.into_values(),
        d.into_values(),
    ))
}

/// `(E, F)` of a first-order state `(u, w, v, z)`.
#[pyfunction]
#[pyo3(signature = (coeffs, L, u, w, v, z))]
#[allow(non_snake_case)]
fn invariants(
    coeffs: &PyCoefficients,
    L: f64,
    u: Vec<f64>,
    w: Vec<f64>,
    v: Vec<f64>,
    z: Vec<f64>,
) -> PyResult<(f64, f64)> {
    let grid = build_grid(L, u.len()).map_err(to_py)?;
    let s = kgb_core::evolution::EvolutionState::new(
        field(grid, u)?,
        field(grid, w)?,
        field(grid, v)?,
        field(grid, z)?,
        0.0,
    )
    .map_err(to_py)?;
    let c = &coeffs.inner;
    let h = hamiltonian_structure(c).unwrap_or_else(|_| candidate_structure(c));
    Ok((energy(c, &h, &s), momentum(&s)))
}

/// KdV-approximation error experiment. Returns `(slope, r2, rows)` with
/// rows `(epsilon, t, err_u, err_v)`.
#[pyfunction]
#[pyo3(signature = (eps_list, T=100.0, c=0.8, alpha=1.0, dt=0.01, spacing=0.5, sample_stride=100))]
#[allow(non_snake_case, clippy::too_many_arguments, clippy::type_complexity)]
fn kdv_error(
    py: Python<'_>,
    mut eps_list: Vec<f64>,
    T: f64,
    c: f64,
    alpha: f64,
    dt: f64,
    spacing: f64,
    sample_stride: usize,
) -> PyResult<(f64, f64, Vec<(f64, f64, f64, f64)>)> {
    eps_list.sort_by(|a, b| b.total_cmp(a));
    let coeffs = ModelCoefficients::new(alpha, [1.0; 3], [1.0; 3]).map_err(to_py)?;
    let table = py
        .detach(|| -> Result<KdvErrorTable, kgb_core::KdvError> {
            let runs = eps_list
                .iter()
                .map(|&eps| {
                    run_kdv(&KdvRunConfig {
                        eps,
                        c,
                        coeffs,
                        t_final: T,
                        dt,
                        spacing,
                        sample_stride,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            KdvErrorTable::from_runs(&runs)
        })
        .map_err(to_py)?;
    let fit = table
        .fit
        .ok_or_else(|| PyValueError::new_err("need at least two epsilons with positive error"))?;
    let rows = table
        .rows
        .iter()
        .map(|r| (r.epsilon, r.t, r.err_u, r.err_v))
        .collect();
    Ok((fit.slope, fit.r2, rows))
}

#[pymodule]
fn kgb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PyRegionReport>()?;
    m.add_class::<PyWaveProfile>()?;
    m.add_class::<PyEvolutionResult>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(solve_wave, m)?)?;
    m.add_function(wrap_pyfunction!(exact_csw, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(linear_propagate, m)?)?;
    m.add_function(wrap_pyfunction!(invariants, m)?)?;
    m.add_function(wrap_pyfunction!(kdv_error, m)?)?;
    Ok(())
}
