//! Long-wave experiment: start the full system from a KdV soliton and measure
//! how far the solution drifts from `(eps^2 psi_u, 0)`.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::closed_form::{wrap, ClosedFormError, KdvSoliton};
use crate::evolution::{
    evolve_with, to_first_order, EvolutionError, EvolutionState, EvolveConfig, RunStatus,
};
use crate::model::ModelCoefficients;
use crate::spectral::{PeriodicGrid, RealField, SpectralError};

/// Minimum `eps L` for the soliton tail to be negligible at the boundary.
pub const MIN_EPS_L: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KdvError {
    #[error("grid too short: eps * L = {0} < 40")]
    GridTooShort(f64),
    #[error("need at least two distinct epsilons with positive errors to fit")]
    TooFewPoints,
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `(u0, u1, v0, v1)` from the KdV soliton and its exact time derivative.
pub fn build_initial_data(
    eps: f64,
    c: f64,
    alpha: f64,
    a_uu: f64,
    grid: &PeriodicGrid,
) -> Result<[RealField; 4], KdvError> {
    let sol = KdvSoliton::new(eps, c, alpha, a_uu)?;
    if eps * grid.half_length() < MIN_EPS_L {
        return Err(KdvError::GridTooShort(eps * grid.half_length()));
    }
    let u0 = grid.sample(|x| sol.value(x, 0.0));
    let u1 = grid.sample(|x| sol.time_derivative(x, 0.0));
    let m = u1.mean();
    let u1 = u1.map(|y| y - m);
    Ok([u0, u1, grid.zeros(), grid.zeros()])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KdvErrorRow {
    pub epsilon: f64,
    pub t: f64,
    pub err_u: f64,
    pub err_v: f64,
    /// L2 norms of the same differences.
    pub l2_u: f64,
    pub l2_v: f64,
}

impl KdvErrorRow {
    /// Sup-norm error of the pair `(u, v)`.
    pub fn err(&self) -> f64 {
        self.err_u.max(self.err_v)
    }

    pub fn l2(&self) -> f64 {
        self.l2_u.hypot(self.l2_v)
    }
}

/// Sup-norm distance of a state from the wrapped KdV reference.
pub fn measure_error(state: &EvolutionState, sol: &KdvSoliton) -> KdvErrorRow {
    let g = state.grid();
    let l = g.half_length();
    let shift = sol.speed() * state.t;
    let mut err_u: f64 = 0.0;
    let mut sq_u = 0.0;
    for j in 0..g.len() {
        let xi = wrap(g.node(j) - shift, l);
        let d = state.u.values()[j] - sol.value(xi, 0.0);
        err_u = err_u.max(d.abs());
        sq_u += d * d;
    }
    let sq_v: f64 = state.v.values().iter().map(|x| x * x).sum();
    KdvErrorRow {
        epsilon: sol.eps,
        t: state.t,
        err_u,
        err_v: state.v.sup(),
        l2_u: (sq_u * g.spacing()).sqrt(),
        l2_v: (sq_v * g.spacing()).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdvRunConfig {
    pub eps: f64,
    pub c: f64,
    pub coeffs: ModelCoefficients,
    pub t_final: f64,
    pub dt: f64,
    /// Target grid spacing; `N` is the next power of two.
    pub spacing: f64,
    /// Steps between error samples.
    pub sample_stride: usize,
}

impl KdvRunConfig {
    /// `c = 0.8`, `alpha = 1`, all quadratic coefficients 1, `T = 100`,
    /// `dt = 0.01`, `h ~ 0.5`, samples every `t = 1`.
    pub fn standard(eps: f64) -> Self {
        Self {
            eps,
            c: 0.8,
            coeffs: ModelCoefficients::new(1.0, [1.0; 3], [1.0; 3]).expect("valid"),
            t_final: 100.0,
            dt: 0.01,
            spacing: 0.5,
            sample_stride: 100,
        }
    }

    /// `L = |alpha| T + 40/eps`, `N` the next power of two with `2L/N <= h`.
    pub fn grid(&self) -> Result<PeriodicGrid, KdvError> {
        if !(self.eps > 0.0 && self.spacing > 0.0 && self.t_final >= 0.0) {
            return Err(KdvError::Invalid(
                "eps, spacing and T must be positive".into(),
            ));
        }
        let l = self.coeffs.alpha.abs() * self.t_final + MIN_EPS_L / self.eps;
        let n = ((2.0 * l / self.spacing).ceil() as usize)
            .next_power_of_two()
            .max(8);
        Ok(PeriodicGrid::new(l, n)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdvRun {
    pub eps: f64,
    pub grid: PeriodicGrid,
    pub dt: f64,
    pub status: RunStatus,
    pub rows: Vec<KdvErrorRow>,
}

pub fn run_kdv(cfg: &KdvRunConfig) -> Result<KdvRun, KdvError> {
    let grid = cfg.grid()?;
    let sol = KdvSoliton::new(cfg.eps, cfg.c, cfg.coeffs.alpha, cfg.coeffs.a_uu)?;
    let [u0, u1, v0, v1] =
        build_initial_data(cfg.eps, cfg.c, cfg.coeffs.alpha, cfg.coeffs.a_uu, &grid)?;
    let initial = to_first_order(&u0, &u1, &v0, &v1)?;
    let mut ev = EvolveConfig::new(cfg.coeffs, cfg.t_final);
    ev.dt = Some(cfg.dt);
    ev.monitor_stride = cfg.sample_stride;
    let mut rows = Vec::new();
    let run = evolve_with(initial, &ev, |s| rows.push(measure_error(s, &sol)))?;
    Ok(KdvRun {
        eps: cfg.eps,
        grid,
        dt: run.dt,
        status: run.status,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// 95% confidence interval of the slope (NaN with two points).
    pub slope_ci: [f64; 2],
}

/// Least-squares fit of `log(max_t err)` against `log(eps)` for the sup-norm
/// pair error.
pub fn fit_exponent(rows: &[KdvErrorRow]) -> Result<ExponentFit, KdvError> {
    fit_exponent_by(rows, KdvErrorRow::err)
}

pub fn fit_exponent_by(
    rows: &[KdvErrorRow],
    metric: impl Fn(&KdvErrorRow) -> f64,
) -> Result<ExponentFit, KdvError> {
    let mut eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    eps.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    eps.dedup();
    let points: Vec<(f64, f64)> = eps
        .iter()
        .map(|&e| {
            let m = rows
                .iter()
                .filter(|r| r.epsilon == e)
                .fold(0.0f64, |m, r| m.max(metric(r)));
            (e.ln(), m.ln())
        })
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    linear_fit(&points)
}

fn linear_fit(points: &[(f64, f64)]) -> Result<ExponentFit, KdvError> {
    let n = points.len();
    if n < 2 {
        return Err(KdvError::TooFewPoints);
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(KdvError::TooFewPoints);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_ci = if n > 2 {
        let dof = nf - 2.0;
        let se = (sse / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof)
            .expect("positive dof")
            .inverse_cdf(0.975);
        [slope - t * se, slope + t * se]
    } else {
        [f64::NAN, f64::NAN]
    };
    Ok(ExponentFit {
        slope,
        intercept,
        r2,
        slope_ci,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Boundedness {
    pub t_of_max: f64,
    pub max_first_half: f64,
    pub max_second_half: f64,
    pub holds: bool,
}

/// The maximum error is attained before `T/2`, or grows by less than 20%
/// over the second half.
pub fn bounded_in_time(rows: &[KdvErrorRow]) -> Boundedness {
    let t_end = rows.iter().fold(0.0f64, |m, r| m.max(r.t));
    let half = 0.5 * t_end;
    let (mut a, mut b) = (0.0f64, 0.0f64);
    let mut t_of_max = 0.0;
    let mut best = f64::NEG_INFINITY;
    for r in rows {
        let e = r.err();
        if r.t <= half {
            a = a.max(e);
        } else {
            b = b.max(e);
        }
        if e > best {
            best = e;
            t_of_max = r.t;
        }
    }
    Boundedness {
        t_of_max,
        max_first_half: a,
        max_second_half: b,
        holds: t_of_max <= half || b < 1.2 * a,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdvErrorTable {
    pub rows: Vec<KdvErrorRow>,
    pub fit: Option<ExponentFit>,
    /// Same fit for the L2 error.
    pub fit_l2: Option<ExponentFit>,
}

impl KdvErrorTable {
    /// Assemble from runs ordered by decreasing epsilon.
    pub fn from_runs(runs: &[KdvRun]) -> Result<Self, KdvError> {
        if runs.windows(2).any(|w| !(w[0].eps > w[1].eps)) {
            return Err(KdvError::Invalid(
                "epsilons must be strictly decreasing".into(),
            ));
        }
        let rows: Vec<KdvErrorRow> = runs.iter().flat_map(|r| r.rows.iter().copied()).collect();
        let fit = fit_exponent(&rows).ok();
        let fit_l2 = fit_exponent_by(&rows, KdvErrorRow::l2).ok();
        Ok(Self { rows, fit, fit_l2 })
    }
}
