//! Method-of-lines integration of the first-order system
//!
//! ```text
//! u_t = w_x
//! (1 - d_xx) w_t = (alpha^2 u + f1(u, v))_x
//! v_t = z
//! z_t = v_xx - v + f2(u, v)
//! ```
//!
//! with Fourier collocation in space and classical RK4 in time, the exact
//! linear propagator used as an oracle, and the conserved-quantity and
//! blow-up monitors.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{
    candidate_structure, energy_with, hamiltonian_structure, momentum_with, InvariantSnapshot,
    ModelCoefficients, ModelError,
};
use crate::spectral::{PeriodicGrid, RealField, Spectral, SpectralError, MEAN_TOLERANCE};

/// Amplitude beyond which a run is stopped as a suspected blow-up.
pub const BLOWUP_AMPLITUDE: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidDt(f64),
    #[error("final time must be nonnegative and finite, got {0}")]
    InvalidFinalTime(f64),
    #[error("monitor stride must be positive")]
    ZeroStride,
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `(u, w, v, z)` at time `t`, all on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub u: RealField,
    pub w: RealField,
    pub v: RealField,
    pub z: RealField,
    pub t: f64,
}

impl EvolutionState {
    pub fn new(
        u: RealField,
        w: RealField,
        v: RealField,
        z: RealField,
        t: f64,
    ) -> Result<Self, SpectralError> {
        u.check_same_grid(&w)?;
        u.check_same_grid(&v)?;
        u.check_same_grid(&z)?;
        Ok(Self { u, w, v, z, t })
    }

    pub fn zero(grid: PeriodicGrid) -> Self {
        Self {
            u: grid.zeros(),
            w: grid.zeros(),
            v: grid.zeros(),
            z: grid.zeros(),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.u.grid()
    }

    pub fn fields(&self) -> [&RealField; 4] {
        [&self.u, &self.w, &self.v, &self.z]
    }

    pub fn sup(&self) -> f64 {
        self.fields().iter().fold(0.0, |m, f| m.max(f.sup()))
    }

    pub fn is_finite(&self) -> bool {
        self.fields()
            .iter()
            .all(|f| f.values().iter().all(|v| v.is_finite()))
    }

    /// Largest `|field|` over the outer 10% of the domain, `|x| > 0.9 L`.
    pub fn boundary_amplitude(&self) -> f64 {
        let g = self.grid();
        let cut = 0.9 * g.half_length();
        let mut m: f64 = 0.0;
        for j in 0..g.len() {
            if g.node(j).abs() > cut {
                for f in self.fields() {
                    m = m.max(f.values()[j].abs());
                }
            }
        }
        m
    }
}

/// `(u, w, v, z)(0) = (u0, d_x^{-1} u1, v0, v1)`. `u1` must have zero mean.
pub fn to_first_order(
    u0: &RealField,
    u1: &RealField,
    v0: &RealField,
    v1: &RealField,
) -> Result<EvolutionState, SpectralError> {
    let w = Spectral::new(*u0.grid()).antiderivative_zero_mean(u1)?;
    EvolutionState::new(u0.clone(), w, v0.clone(), v1.clone(), 0.0)
}

/// Precomputed multipliers for the right-hand side on one grid.
#[derive(Debug, Clone)]
pub struct Evolver {
    coeffs: ModelCoefficients,
    spectral: Spectral,
    dealias: bool,
    dx: Vec<Complex64>,
    w_symbol: Vec<Complex64>,
    z_symbol: Vec<f64>,
    mask: Vec<bool>,
}

type Raw = [Vec<f64>; 4];

impl Evolver {
    pub fn new(coeffs: ModelCoefficients, grid: PeriodicGrid, dealias: bool) -> Self {
        let spectral = Spectral::new(grid);
        let nyq = grid.nyquist_index();
        let ks = spectral.wavenumbers().to_vec();
        let dx = spectral.derivative_multiplier(1);
        let w_symbol = ks
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if j == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k / (1.0 + k * k))
                }
            })
            .collect();
        let z_symbol = ks.iter().map(|&k| -(k * k) - 1.0).collect();
        Self {
            coeffs,
            spectral,
            dealias,
            dx,
            w_symbol,
            z_symbol,
            mask: grid.dealias_mask(),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn coeffs(&self) -> &ModelCoefficients {
        &self.coeffs
    }

    fn rhs_raw(&self, s: &Raw) -> Raw {
        let n = s[0].len();
        let c = &self.coeffs;
        let a2 = c.alpha * c.alpha;
        let (u, w, v, z) = (&s[0], &s[1], &s[2], &s[3]);

        let mut f1 = vec![0.0; n];
        let mut f2 = vec![0.0; n];
        for j in 0..n {
            f1[j] = a2 * u[j] + c.f1(u[j], v[j]);
            f2[j] = c.f2(u[j], v[j]);
        }
        let mut f1_hat = self.spectral.forward(&f1);
        let mut f2_hat = self.spectral.forward(&f2);
        if self.dealias {
            // The linear part alpha^2 u is unaffected by aliasing; only the
            // quadratic part is truncated.
            let u_hat = self.spectral.forward(u);
            for j in 0..n {
                if !self.mask[j] {
                    f1_hat[j] = a2 * u_hat[j];
                    f2_hat[j] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let mut w_hat = self.spectral.forward(w);
        for j in 0..n {
            w_hat[j] *= self.dx[j];
            f1_hat[j] *= self.w_symbol[j];
        }
        let v_hat = self.spectral.forward(v);
        for j in 0..n {
            f2_hat[j] += self.z_symbol[j] * v_hat[j];
        }
        [
            self.spectral.inverse_real(w_hat),
            self.spectral.inverse_real(f1_hat),
            z.clone(),
            self.spectral.inverse_real(f2_hat),
        ]
    }

    pub fn rhs(&self, state: &EvolutionState) -> Result<[RealField; 4], SpectralError> {
        if state.grid() != self.grid() {
            return Err(SpectralError::GridMismatch);
        }
        let d = self.rhs_raw(&raw(state));
        let g = *self.grid();
        let [a, b, c, e] = d;
        Ok([
            RealField::from_raw(g, a),
            RealField::from_raw(g, b),
            RealField::from_raw(g, c),
            RealField::from_raw(g, e),
        ])
    }

    fn step_raw(&self, y: &Raw, dt: f64) -> Raw {
        let axpy = |y: &Raw, k: &Raw, a: f64| -> Raw {
            std::array::from_fn(|i| y[i].iter().zip(&k[i]).map(|(p, q)| p + a * q).collect())
        };
        let k1 = self.rhs_raw(y);
        let k2 = self.rhs_raw(&axpy(y, &k1, 0.5 * dt));
        let k3 = self.rhs_raw(&axpy(y, &k2, 0.5 * dt));
        let k4 = self.rhs_raw(&axpy(y, &k3, dt));
        std::array::from_fn(|i| {
            (0..y[i].len())
                .map(|j| {
                    y[i][j] + dt / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j])
                })
                .collect()
        })
    }

    pub fn step(&self, state: &EvolutionState, dt: f64) -> Result<EvolutionState, EvolutionError> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(EvolutionError::InvalidDt(dt));
        }
        if state.grid() != self.grid() {
            return Err(SpectralError::GridMismatch.into());
        }
        let next = from_raw(*self.grid(), self.step_raw(&raw(state), dt), state.t + dt);
        if !next.is_finite() {
            return Err(EvolutionError::NonFinite(next.t));
        }
        Ok(next)
    }
}

fn raw(s: &EvolutionState) -> Raw {
    [
        s.u.values().to_vec(),
        s.w.values().to_vec(),
        s.v.values().to_vec(),
        s.z.values().to_vec(),
    ]
}

fn from_raw(g: PeriodicGrid, r: Raw, t: f64) -> EvolutionState {
    let [u, w, v, z] = r;
    EvolutionState {
        u: RealField::from_raw(g, u),
        w: RealField::from_raw(g, w),
        v: RealField::from_raw(g, v),
        z: RealField::from_raw(g, z),
        t,
    }
}

/// Time derivative of the state (dealiased).
pub fn rhs(state: &EvolutionState, c: &ModelCoefficients) -> Result<[RealField; 4], SpectralError> {
    Evolver::new(*c, *state.grid(), true).rhs(state)
}

/// One classical RK4 step (dealiased). `dt` may be negative to step
/// backwards.
pub fn step_rk4(
    state: &EvolutionState,
    c: &ModelCoefficients,
    dt: f64,
) -> Result<EvolutionState, EvolutionError> {
    Evolver::new(*c, *state.grid(), true).step(state, dt)
}

/// Exact solution of the linear system `u_tt = alpha^2 u_xx + u_ttxx`,
/// `v_tt = v_xx - v` on the grid. Returns `(u, u_t, v, v_t)` at time `t`.
pub fn linear_propagate(
    alpha: f64,
    u0: &RealField,
    u1: &RealField,
    v0: &RealField,
    v1: &RealField,
    t: f64,
) -> Result<[RealField; 4], SpectralError> {
    u0.check_same_grid(u1)?;
    u0.check_same_grid(v0)?;
    u0.check_same_grid(v1)?;
    let g = *u0.grid();
    let sp = Spectral::new(g);
    let ks = sp.wavenumbers().to_vec();
    let (u0h, u1h, v0h, v1h) = (
        sp.forward(u0.values()),
        sp.forward(u1.values()),
        sp.forward(v0.values()),
        sp.forward(v1.values()),
    );
    let n = g.len();
    let mut out: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]);
    for j in 0..n {
        let k = ks[j];
        let root = (1.0 + k * k).sqrt();
        let om = (alpha * k).abs() / root;
        if om == 0.0 {
            out[0][j] = u0h[j] + t * u1h[j];
            out[1][j] = u1h[j];
        } else {
            let (s, c) = (om * t).sin_cos();
            out[0][j] = c * u0h[j] + s / om * u1h[j];
            out[1][j] = -om * s * u0h[j] + c * u1h[j];
        }
        let (s, c) = (root * t).sin_cos();
        out[2][j] = c * v0h[j] + s / root * v1h[j];
        out[3][j] = -root * s * v0h[j] + c * v1h[j];
    }
    Ok(out.map(|h| RealField::from_raw(g, sp.inverse_real(h))))
}

/// `dt = min(0.5 h / max(|alpha|, 1), 1e-2)`.
pub fn default_dt(grid: &PeriodicGrid, alpha: f64) -> f64 {
    (0.5 * grid.spacing() / alpha.abs().max(1.0)).min(1e-2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupSample {
    pub t: f64,
    pub i: f64,
    pub i1: f64,
}

/// `I(t) = |d^{-1} u|^2 + |u|^2 + |v|^2 + beta (t + t0)^2` and
/// `I1 = I^{-1/4}`. Requires a zero-mean `u`, which the flow preserves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupMonitor {
    pub beta: f64,
    pub t0: f64,
    pub enabled: bool,
    pub samples: Vec<BlowupSample>,
}

impl BlowupMonitor {
    pub fn new(beta: f64, t0: f64, mean_u: f64) -> Self {
        Self {
            beta,
            t0,
            enabled: mean_u.abs() <= MEAN_TOLERANCE,
            samples: Vec::new(),
        }
    }

    pub fn record(&mut self, spectral: &Spectral, s: &EvolutionState) {
        if !self.enabled {
            return;
        }
        let Ok(iu) = spectral.antiderivative_zero_mean(&s.u) else {
            self.enabled = false;
            self.samples.clear();
            return;
        };
        let sq = |f: &RealField| f.inner(f).expect("same grid");
        let tt = s.t + self.t0;
        let i = sq(&iu) + sq(&s.u) + sq(&s.v) + self.beta * tt * tt;
        self.samples.push(BlowupSample {
            t: s.t,
            i,
            i1: if i > 0.0 { i.powf(-0.25) } else { f64::NAN },
        });
    }

    /// Centered finite-difference `I'(t)` (one-sided at the ends).
    pub fn derivative(&self) -> Vec<f64> {
        let s = &self.samples;
        let n = s.len();
        (0..n)
            .map(|k| {
                if n < 2 {
                    return f64::NAN;
                }
                let (a, b) = if k == 0 {
                    (0, 1)
                } else if k == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (k - 1, k + 1)
                };
                (s[b].i - s[a].i) / (s[b].t - s[a].t)
            })
            .collect()
    }

    /// Largest discrete second difference of `I1`, scaled to a derivative.
    pub fn max_i1_second_difference(&self) -> f64 {
        self.samples
            .windows(3)
            .map(|w| w[0].i1 - 2.0 * w[1].i1 + w[2].i1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn i_monotone_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].i > w[0].i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum RunStatus {
    Completed,
    BlowupSuspected { t: f64, sup: f64, reason: String },
}

impl RunStatus {
    pub fn is_blowup(&self) -> bool {
        matches!(self, Self::BlowupSuspected { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveConfig {
    pub coeffs: ModelCoefficients,
    pub t_final: f64,
    /// `None` selects [`default_dt`].
    pub dt: Option<f64>,
    /// Steps between monitor samples.
    pub monitor_stride: usize,
    /// Keep every `k`-th monitored state; `None` keeps only the final one.
    pub snapshot_every: Option<usize>,
    pub beta: f64,
    pub t0: f64,
    pub dealias: bool,
}

impl EvolveConfig {
    pub fn new(coeffs: ModelCoefficients, t_final: f64) -> Self {
        Self {
            coeffs,
            t_final,
            dt: None,
            monitor_stride: 100,
            snapshot_every: None,
            beta: 0.0,
            t0: 0.0,
            dealias: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionRun {
    pub dt: f64,
    pub steps: usize,
    pub status: RunStatus,
    /// Whether the coefficients satisfy the Hamiltonian condition, so that
    /// `E` is a conserved quantity.
    pub energy_conserved: bool,
    pub invariants: Vec<InvariantSnapshot>,
    pub blowup: BlowupMonitor,
    /// Largest field amplitude seen on the outer 10% of the domain.
    pub boundary_amplitude: f64,
    #[serde(skip)]
    pub snapshots: Vec<EvolutionState>,
    #[serde(skip)]
    pub final_state: EvolutionState,
}

impl EvolutionRun {
    pub fn max_relative_drift(&self) -> (f64, f64) {
        let Some(first) = self.invariants.first() else {
            return (0.0, 0.0);
        };
        let e_scale = first.energy.abs().max(1.0);
        let f_scale = first.momentum.abs().max(1.0);
        self.invariants.iter().fold((0.0f64, 0.0f64), |(e, f), s| {
            (
                e.max((s.energy - first.energy).abs() / e_scale),
                f.max((s.momentum - first.momentum).abs() / f_scale),
            )
        })
    }
}

/// Integrate from `initial` to `cfg.t_final`, calling `observer` at every
/// monitor time (including the initial and final states).
pub fn evolve_with(
    initial: EvolutionState,
    cfg: &EvolveConfig,
    mut observer: impl FnMut(&EvolutionState),
) -> Result<EvolutionRun, EvolutionError> {
    cfg.coeffs.validate()?;
    if !(cfg.t_final >= 0.0 && cfg.t_final.is_finite()) {
        return Err(EvolutionError::InvalidFinalTime(cfg.t_final));
    }
    if cfg.monitor_stride == 0 {
        return Err(EvolutionError::ZeroStride);
    }
    let grid = *initial.grid();
    let dt_target = cfg
        .dt
        .unwrap_or_else(|| default_dt(&grid, cfg.coeffs.alpha));
    if !(dt_target > 0.0 && dt_target.is_finite()) {
        return Err(EvolutionError::InvalidDt(dt_target));
    }
    let steps = ((cfg.t_final / dt_target) - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 {
        dt_target
    } else {
        cfg.t_final / steps as f64
    };

    let evolver = Evolver::new(cfg.coeffs, grid, cfg.dealias);
    let ham = hamiltonian_structure(&cfg.coeffs);
    let energy_conserved = ham.is_ok();
    let h = ham.unwrap_or_else(|_| candidate_structure(&cfg.coeffs));

    let mut blowup = BlowupMonitor::new(cfg.beta, cfg.t0, initial.u.mean());
    let mut invariants = Vec::new();
    let mut snapshots = Vec::new();
    let mut boundary: f64 = 0.0;
    let mut monitors = 0usize;
    let mut record = |s: &EvolutionState,
                      blowup: &mut BlowupMonitor,
                      invariants: &mut Vec<InvariantSnapshot>,
                      snapshots: &mut Vec<EvolutionState>,
                      boundary: &mut f64| {
        invariants.push(InvariantSnapshot {
            t: s.t,
            energy: energy_with(evolver.spectral(), &cfg.coeffs, &h, s),
            momentum: momentum_with(evolver.spectral(), s),
        });
        blowup.record(evolver.spectral(), s);
        *boundary = boundary.max(s.boundary_amplitude());
        if let Some(k) = cfg.snapshot_every {
            if monitors.is_multiple_of(k) {
                snapshots.push(s.clone());
            }
        }
        monitors += 1;
        observer(s);
    };

    let mut state = initial;
    let mut y = raw(&state);
    record(
        &state,
        &mut blowup,
        &mut invariants,
        &mut snapshots,
        &mut boundary,
    );
    let mut status = RunStatus::Completed;
    let mut taken = 0;
    for n in 1..=steps {
        y = evolver.step_raw(&y, dt);
        taken = n;
        let t = n as f64 * dt;
        let finite = y.iter().all(|f| f.iter().all(|v| v.is_finite()));
        let sup = y
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if !finite || sup > BLOWUP_AMPLITUDE {
            status = RunStatus::BlowupSuspected {
                t,
                sup: if finite { sup } else { f64::INFINITY },
                reason: if finite {
                    "amplitude above 1e8"
                } else {
                    "non-finite state"
                }
                .to_string(),
            };
            break;
        }
        if n % cfg.monitor_stride == 0 || n == steps {
            state = from_raw(grid, y.clone(), t);
            record(
                &state,
                &mut blowup,
                &mut invariants,
                &mut snapshots,
                &mut boundary,
            );
        }
    }
    if cfg.snapshot_every.is_none() || snapshots.last().map(|s| s.t) != Some(state.t) {
        if cfg.snapshot_every.is_none() {
            snapshots.clear();
        }
        snapshots.push(state.clone());
    }
    Ok(EvolutionRun {
        dt,
        steps: taken,
        status,
        energy_conserved,
        invariants,
        blowup,
        boundary_amplitude: boundary,
        snapshots,
        final_state: state,
    })
}

pub fn evolve(initial: EvolutionState, cfg: &EvolveConfig) -> Result<EvolutionRun, EvolutionError> {
    evolve_with(initial, cfg, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::exact_csw_special;
    use crate::spectral::build_grid;
    use std::f64::consts::PI;

    fn max_diff(a: &RealField, b: &RealField) -> f64 {
        a.zip_with(b, |x, y| x - y).unwrap().sup()
    }

    fn bump(x: f64) -> f64 {
        (-x * x / 2.0).exp()
    }

    #[test]
    fn to_first_order_examples() {
        let g = build_grid(PI, 64).unwrap();
        let z = g.zeros();
        let s = to_first_order(&z, &z, &z, &z).unwrap();
        assert_eq!(s.w.sup(), 0.0);

        let s = to_first_order(&z, &g.sample(f64::cos), &z, &z).unwrap();
        assert!(max_diff(&s.w, &g.sample(f64::sin)) < 1e-12);

        assert!(matches!(
            to_first_order(&z, &g.sample(|_| 1.0), &z, &z),
            Err(SpectralError::NonZeroMean(_))
        ));
    }

    #[test]
    fn rhs_examples() {
        let g = build_grid(PI, 32).unwrap();
        let c = ModelCoefficients::new(0.8, [1.0; 3], [1.0; 3]).unwrap();
        let d = rhs(&EvolutionState::zero(g), &c).unwrap();
        assert!(d.iter().all(|f| f.sup() == 0.0));

        let lin = ModelCoefficients::linear(0.8).unwrap();
        let s =
            EvolutionState::new(g.sample(f64::cos), g.zeros(), g.zeros(), g.zeros(), 0.0).unwrap();
        let d = rhs(&s, &lin).unwrap();
        // w_t = alpha^2 * ik/(1+k^2) cos -> -alpha^2/2 sin
        assert!(max_diff(&d[1], &g.sample(|x| -0.64 / 2.0 * x.sin())) < 1e-13);
        assert!((d[1].sup() - 0.32).abs() < 1e-3);
    }

    #[test]
    fn rhs_matches_flow_map_difference() {
        let g = build_grid(10.0, 64).unwrap();
        let c = ModelCoefficients::new(0.7, [0.4, -0.2, 0.3], [0.5, 0.1, -0.3]).unwrap();
        let s = EvolutionState::new(
            g.sample(|x| 0.5 * bump(x)),
            g.sample(|x| 0.3 * x * bump(x)),
            g.sample(|x| 0.4 * bump(x - 1.0)),
            g.sample(|x| -0.2 * bump(x + 1.0)),
            0.0,
        )
        .unwrap();
        let dt = 1e-6;
        let fwd = step_rk4(&s, &c, dt).unwrap();
        let bwd = step_rk4(&s, &c, -dt).unwrap();
        let d = rhs(&s, &c).unwrap();
        for (i, f) in d.iter().enumerate() {
            let fd = fwd.fields()[i]
                .zip_with(bwd.fields()[i], |a, b| (a - b) / (2.0 * dt))
                .unwrap();
            assert!(max_diff(&fd, f) < 1e-7, "field {i}: {}", max_diff(&fd, f));
        }
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = build_grid(5.0, 32).unwrap();
        let c = ModelCoefficients::new(1.0, [1.0; 3], [1.0; 3]).unwrap();
        let s = step_rk4(&EvolutionState::zero(g), &c, 0.01).unwrap();
        assert_eq!(s.sup(), 0.0);
        assert!(matches!(
            step_rk4(&EvolutionState::zero(g), &c, f64::NAN),
            Err(EvolutionError::InvalidDt(_))
        ));
    }

    fn linear_data(g: &PeriodicGrid) -> [RealField; 4] {
        [
            g.sample(|x| bump(x) * 0.8),
            g.sample(|x| -x * bump(x)),
            g.sample(|x| 0.5 * bump(x - 2.0)),
            g.sample(|x| 0.3 * bump(x + 1.0)),
        ]
    }

    #[test]
    fn rk4_matches_linear_propagator() {
        let g = build_grid(20.0, 128).unwrap();
        let alpha = 0.9;
        let c = ModelCoefficients::linear(alpha).unwrap();
        let [u0, u1, v0, v1] = linear_data(&g);
        let mut s = to_first_order(&u0, &u1, &v0, &v1).unwrap();
        let ev = Evolver::new(c, g, true);
        for _ in 0..1000 {
            s = ev.step(&s, 1e-3).unwrap();
        }
        let [u, ut, v, vt] = linear_propagate(alpha, &u0, &u1, &v0, &v1, 1.0).unwrap();
        let w = Spectral::new(g).antiderivative_zero_mean(&ut).unwrap();
        assert!(max_diff(&s.u, &u) < 1e-9);
        assert!(max_diff(&s.w, &w) < 1e-9);
        assert!(max_diff(&s.v, &v) < 1e-9);
        assert!(max_diff(&s.z, &vt) < 1e-9);
    }

    #[test]
    fn rk4_preserves_mean_u() {
        let g = build_grid(20.0, 128).unwrap();
        let c = ModelCoefficients::new(0.9, [1.0; 3], [1.0; 3]).unwrap();
        let [u0, u1, v0, v1] = linear_data(&g);
        let mut s = to_first_order(&u0.map(|x| 0.3 * x), &u1.map(|x| 0.3 * x), &v0, &v1).unwrap();
        let m0 = s.u.mean();
        for _ in 0..50 {
            s = step_rk4(&s, &c, 1e-2).unwrap();
            assert!((s.u.mean() - m0).abs() < 1e-13);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let w = exact_csw_special(0.5, 0.5f64.sqrt(), 1.0, -1.0).unwrap();
        let g = build_grid(20.0, 128).unwrap();
        let [u0, u1, v0, v1] = w.initial_data(&g);
        let s0 = to_first_order(&u0, &u1, &v0, &v1).unwrap();
        let run = |dt: f64| {
            let ev = Evolver::new(w.coeffs, g, true);
            let mut s = s0.clone();
            let n = (1.0 / dt).round() as usize;
            for _ in 0..n {
                s = ev.step(&s, dt).unwrap();
            }
            s
        };
        let (a, b, c) = (run(0.04), run(0.02), run(0.01));
        let e1 = max_diff(&a.u, &b.u).max(max_diff(&a.v, &b.v));
        let e2 = max_diff(&b.u, &c.u).max(max_diff(&b.v, &c.v));
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "order {order} ({e1:e}, {e2:e})");
    }

    #[test]
    fn linear_propagate_examples() {
        let g = build_grid(PI, 64).unwrap();
        let z = g.zeros();
        let [u0, u1, v0, v1] = [
            g.sample(|x| x.sin() + 0.2),
            g.sample(|x| (2.0 * x).cos()),
            g.sample(|x| (3.0 * x).cos()),
            g.sample(|x| x.sin()),
        ];
        let out = linear_propagate(0.7, &u0, &u1, &v0, &v1, 0.0).unwrap();
        for (a, b) in out.iter().zip([&u0, &u1, &v0, &v1]) {
            assert!(max_diff(a, b) < 1e-14);
        }

        let t = PI / 2f64.sqrt();
        let out = linear_propagate(0.7, &z, &z, &g.sample(f64::cos), &z, t).unwrap();
        assert!(max_diff(&out[2], &g.sample(|x| -x.cos())) < 1e-12);

        // zero mode grows linearly
        let one = g.sample(|_| 1.0);
        let out = linear_propagate(0.7, &z, &one, &z, &z, 2.5).unwrap();
        assert!(max_diff(&out[0], &g.sample(|_| 2.5)) < 1e-13);
    }

    #[test]
    fn linear_u_energy_is_constant() {
        let g = build_grid(20.0, 128).unwrap();
        let alpha = 1.3;
        let [u0, u1, v0, v1] = linear_data(&g);
        let sp = Spectral::new(g);
        let form = |t: f64| {
            let [u, ut, _, _] = linear_propagate(alpha, &u0, &u1, &v0, &v1, t).unwrap();
            let w = sp.antiderivative_zero_mean(&ut).unwrap();
            alpha * alpha * u.inner(&u).unwrap() + w.inner(&w).unwrap() + ut.inner(&ut).unwrap()
        };
        let e0 = form(0.0);
        for t in [0.3, 1.7, 12.0] {
            assert!((form(t) - e0).abs() < 1e-12 * e0.max(1.0));
        }
    }

    #[test]
    fn evolve_zero_data_stays_zero() {
        let g = build_grid(10.0, 64).unwrap();
        let c = ModelCoefficients::new(1.0, [1.0; 3], [1.0; 3]).unwrap();
        let mut cfg = EvolveConfig::new(c, 1.0);
        cfg.monitor_stride = 10;
        let run = evolve(EvolutionState::zero(g), &cfg).unwrap();
        assert_eq!(run.status, RunStatus::Completed);
        assert_eq!(run.final_state.sup(), 0.0);
        assert!((run.final_state.t - 1.0).abs() < 1e-12);
        assert!(run
            .invariants
            .iter()
            .all(|s| s.energy == 0.0 && s.momentum == 0.0));
    }

    #[test]
    fn default_dt_rule() {
        let g = build_grid(60.0, 1024).unwrap();
        assert_eq!(default_dt(&g, 0.5), 1e-2);
        let g = build_grid(1.0, 64).unwrap();
        assert!((default_dt(&g, 2.0) - 0.5 * g.spacing() / 2.0).abs() < 1e-16);
    }

    #[test]
    fn monitor_disabled_for_nonzero_mean() {
        let m = BlowupMonitor::new(0.0, 0.0, 0.5);
        assert!(!m.enabled);
    }
}
