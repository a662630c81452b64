//! Traveling-wave profiles by Petviashvili iteration in Fourier space.
//!
//! A wave `u(x - c_s t)`, `v(x - c_s t)` satisfies
//!
//! ```text
//! (c_s^2 - alpha^2) u - c_s^2 u'' = f1(u, v)
//! v - (1 - c_s^2) v''             = f2(u, v)
//! ```
//!
//! which in Fourier space is `S(k) (u_hat, v_hat) = (f1_hat, f2_hat)` with
//! `S = diag(p1, p2)`. Fourier coefficients here are normalized by `N`, so the
//! residual `RES` is the root-mean-square of the pointwise residual.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelCoefficients, ModelError};
use crate::regimes::{classify, RegimeError, RegionReport};
use crate::spectral::{
    top_third_energy_fraction, PeriodicGrid, RealField, Spectral, SpectralError,
};

pub const SYMBOL_TOLERANCE: f64 = 1e-10;
pub const STABILIZER_TOLERANCE: f64 = 1e-14;
pub const RESOLUTION_WARNING: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("singular symbol at k = {k}: {which}(k) = {value:e} (resonance {which}(k) = 0)")]
    SingularSymbol {
        k: f64,
        which: &'static str,
        value: f64,
    },
    #[error("normal-form guess needs a_uu != 0")]
    ZeroAuu,
    #[error("normal-form guess needs mu = 1 - alpha^2/c_s^2 > 0, got {0}")]
    NonPositiveMu(f64),
    #[error("stabilizing factor has a vanishing denominator ({0:e})")]
    DegenerateStabilizer(f64),
    #[error("iteration diverged at step {iteration}: RES = {res:e}, minimum {min_res:e}")]
    Diverged {
        iteration: usize,
        res: f64,
        min_res: f64,
    },
    #[error("extrapolation system is rank deficient")]
    RankDeficient,
    #[error("invalid solver option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Regime(#[from] RegimeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Diagonal symbol `S(k) = diag(p1(k), p2(k))` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    pub grid: PeriodicGrid,
    pub c_s: f64,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

pub fn assemble_symbols(
    c: &ModelCoefficients,
    c_s: f64,
    grid: &PeriodicGrid,
) -> Result<SymbolMatrix, WaveError> {
    let c2 = c_s * c_s;
    let a2 = c.alpha * c.alpha;
    let ks = grid.wavenumbers();
    let mut p1 = Vec::with_capacity(ks.len());
    let mut p2 = Vec::with_capacity(ks.len());
    for &k in &ks {
        let (a, b) = (c2 - a2 + c2 * k * k, 1.0 + (1.0 - c2) * k * k);
        if !(a.abs() > SYMBOL_TOLERANCE) {
            return Err(WaveError::SingularSymbol {
                k,
                which: "p1",
                value: a,
            });
        }
        if !(b.abs() > SYMBOL_TOLERANCE) {
            return Err(WaveError::SingularSymbol {
                k,
                which: "p2",
                value: b,
            });
        }
        p1.push(a);
        p2.push(b);
    }
    Ok(SymbolMatrix {
        grid: *grid,
        c_s,
        p1,
        p2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum GuessKind {
    /// `u0 = A_u sech^2(sqrt(mu) x / 2)`, `A_u = 3(c_s^2 - alpha^2)/(2 a_uu)`,
    /// `v0 = b_uu u0^2`.
    CswNormalForm,
    Custom(RealField, RealField),
}

pub fn initial_guess(
    kind: &GuessKind,
    c: &ModelCoefficients,
    c_s: f64,
    grid: &PeriodicGrid,
) -> Result<(RealField, RealField), WaveError> {
    match kind {
        GuessKind::CswNormalForm => {
            if c.a_uu == 0.0 {
                return Err(WaveError::ZeroAuu);
            }
            let c2 = c_s * c_s;
            let mu = 1.0 - c.alpha * c.alpha / c2;
            if !(mu > 0.0) {
                return Err(WaveError::NonPositiveMu(mu));
            }
            let amp = 3.0 * (c2 - c.alpha * c.alpha) / (2.0 * c.a_uu);
            let rate = mu.sqrt() / 2.0;
            let u = grid.sample(|x| amp / (rate * x).cosh().powi(2));
            let v = u.map(|s| c.b_uu * s * s);
            Ok((u, v))
        }
        GuessKind::Custom(u, v) => {
            if u.grid() != grid || v.grid() != grid {
                return Err(SpectralError::GridMismatch.into());
            }
            Ok((u.clone(), v.clone()))
        }
    }
}

/// Fourier data of one iterate.
struct Transformed {
    u_hat: Vec<Complex64>,
    v_hat: Vec<Complex64>,
    f1_hat: Vec<Complex64>,
    f2_hat: Vec<Complex64>,
}

fn transform(sp: &Spectral, c: &ModelCoefficients, u: &[f64], v: &[f64]) -> Transformed {
    let n = u.len() as f64;
    let scale = |mut x: Vec<Complex64>| {
        x.iter_mut().for_each(|z| *z /= n);
        x
    };
    let f1: Vec<f64> = u.iter().zip(v).map(|(&a, &b)| c.f1(a, b)).collect();
    let f2: Vec<f64> = u.iter().zip(v).map(|(&a, &b)| c.f2(a, b)).collect();
    Transformed {
        u_hat: scale(sp.forward(u)),
        v_hat: scale(sp.forward(v)),
        f1_hat: scale(sp.forward(&f1)),
        f2_hat: scale(sp.forward(&f2)),
    }
}

impl Transformed {
    fn residual(&self, s: &SymbolMatrix) -> f64 {
        let mut acc = 0.0;
        for j in 0..s.p1.len() {
            acc += (s.p1[j] * self.u_hat[j] - self.f1_hat[j]).norm_sqr();
            acc += (s.p2[j] * self.v_hat[j] - self.f2_hat[j]).norm_sqr();
        }
        acc.sqrt()
    }

    fn stabilizer(&self, s: &SymbolMatrix) -> Result<f64, WaveError> {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..s.p1.len() {
            num += s.p1[j] * self.u_hat[j].norm_sqr() + s.p2[j] * self.v_hat[j].norm_sqr();
            den += (self.f1_hat[j] * self.u_hat[j].conj()).re
                + (self.f2_hat[j] * self.v_hat[j].conj()).re;
        }
        if !(den.abs() > STABILIZER_TOLERANCE) {
            return Err(WaveError::DegenerateStabilizer(den));
        }
        Ok(num / den)
    }
}

/// `RES = |S (u_hat, v_hat) - (f1_hat, f2_hat)|_2` over all `2N` coefficients.
pub fn residual(
    u: &RealField,
    v: &RealField,
    symbols: &SymbolMatrix,
    c: &ModelCoefficients,
) -> Result<f64, WaveError> {
    u.check_same_grid(v)?;
    if u.grid() != &symbols.grid {
        return Err(SpectralError::GridMismatch.into());
    }
    let sp = Spectral::new(symbols.grid);
    Ok(transform(&sp, c, u.values(), v.values()).residual(symbols))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealSpaceResidual {
    pub rms: f64,
    pub sup: f64,
}

/// Residual of the profile equations evaluated in physical space with
/// spectral second derivatives.
pub fn traveling_residual(
    u: &RealField,
    v: &RealField,
    c: &ModelCoefficients,
    c_s: f64,
) -> Result<RealSpaceResidual, WaveError> {
    u.check_same_grid(v)?;
    let sp = Spectral::new(*u.grid());
    let uxx = sp.derivative(u, 2)?;
    let vxx = sp.derivative(v, 2)?;
    let c2 = c_s * c_s;
    let a2 = c.alpha * c.alpha;
    let n = u.grid().len();
    let mut sq = 0.0;
    let mut sup: f64 = 0.0;
    for j in 0..n {
        let (a, b) = (u.values()[j], v.values()[j]);
        let r1 = (c2 - a2) * a - c2 * uxx.values()[j] - c.f1(a, b);
        let r2 = b - (1.0 - c2) * vxx.values()[j] - c.f2(a, b);
        sq += r1 * r1 + r2 * r2;
        sup = sup.max(r1.abs()).max(r2.abs());
    }
    Ok(RealSpaceResidual {
        rms: (sq / n as f64).sqrt(),
        sup,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub u: RealField,
    pub v: RealField,
    pub m: f64,
    pub res: f64,
}

/// One iteration `(u_hat, v_hat) <- M^2 S^{-1} (f1_hat, f2_hat)`, returning the
/// stabilizer and residual of the input profile.
pub fn petviashvili_step(
    u: &RealField,
    v: &RealField,
    symbols: &SymbolMatrix,
    c: &ModelCoefficients,
) -> Result<StepResult, WaveError> {
    u.check_same_grid(v)?;
    if u.grid() != &symbols.grid {
        return Err(SpectralError::GridMismatch.into());
    }
    let sp = Spectral::new(symbols.grid);
    let (nu, nv, m, res) = step_raw(&sp, symbols, c, u.values(), v.values())?;
    let g = symbols.grid;
    Ok(StepResult {
        u: RealField::from_raw(g, nu),
        v: RealField::from_raw(g, nv),
        m,
        res,
    })
}

fn step_raw(
    sp: &Spectral,
    s: &SymbolMatrix,
    c: &ModelCoefficients,
    u: &[f64],
    v: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, f64, f64), WaveError> {
    let t = transform(sp, c, u, v);
    let res = t.residual(s);
    let m = t.stabilizer(s)?;
    let (nu, nv) = advance(sp, s, &t, m);
    Ok((nu, nv, m, res))
}

fn advance(sp: &Spectral, s: &SymbolMatrix, t: &Transformed, m: f64) -> (Vec<f64>, Vec<f64>) {
    let m2 = m * m * s.p1.len() as f64;
    let next_u: Vec<Complex64> = t
        .f1_hat
        .iter()
        .zip(&s.p1)
        .map(|(f, p)| f * (m2 / p))
        .collect();
    let next_v: Vec<Complex64> = t
        .f2_hat
        .iter()
        .zip(&s.p2)
        .map(|(f, p)| f * (m2 / p))
        .collect();
    (sp.inverse_real(next_u), sp.inverse_real(next_v))
}

fn is_even(f: &[f64]) -> bool {
    let n = f.len();
    let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (1..n).all(|j| (f[j] - f[n - j]).abs() <= 1e-12 * scale.max(1e-300))
}

fn symmetrize(f: &mut [f64]) {
    let n = f.len();
    for j in 1..n / 2 {
        let m = 0.5 * (f[j] + f[n - j]);
        f[j] = m;
        f[n - j] = m;
    }
}

fn apply_inverse_symbol(sp: &Spectral, p: &[f64], f: &[f64]) -> Vec<f64> {
    let mut h = sp.forward(f);
    h.iter_mut().zip(p).for_each(|(z, q)| *z /= q);
    sp.inverse_real(h)
}

/// One Newton step for `x - S^{-1} F(x) = 0`.
fn newton_update(
    sp: &Spectral,
    s: &SymbolMatrix,
    c: &ModelCoefficients,
    u: &[f64],
    v: &[f64],
    even: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let f1: Vec<f64> = u.iter().zip(v).map(|(&a, &b)| c.f1(a, b)).collect();
    let f2: Vec<f64> = u.iter().zip(v).map(|(&a, &b)| c.f2(a, b)).collect();
    let g1 = apply_inverse_symbol(sp, &s.p1, &f1);
    let g2 = apply_inverse_symbol(sp, &s.p2, &f2);
    let rhs: Vec<f64> = (0..n)
        .map(|j| g1[j] - u[j])
        .chain((0..n).map(|j| g2[j] - v[j]))
        .collect();
    let jac = |d: &[f64]| -> Vec<f64> {
        let (du, dv) = d.split_at(n);
        let mut j1 = vec![0.0; n];
        let mut j2 = vec![0.0; n];
        for j in 0..n {
            let (a, b, p, q) = (u[j], v[j], du[j], dv[j]);
            j1[j] = 2.0 * (c.a_uu * a * p + c.a_uv * (a * q + b * p) + c.a_vv * b * q);
            j2[j] = 2.0 * (c.b_uu * a * p + c.b_uv * (a * q + b * p) + c.b_vv * b * q);
        }
        let k1 = apply_inverse_symbol(sp, &s.p1, &j1);
        let k2 = apply_inverse_symbol(sp, &s.p2, &j2);
        (0..n)
            .map(|j| du[j] - k1[j])
            .chain((0..n).map(|j| dv[j] - k2[j]))
            .collect()
    };
    let mut d = gmres(jac, &rhs, 1e-13, 200);
    if even {
        let (a, b) = d.split_at_mut(n);
        symmetrize(a);
        symmetrize(b);
    }
    (
        (0..n).map(|j| u[j] + d[j]).collect(),
        (0..n).map(|j| v[j] + d[n + j]).collect(),
    )
}

/// Unrestarted GMRES with modified Gram-Schmidt and Givens rotations.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let beta = dot(b, b).sqrt();
    let mut x = vec![0.0; b.len()];
    if beta == 0.0 {
        return x;
    }
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|v| v / beta).collect()];
    let mut h: Vec<Vec<f64>> = Vec::new();
    let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut g = vec![beta];
    for j in 0..max_iter {
        let mut w = apply(&basis[j]);
        let mut col = vec![0.0; j + 2];
        for (i, q) in basis.iter().enumerate() {
            col[i] = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(a, b)| *a -= col[i] * b);
        }
        col[j + 1] = dot(&w, &w).sqrt();
        for i in 0..j {
            let (a, b) = (col[i], col[i + 1]);
            col[i] = cs[i] * a + sn[i] * b;
            col[i + 1] = -sn[i] * a + cs[i] * b;
        }
        let r = col[j].hypot(col[j + 1]);
        let next_norm = col[j + 1];
        let (c0, s0) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            (col[j] / r, col[j + 1] / r)
        };
        cs.push(c0);
        sn.push(s0);
        col[j] = r;
        col[j + 1] = 0.0;
        g.push(-s0 * g[j]);
        g[j] *= c0;
        h.push(col);
        if g[j + 1].abs() <= rtol * beta || next_norm == 0.0 || j + 1 == max_iter {
            break;
        }
        basis.push(w.iter().map(|v| v / next_norm).collect());
    }
    let k = h.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for l in i + 1..k {
            acc -= h[l][i] * y[l];
        }
        y[i] = if h[i][i] != 0.0 { acc / h[i][i] } else { 0.0 };
    }
    for (yi, q) in y.iter().zip(&basis) {
        x.iter_mut().zip(q).for_each(|(a, b)| *a += yi * b);
    }
    x
}

/// Minimal-polynomial extrapolation of a sequence of vectors. Needs at least
/// three iterates; the least-squares system is solved by SVD with rank
/// truncation, so exactly geometric sequences are summed exactly.
pub fn extrapolate_cycle(iterates: &[Vec<f64>]) -> Result<Vec<f64>, WaveError> {
    if iterates.len() < 3 {
        return Err(WaveError::InvalidOption(format!(
            "extrapolation needs at least 3 iterates, got {}",
            iterates.len()
        )));
    }
    let dim = iterates[0].len();
    if iterates.iter().any(|x| x.len() != dim) {
        return Err(WaveError::InvalidOption("iterates differ in length".into()));
    }
    let k = iterates.len() - 2;
    let diff = |j: usize| -> Vec<f64> {
        iterates[j + 1]
            .iter()
            .zip(&iterates[j])
            .map(|(a, b)| a - b)
            .collect()
    };
    let last = diff(k);
    if last.iter().all(|&d| d == 0.0) {
        return Ok(iterates[k + 1].clone());
    }
    let mut a = DMatrix::<f64>::zeros(dim, k);
    for j in 0..k {
        a.set_column(j, &DVector::from_vec(diff(j)));
    }
    let rhs = -DVector::from_vec(last);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return Err(WaveError::RankDeficient);
    }
    let coef = svd
        .solve(&rhs, 1e-12 * smax)
        .map_err(|_| WaveError::RankDeficient)?;
    let mut gamma: Vec<f64> = coef.iter().copied().collect();
    gamma.push(1.0);
    let total: f64 = gamma.iter().sum();
    let scale = gamma.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if !(total.abs() > 1e-12 * scale) {
        return Err(WaveError::RankDeficient);
    }
    let mut out = vec![0.0; dim];
    for (j, g) in gamma.iter().enumerate() {
        for (o, x) in out.iter_mut().zip(&iterates[j]) {
            *o += g / total * x;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Petviashvili,
    /// Newton iteration with the linear systems solved by GMRES,
    /// preconditioned by `S^{-1}`. Converges to waves that are repelling
    /// fixed points of the Petviashvili map.
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub extrapolate: bool,
    /// Iterates per extrapolation cycle.
    pub window: usize,
    pub method: Method,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            extrapolate: false,
            window: 5,
            method: Method::Petviashvili,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    Stagnated,
    MaxIterations,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub m: Vec<f64>,
    pub res: Vec<f64>,
    /// Sup-norm change of the profile produced by each iteration.
    pub change: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.res.len()
    }

    pub fn is_empty(&self) -> bool {
        self.res.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveProfile {
    #[serde(skip)]
    pub u: RealField,
    #[serde(skip)]
    pub v: RealField,
    pub grid: PeriodicGrid,
    pub c_s: f64,
    pub status: SolveStatus,
    /// Petviashvili iterations performed before the returned profile.
    pub iterations: usize,
    pub res: f64,
    pub trace: ConvergenceTrace,
    pub classified: RegionReport,
    /// `sup |v|` over the outer quarter of the domain, `|x| >= 3L/4`.
    pub ripple_amplitude: f64,
    pub top_third_energy: f64,
    pub warnings: Vec<String>,
}

/// `sup |f|` over the outer quarter of the domain.
pub fn outer_quarter_sup(f: &RealField) -> f64 {
    let g = f.grid();
    let cut = 0.75 * g.half_length();
    (0..g.len())
        .filter(|&j| g.node(j).abs() >= cut)
        .fold(0.0f64, |m, j| m.max(f.values()[j].abs()))
}

/// Window maxima of `|f|` over the outer quarter, split into `windows`
/// equal pieces per side (left pieces first).
pub fn outer_quarter_envelope(f: &RealField, windows: usize) -> Vec<f64> {
    let g = f.grid();
    let l = g.half_length();
    let width = 0.25 * l / windows as f64;
    let mut out = vec![0.0f64; 2 * windows];
    for j in 0..g.len() {
        let x = g.node(j);
        if x.abs() < 0.75 * l {
            continue;
        }
        let piece = (((x.abs() - 0.75 * l) / width) as usize).min(windows - 1);
        let slot = if x < 0.0 {
            windows - 1 - piece
        } else {
            windows + piece
        };
        out[slot] = out[slot].max(f.values()[j].abs());
    }
    out
}

pub fn solve_wave(
    c: &ModelCoefficients,
    c_s: f64,
    grid: &PeriodicGrid,
    guess: &GuessKind,
    opts: &SolveOptions,
) -> Result<WaveProfile, WaveError> {
    c.validate()?;
    if !(opts.tol > 0.0) {
        return Err(WaveError::InvalidOption(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    if opts.extrapolate && opts.window < 3 {
        return Err(WaveError::InvalidOption(
            "extrapolation window must be at least 3".into(),
        ));
    }
    let classified = classify(c, c_s)?;
    let symbols = assemble_symbols(c, c_s, grid)?;
    let (u0, v0) = initial_guess(guess, c, c_s, grid)?;
    let sp = Spectral::new(*grid);
    let n = grid.len();

    let mut u = u0.into_values();
    let mut v = v0.into_values();
    let mut trace = ConvergenceTrace::default();
    let mut window: Vec<Vec<f64>> = Vec::new();
    let mut min_res = f64::INFINITY;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut res = f64::NAN;

    let even = is_even(&u) && is_even(&v);
    for it in 0..=opts.max_iter {
        let t = transform(&sp, c, &u, &v);
        res = t.residual(&symbols);
        iterations = it;
        if !res.is_finite() || res > 1e6 * min_res {
            return Err(WaveError::Diverged {
                iteration: it,
                res,
                min_res,
            });
        }
        min_res = min_res.min(res);
        trace.m.push(t.stabilizer(&symbols)?);
        trace.res.push(res);
        if res < opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        if it >= 20 {
            let old = trace.res[it - 20];
            if ((res - old) / old).abs() < 1e-3 {
                status = SolveStatus::Stagnated;
                break;
            }
        }
        if it == opts.max_iter {
            break;
        }
        let (mut nu, mut nv) = match opts.method {
            Method::Petviashvili => advance(&sp, &symbols, &t, trace.m[it]),
            Method::Newton => newton_update(&sp, &symbols, c, &u, &v, even),
        };
        if opts.extrapolate && opts.method == Method::Petviashvili {
            if window.is_empty() {
                window.push([u.as_slice(), v.as_slice()].concat());
            }
            window.push([nu.as_slice(), nv.as_slice()].concat());
            if window.len() == opts.window {
                if let Ok(x) = extrapolate_cycle(&window) {
                    if x.iter().all(|z| z.is_finite()) {
                        nu = x[..n].to_vec();
                        nv = x[n..].to_vec();
                    }
                }
                window.clear();
            }
        }
        let change = nu
            .iter()
            .zip(&u)
            .chain(nv.iter().zip(&v))
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        trace.change.push(change);
        u = nu;
        v = nv;
    }
    trace.change.push(0.0);

    let u = RealField::from_raw(*grid, u);
    let v = RealField::from_raw(*grid, v);
    let top = top_third_energy_fraction(&sp, &u).max(top_third_energy_fraction(&sp, &v));
    let mut warnings = classified.warnings.clone();
    if top > RESOLUTION_WARNING {
        warnings.push(format!(
            "top-third spectral energy fraction {top:.3e} exceeds {RESOLUTION_WARNING:e}; increase N"
        ));
    }
    match status {
        SolveStatus::Stagnated => warnings.push(format!("residual stagnated at {res:.3e}")),
        SolveStatus::MaxIterations => {
            warnings.push(format!("max_iter reached with residual {res:.3e}"))
        }
        SolveStatus::Converged => {}
    }
    Ok(WaveProfile {
        ripple_amplitude: outer_quarter_sup(&v),
        u,
        v,
        grid: *grid,
        c_s,
        status,
        iterations,
        res,
        trace,
        classified,
        top_third_energy: top,
        warnings,
    })
}
