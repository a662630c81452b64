//! Analytic solutions and kernel artifacts used as oracles.
//!
//! * the exact solitary wave `u = A1 sech^2(b xi)`, `v = A2 sech(b xi)` of the
//!   special system `a_uv = b_uu = b_vv = 0`;
//! * the KdV soliton and its `v` corrections `B1`, `B2`;
//! * the solitary wave of the improved Boussinesq equation;
//! * the exponential Green kernels inverting `p1(k)`, `p2(k)`;
//! * constant solutions of the traveling-wave system.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelCoefficients, ModelError};
use crate::spectral::{PeriodicGrid, RealField, Spectral, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("c_s^2 = {0} must be below 1")]
    SuperSonic(f64),
    #[error("c_s^2 = {0} must exceed 1")]
    SubSonic(f64),
    #[error("amplitude radicand {0} is not positive")]
    NegativeRadicand(f64),
    #[error("b_uv must be nonzero")]
    ZeroBuv,
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("exponent p must be at least 2, got {0}")]
    BadExponent(u32),
    #[error("kernels need alpha^2 < c_s^2 < 1, got alpha^2 = {alpha2}, c_s^2 = {cs2}")]
    OutOfRegime { alpha2: f64, cs2: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn positive(name: &'static str, value: f64) -> Result<(), ClosedFormError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ClosedFormError::NonPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactCswParams {
    pub b: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
}

/// Exact solitary wave of `u_tt = alpha^2 u_xx + u_ttxx + (a_uu u^2 + a_vv v^2)_xx`,
/// `v_tt = v_xx - v + 2 b_uv u v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactCsw {
    pub coeffs: ModelCoefficients,
    pub c_s: f64,
    pub params: ExactCswParams,
}

impl ExactCsw {
    pub fn u(&self, xi: f64) -> f64 {
        self.params.a1 * sech(self.params.b * xi).powi(2)
    }

    pub fn v(&self, xi: f64) -> f64 {
        self.params.a2 * sech(self.params.b * xi)
    }

    pub fn du(&self, xi: f64) -> f64 {
        let bx = self.params.b * xi;
        -2.0 * self.params.a1 * self.params.b * sech(bx).powi(2) * bx.tanh()
    }

    pub fn dv(&self, xi: f64) -> f64 {
        let bx = self.params.b * xi;
        -self.params.a2 * self.params.b * sech(bx) * bx.tanh()
    }

    /// Profiles at time `t`, i.e. evaluated at `x - c_s t` wrapped into the
    /// periodic domain.
    pub fn sample(&self, grid: &PeriodicGrid, t: f64) -> (RealField, RealField) {
        let shift = self.c_s * t;
        let l = grid.half_length();
        let xi = |x: f64| wrap(x - shift, l);
        (
            grid.sample(|x| self.u(xi(x))),
            grid.sample(|x| self.v(xi(x))),
        )
    }

    /// `(u0, u1, v0, v1)` for the traveling wave at `t = 0`.
    pub fn initial_data(&self, grid: &PeriodicGrid) -> [RealField; 4] {
        let c = self.c_s;
        [
            grid.sample(|x| self.u(x)),
            grid.sample(|x| -c * self.du(x)),
            grid.sample(|x| self.v(x)),
            grid.sample(|x| -c * self.dv(x)),
        ]
    }
}

/// Wrap `x` into `[-l, l)`.
pub fn wrap(x: f64, l: f64) -> f64 {
    let p = 2.0 * l;
    let y = (x + l).rem_euclid(p) - l;
    if y >= l {
        y - p
    } else {
        y
    }
}

pub fn exact_csw_special(
    alpha: f64,
    c_s: f64,
    b_uv: f64,
    a_vv: f64,
) -> Result<ExactCsw, ClosedFormError> {
    let c2 = c_s * c_s;
    if !(c2 < 1.0) {
        return Err(ClosedFormError::SuperSonic(c2));
    }
    if b_uv == 0.0 {
        return Err(ClosedFormError::ZeroBuv);
    }
    let b2 = 1.0 / (1.0 - c2);
    let radicand = (c2 - alpha * alpha - 4.0 * b2 * c2) / (a_vv * b_uv);
    if !(radicand > 0.0) {
        return Err(ClosedFormError::NegativeRadicand(radicand));
    }
    let a_uu = 6.0 * (b2 - 1.0) * b_uv;
    let coeffs = ModelCoefficients::new(alpha, [a_uu, 0.0, a_vv], [0.0, b_uv, 0.0])?;
    Ok(ExactCsw {
        coeffs,
        c_s,
        params: ExactCswParams {
            b: b2.sqrt(),
            a1: 1.0 / b_uv,
            a2: radicand.sqrt(),
        },
    })
}

/// KdV soliton `eps^2 (3 c alpha^2/a_uu) sech^2(|alpha| sqrt(c/2) (eps(x - alpha t) - c eps^3 alpha t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KdvSoliton {
    pub eps: f64,
    pub c: f64,
    pub alpha: f64,
    pub a_uu: f64,
}

impl KdvSoliton {
    pub fn new(eps: f64, c: f64, alpha: f64, a_uu: f64) -> Result<Self, ClosedFormError> {
        positive("eps", eps)?;
        positive("c", c)?;
        positive("a_uu", a_uu)?;
        if !(alpha.is_finite() && alpha != 0.0) {
            return Err(ModelError::ZeroAlpha(alpha).into());
        }
        Ok(Self {
            eps,
            c,
            alpha,
            a_uu,
        })
    }

    /// Amplitude of the slow profile `A`.
    pub fn amplitude(&self) -> f64 {
        3.0 * self.c * self.alpha * self.alpha / self.a_uu
    }

    pub fn width_factor(&self) -> f64 {
        self.alpha.abs() * (self.c / 2.0).sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.eps * self.eps * self.amplitude()
    }

    /// Slow profile `A(xi)` with `xi = X - c T`.
    pub fn slow_profile(&self, xi: f64) -> f64 {
        self.amplitude() * sech(self.width_factor() * xi).powi(2)
    }

    /// Physical speed `alpha (1 + c eps^2)`.
    pub fn speed(&self) -> f64 {
        self.alpha * (1.0 + self.c * self.eps * self.eps)
    }

    fn phase(&self, x: f64, t: f64) -> f64 {
        self.eps * (x - self.speed() * t)
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.eps * self.eps * self.slow_profile(self.phase(x, t))
    }

    /// Exact `d/dt` of [`Self::value`].
    pub fn time_derivative(&self, x: f64, t: f64) -> f64 {
        let k = self.width_factor();
        let s = k * self.phase(x, t);
        let d_xi = -2.0 * self.amplitude() * k * sech(s).powi(2) * s.tanh();
        self.eps * self.eps * d_xi * (-self.eps * self.speed())
    }
}

pub fn kdv_soliton(
    eps: f64,
    c: f64,
    alpha: f64,
    a_uu: f64,
    x: f64,
    t: f64,
) -> Result<f64, ClosedFormError> {
    Ok(KdvSoliton::new(eps, c, alpha, a_uu)?.value(x, t))
}

/// `2 alpha^2 A_T + A_XXX + a_uu (A^2)_X` for `A(X - c T)`, i.e. with
/// `A_T = -c A_X`.
pub fn kdv_residual(
    a: &RealField,
    alpha: f64,
    a_uu: f64,
    c: f64,
) -> Result<RealField, ClosedFormError> {
    let sp = Spectral::new(*a.grid());
    let a1 = sp.derivative(a, 1)?;
    let a3 = sp.derivative(a, 3)?;
    let sq = sp.derivative(&a.map(|x| x * x), 1)?;
    let n = a.grid().len();
    let vals = (0..n)
        .map(|j| -2.0 * alpha * alpha * c * a1.values()[j] + a3.values()[j] + a_uu * sq.values()[j])
        .collect();
    Ok(RealField::new(*a.grid(), vals)?)
}

/// `B1 = b_uu A^2`, `B2 = (1 - alpha^2) B1_XX + 2 b_uv A B1`.
pub fn kdv_corrections(
    a: &RealField,
    c: &ModelCoefficients,
) -> Result<(RealField, RealField), ClosedFormError> {
    let b1 = a.map(|x| c.b_uu * x * x);
    let b1xx = Spectral::new(*a.grid()).derivative(&b1, 2)?;
    let n = a.grid().len();
    let vals = (0..n)
        .map(|j| {
            (1.0 - c.alpha * c.alpha) * b1xx.values()[j]
                + 2.0 * c.b_uv * a.values()[j] * b1.values()[j]
        })
        .collect();
    Ok((b1, RealField::new(*a.grid(), vals)?))
}

/// Solitary wave `Q_c(r)` of `u_tt = u_xx + u_ttxx + (u^p)_xx`.
pub fn imbq_soliton(p: u32, c_s: f64, r: f64) -> Result<f64, ClosedFormError> {
    if p < 2 {
        return Err(ClosedFormError::BadExponent(p));
    }
    let c2 = c_s * c_s;
    if !(c2 > 1.0) {
        return Err(ClosedFormError::SubSonic(c2));
    }
    let e = 1.0 / (p as f64 - 1.0);
    let q = |r: f64| ((p as f64 + 1.0) / 2.0 * sech((p as f64 - 1.0) * r / 2.0).powi(2)).powf(e);
    Ok((c2 - 1.0).powf(e) * q(((c2 - 1.0) / c2).sqrt() * r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pair {
    UU,
    UV,
    VV,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::UU, Pair::UV, Pair::VV];

    /// Multiplicity in the quadratic form (`2` for the cross term).
    pub fn weight(self) -> f64 {
        match self {
            Pair::UV => 2.0,
            _ => 1.0,
        }
    }

    fn product(self, u: f64, v: f64) -> f64 {
        match self {
            Pair::UU => u * u,
            Pair::UV => u * v,
            Pair::VV => v * v,
        }
    }
}

/// Exponential kernels `k_gb = a_gb e^{-s|x|}/(2 s c_s^2)` and
/// `m_gb = b_gb e^{-r|x|}/(2 r (1 - c_s^2))`, the exact inverses of
/// `p1(k) = c_s^2 - alpha^2 + c_s^2 k^2` and `p2(k) = 1 + (1 - c_s^2) k^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPair {
    pub s: f64,
    pub r: f64,
    pub c_s: f64,
    pub coeffs: ModelCoefficients,
}

impl KernelPair {
    pub fn base_u(&self, x: f64) -> f64 {
        (-self.s * x.abs()).exp() / (2.0 * self.s * self.c_s * self.c_s)
    }

    pub fn base_v(&self, x: f64) -> f64 {
        (-self.r * x.abs()).exp() / (2.0 * self.r * (1.0 - self.c_s * self.c_s))
    }

    pub fn a(&self, p: Pair) -> f64 {
        match p {
            Pair::UU => self.coeffs.a_uu,
            Pair::UV => self.coeffs.a_uv,
            Pair::VV => self.coeffs.a_vv,
        }
    }

    pub fn b(&self, p: Pair) -> f64 {
        match p {
            Pair::UU => self.coeffs.b_uu,
            Pair::UV => self.coeffs.b_uv,
            Pair::VV => self.coeffs.b_vv,
        }
    }

    pub fn k(&self, p: Pair, x: f64) -> f64 {
        self.a(p) * self.base_u(x)
    }

    pub fn m(&self, p: Pair, x: f64) -> f64 {
        self.b(p) * self.base_v(x)
    }

    pub fn p1(&self, k: f64) -> f64 {
        let c2 = self.c_s * self.c_s;
        c2 - self.coeffs.alpha * self.coeffs.alpha + c2 * k * k
    }

    pub fn p2(&self, k: f64) -> f64 {
        1.0 + (1.0 - self.c_s * self.c_s) * k * k
    }
}

pub fn green_kernels(c: &ModelCoefficients, c_s: f64) -> Result<KernelPair, ClosedFormError> {
    let alpha2 = c.alpha * c.alpha;
    let cs2 = c_s * c_s;
    if !(alpha2 < cs2 && cs2 < 1.0) {
        return Err(ClosedFormError::OutOfRegime { alpha2, cs2 });
    }
    Ok(KernelPair {
        s: (1.0 - alpha2 / cs2).sqrt(),
        r: 1.0 / (1.0 - cs2).sqrt(),
        c_s,
        coeffs: *c,
    })
}

/// 8-point Gauss-Legendre nodes and weights on `[0, 1]`.
#[allow(clippy::excessive_precision)]
pub fn gauss_legendre_8() -> ([f64; 8], [f64; 8]) {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329_0,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362_0,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let mut nodes = [0.0; 8];
    let mut weights = [0.0; 8];
    for i in 0..4 {
        nodes[3 - i] = 0.5 * (1.0 - X[i]);
        nodes[4 + i] = 0.5 * (1.0 + X[i]);
        weights[3 - i] = 0.5 * W[i];
        weights[4 + i] = 0.5 * W[i];
    }
    (nodes, weights)
}

/// `2 int_0^inf f(x) cos(k x) dx` for an even kernel decaying like
/// `exp(-rate |x|)`, by panel Gauss-Legendre quadrature.
pub fn even_kernel_symbol(f: impl Fn(f64) -> f64, rate: f64, k: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_8();
    let end = 40.0 / rate;
    let panel = (0.05f64 / rate).min(if k != 0.0 {
        0.5 / k.abs()
    } else {
        f64::INFINITY
    });
    let panels = (end / panel).ceil() as usize;
    let h = end / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (t, w) in nodes.iter().zip(&weights) {
            let x = a + t * h;
            acc += w * f(x) * (k * x).cos();
        }
    }
    2.0 * h * acc
}

/// Real-line convolution `(e^{-rate|.|} * g)(x_j)` at every node, with `g`
/// supported in `[-L, L)` and given at the Gauss-Legendre points of each cell
/// `[x_j, x_j + h]`. Uses the two one-sided exponential recursions.
fn exp_convolution(
    rate: f64,
    h: f64,
    nodes: &[f64; 8],
    weights: &[f64; 8],
    g: &[[f64; 8]],
) -> Vec<f64> {
    let n = g.len();
    let decay = (-rate * h).exp();
    let right_w: Vec<f64> = nodes
        .iter()
        .zip(weights)
        .map(|(t, w)| h * w * (-rate * h * (1.0 - t)).exp())
        .collect();
    let left_w: Vec<f64> = nodes
        .iter()
        .zip(weights)
        .map(|(t, w)| h * w * (-rate * h * t).exp())
        .collect();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for j in 0..n {
        out[j] += acc;
        acc = decay * acc + (0..8).map(|q| right_w[q] * g[j][q]).sum::<f64>();
    }
    acc = 0.0;
    for j in (0..n).rev() {
        acc = decay * acc + (0..8).map(|q| left_w[q] * g[j][q]).sum::<f64>();
        out[j] += acc;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointCheck {
    /// Right-hand sides `sum k_gb * (u v)_gb` and `sum m_gb * (u v)_gb`.
    pub image_u: RealField,
    pub image_v: RealField,
    pub sup_error_u: f64,
    pub sup_error_v: f64,
}

/// Evaluate the convolution fixed-point form
/// `u = k_uu * u^2 + 2 k_uv * u v + k_vv * v^2`,
/// `v = m_uu * u^2 + 2 m_uv * u v + m_vv * v^2`
/// on the real line by quadrature. The profiles are interpolated
/// trigonometrically onto Gauss-Legendre points of every grid cell.
pub fn convolution_fixed_point(
    kernels: &KernelPair,
    u: &RealField,
    v: &RealField,
) -> Result<FixedPointCheck, ClosedFormError> {
    u.check_same_grid(v)?;
    let grid = *u.grid();
    let sp = Spectral::new(grid);
    let h = grid.spacing();
    let n = grid.len();
    let (nodes, weights) = gauss_legendre_8();
    let mut gu = vec![[0.0; 8]; n];
    let mut gv = vec![[0.0; 8]; n];
    for q in 0..8 {
        let d = nodes[q] * h;
        let shift = |k: f64| Complex64::new((k * d).cos(), (k * d).sin());
        let us = sp.apply_symbol(u, shift)?;
        let vs = sp.apply_symbol(v, shift)?;
        for j in 0..n {
            gu[j][q] = us.values()[j];
            gv[j][q] = vs.values()[j];
        }
    }
    let mut image_u = vec![0.0; n];
    let mut image_v = vec![0.0; n];
    let scale_u = 1.0 / (2.0 * kernels.s * kernels.c_s * kernels.c_s);
    let scale_v = 1.0 / (2.0 * kernels.r * (1.0 - kernels.c_s * kernels.c_s));
    for pair in Pair::ALL {
        let g: Vec<[f64; 8]> = (0..n)
            .map(|j| {
                let mut row = [0.0; 8];
                for q in 0..8 {
                    row[q] = pair.product(gu[j][q], gv[j][q]);
                }
                row
            })
            .collect();
        let a = kernels.a(pair);
        if a != 0.0 {
            let conv = exp_convolution(kernels.s, h, &nodes, &weights, &g);
            for j in 0..n {
                image_u[j] += pair.weight() * a * scale_u * conv[j];
            }
        }
        let b = kernels.b(pair);
        if b != 0.0 {
            let conv = exp_convolution(kernels.r, h, &nodes, &weights, &g);
            for j in 0..n {
                image_v[j] += pair.weight() * b * scale_v * conv[j];
            }
        }
    }
    let image_u = RealField::new(grid, image_u)?;
    let image_v = RealField::new(grid, image_v)?;
    let sup_error_u = image_u.zip_with(u, |a, b| a - b)?.sup();
    let sup_error_v = image_v.zip_with(v, |a, b| a - b)?.sup();
    Ok(FixedPointCheck {
        image_u,
        image_v,
        sup_error_u,
        sup_error_v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantFixedPoint {
    pub x: f64,
    pub y: f64,
    /// `(c_s^2 - alpha^2) X - f1(X, Y)` and `Y - f2(X, Y)`.
    pub residual: [f64; 2],
    /// The same system with the halved linear terms
    /// `f1 - (c_s^2 - alpha^2) X / 2` and `f2 - Y / 2`.
    pub residual_halved: [f64; 2],
}

const DEDUP_TOLERANCE: f64 = 1e-9;

fn cfp_residual(c: &ModelCoefficients, d: f64, p: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(d * p.x - c.f1(p.x, p.y), p.y - c.f2(p.x, p.y))
}

fn cfp_jacobian(c: &ModelCoefficients, d: f64, p: Vector2<f64>) -> Matrix2<f64> {
    let (x, y) = (p.x, p.y);
    Matrix2::new(
        d - 2.0 * c.a_uu * x - 2.0 * c.a_uv * y,
        -2.0 * c.a_uv * x - 2.0 * c.a_vv * y,
        -2.0 * c.b_uu * x - 2.0 * c.b_uv * y,
        1.0 - 2.0 * c.b_uv * x - 2.0 * c.b_vv * y,
    )
}

fn newton(c: &ModelCoefficients, d: f64, start: Vector2<f64>) -> Option<Vector2<f64>> {
    let mut p = start;
    let mut r = cfp_residual(c, d, p);
    for _ in 0..100 {
        let scale = 1.0 + p.amax().powi(2);
        if r.amax() < 1e-14 * scale {
            return Some(p);
        }
        let step = cfp_jacobian(c, d, p).lu().solve(&(-r))?;
        let mut lambda = 1.0;
        loop {
            let q = p + lambda * step;
            let rq = cfp_residual(c, d, q);
            if rq.norm() < r.norm() || lambda < 1e-6 {
                p = q;
                r = rq;
                break;
            }
            lambda *= 0.5;
        }
        if !p.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    let scale = 1.0 + p.amax().powi(2);
    (r.amax() < 1e-10 * scale).then_some(p)
}

/// Real roots of `sum coeffs[i] t^i` (degree at most 3) via companion
/// eigenvalues.
fn real_poly_roots(coeffs: [f64; 4]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = 3;
    while deg > 0 && coeffs[deg].abs() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut m = nalgebra::DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -coeffs[i] / lead;
    }
    m.complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect()
}

/// Constant solutions of `(c_s^2 - alpha^2) X = f1(X, Y)`, `Y = f2(X, Y)`.
///
/// Candidates come from eliminating `t = Y/X` (a cubic in `t`) and from the
/// `X = 0` branch, plus damped Newton from a coarse grid of starts. All are
/// polished by Newton and deduplicated.
pub fn constant_fixed_points(c: &ModelCoefficients, c_s: f64) -> Vec<ConstantFixedPoint> {
    let d = c_s * c_s - c.alpha * c.alpha;
    let mut starts = vec![Vector2::new(0.0, 0.0)];
    let cubic = [
        -d * c.b_uu,
        c.a_uu - 2.0 * d * c.b_uv,
        2.0 * c.a_uv - d * c.b_vv,
        c.a_vv,
    ];
    for t in real_poly_roots(cubic) {
        let p = c.a_uu + 2.0 * c.a_uv * t + c.a_vv * t * t;
        if p.abs() > 1e-14 {
            let x = d / p;
            starts.push(Vector2::new(x, t * x));
        }
    }
    if c.b_vv != 0.0 {
        starts.push(Vector2::new(0.0, 1.0 / c.b_vv));
    }
    let grid = [-4.0, -1.5, -0.5, 0.5, 1.5, 4.0];
    let mag = 1.0 + d.abs();
    for &x in &grid {
        for &y in &grid {
            starts.push(Vector2::new(x * mag, y * mag));
        }
    }

    let mut found: Vec<Vector2<f64>> = Vec::new();
    for s in starts {
        if let Some(p) = newton(c, d, s) {
            if !found
                .iter()
                .any(|q| (q - p).amax() <= DEDUP_TOLERANCE * (1.0 + p.amax()))
            {
                found.push(p);
            }
        }
    }
    found.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    found
        .into_iter()
        .map(|p| {
            let r = cfp_residual(c, d, p);
            ConstantFixedPoint {
                x: p.x,
                y: p.y,
                residual: [r.x, r.y],
                residual_halved: [c.f1(p.x, p.y) - 0.5 * d * p.x, c.f2(p.x, p.y) - 0.5 * p.y],
            }
        })
        .collect()
}
