//! Klein-Gordon-Boussinesq coefficients, the quadratic nonlinearities, the
//! Hamiltonian structure and the conserved functionals, plus the sufficient
//! conditions for global existence and for finite-time blow-up.
//!
//! The system is
//!
//! ```text
//! u_tt = alpha^2 u_xx + u_ttxx + (f1(u, v))_xx
//! v_tt = v_xx - v + f2(u, v)
//! f1 = a_uu u^2 + 2 a_uv u v + a_vv v^2
//! f2 = b_uu u^2 + 2 b_uv u v + b_vv v^2
//! ```
//!
//! Conserved functionals are evaluated in the first-order variables
//! `(u, w, v, z)` with `u_t = w_x`, `z = v_t`, see [`crate::evolution`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{self, ConfigError};
use crate::evolution::{to_first_order, EvolutionState};
use crate::spectral::{RealField, Spectral, SpectralError, MEAN_TOLERANCE};

/// Tolerance used when checking the Hamiltonian coefficient relations.
pub const HAMILTONIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("alpha must be nonzero and finite, got {0}")]
    ZeroAlpha(f64),
    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(&'static str),
    #[error("coefficients are not Hamiltonian: b_uu + a_uv = {buu_plus_auv:e}, b_uv + a_vv = {buv_plus_avv:e}")]
    NotHamiltonian {
        buu_plus_auv: f64,
        buv_plus_avv: f64,
    },
    #[error("K0 has a closed form only for B = 0, got B = {0}")]
    BNonZero(f64),
    #[error("global existence criterion requires a_uu = 0, got {0}")]
    AuuNonZero(f64),
    #[error("{field} has mean {mean:e}; the periodic inverse derivative needs zero mean")]
    NonZeroMean { field: &'static str, mean: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `alpha` and the six quadratic coefficients.
///
/// All six quadratic coefficients may vanish; that linear system is kept
/// constructible because it is the reference case for the evolution code.
/// The traveling-wave solver rejects it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCoefficients {
    pub alpha: f64,
    #[serde(default)]
    pub a_uu: f64,
    #[serde(default)]
    pub a_uv: f64,
    #[serde(default)]
    pub a_vv: f64,
    #[serde(default)]
    pub b_uu: f64,
    #[serde(default)]
    pub b_uv: f64,
    #[serde(default)]
    pub b_vv: f64,
}

impl ModelCoefficients {
    pub fn new(
        alpha: f64,
        [a_uu, a_uv, a_vv]: [f64; 3],
        [b_uu, b_uv, b_vv]: [f64; 3],
    ) -> Result<Self, ModelError> {
        let c = Self {
            alpha,
            a_uu,
            a_uv,
            a_vv,
            b_uu,
            b_uv,
            b_vv,
        };
        c.validate()?;
        Ok(c)
    }

    /// All quadratic coefficients zero.
    pub fn linear(alpha: f64) -> Result<Self, ModelError> {
        Self::new(alpha, [0.0; 3], [0.0; 3])
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in self.named() {
            if !v.is_finite() {
                return Err(ModelError::NonFiniteCoefficient(name));
            }
        }
        if self.alpha == 0.0 {
            return Err(ModelError::ZeroAlpha(self.alpha));
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("alpha", self.alpha),
            ("a_uu", self.a_uu),
            ("a_uv", self.a_uv),
            ("a_vv", self.a_vv),
            ("b_uu", self.b_uu),
            ("b_uv", self.b_uv),
            ("b_vv", self.b_vv),
        ]
    }

    pub fn is_linear(&self) -> bool {
        self.named()[1..].iter().all(|(_, v)| *v == 0.0)
    }

    /// Read from a flat `key = value` file or a JSON object.
    pub fn from_config_str(text: &str) -> Result<Self, ConfigError> {
        let c: Self = config::from_config_str(text)?;
        c.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(c)
    }

    #[inline]
    pub fn f1(&self, u: f64, v: f64) -> f64 {
        self.a_uu * u * u + 2.0 * self.a_uv * u * v + self.a_vv * v * v
    }

    #[inline]
    pub fn f2(&self, u: f64, v: f64) -> f64 {
        self.b_uu * u * u + 2.0 * self.b_uv * u * v + self.b_vv * v * v
    }
}

/// `B = b_uu = -a_uv`, `C = b_uv = -a_vv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HamiltonianStructure {
    pub b_ham: f64,
    pub c_ham: f64,
}

impl HamiltonianStructure {
    /// Cubic potential density whose partial derivatives are `(-f1, f2)`.
    #[inline]
    pub fn potential(&self, c: &ModelCoefficients, u: f64, v: f64) -> f64 {
        -c.a_uu / 3.0 * u * u * u
            + c.b_vv / 3.0 * v * v * v
            + self.b_ham * u * u * v
            + self.c_ham * u * v * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantSnapshot {
    pub t: f64,
    pub energy: f64,
    pub momentum: f64,
}

pub fn eval_nonlinearities(
    c: &ModelCoefficients,
    u: &RealField,
    v: &RealField,
) -> Result<(RealField, RealField), ModelError> {
    let f1 = u.zip_with(v, |a, b| c.f1(a, b))?;
    let f2 = u.zip_with(v, |a, b| c.f2(a, b))?;
    Ok((f1, f2))
}

pub fn hamiltonian_structure(c: &ModelCoefficients) -> Result<HamiltonianStructure, ModelError> {
    let buu_plus_auv = c.b_uu + c.a_uv;
    let buv_plus_avv = c.b_uv + c.a_vv;
    if buu_plus_auv.abs() > HAMILTONIAN_TOLERANCE || buv_plus_avv.abs() > HAMILTONIAN_TOLERANCE {
        return Err(ModelError::NotHamiltonian {
            buu_plus_auv,
            buv_plus_avv,
        });
    }
    Ok(HamiltonianStructure {
        b_ham: c.b_uu,
        c_ham: c.b_uv,
    })
}

/// Structure used to evaluate `E` for a coefficient set that may not be
/// Hamiltonian: `B = b_uu`, `C = b_uv`. For Hamiltonian sets this is exactly
/// [`hamiltonian_structure`].
pub fn candidate_structure(c: &ModelCoefficients) -> HamiltonianStructure {
    HamiltonianStructure {
        b_ham: c.b_uu,
        c_ham: c.b_uv,
    }
}

pub(crate) fn energy_with(
    spectral: &Spectral,
    c: &ModelCoefficients,
    h: &HamiltonianStructure,
    state: &EvolutionState,
) -> f64 {
    let dx = spectral.grid().spacing();
    let wx = spectral.derivative(&state.w, 1).expect("state grid");
    let vx = spectral.derivative(&state.v, 1).expect("state grid");
    let a2 = c.alpha * c.alpha;
    let mut quad = 0.0;
    let mut cubic = 0.0;
    for j in 0..spectral.grid().len() {
        let u = state.u.values()[j];
        let w = state.w.values()[j];
        let v = state.v.values()[j];
        let z = state.z.values()[j];
        let wxj = wx.values()[j];
        let vxj = vx.values()[j];
        quad += a2 * u * u + w * w + wxj * wxj + v * v + vxj * vxj + z * z;
        cubic += h.potential(c, u, v);
    }
    0.5 * dx * quad - dx * cubic
}

pub(crate) fn momentum_with(spectral: &Spectral, state: &EvolutionState) -> f64 {
    let dx = spectral.grid().spacing();
    let ux = spectral.derivative(&state.u, 1).expect("state grid");
    let wx = spectral.derivative(&state.w, 1).expect("state grid");
    let vx = spectral.derivative(&state.v, 1).expect("state grid");
    let mut acc = 0.0;
    for j in 0..spectral.grid().len() {
        acc += state.u.values()[j] * state.w.values()[j]
            + ux.values()[j] * wx.values()[j]
            + vx.values()[j] * state.z.values()[j];
    }
    dx * acc
}

/// `E = 1/2 int(alpha^2 u^2 + w^2 + w_x^2 + v^2 + v_x^2 + z^2) - int P(u, v)`.
pub fn energy(c: &ModelCoefficients, h: &HamiltonianStructure, state: &EvolutionState) -> f64 {
    energy_with(&Spectral::new(*state.grid()), c, h, state)
}

/// `F = int(u w + u_x w_x + v_x z)`.
pub fn momentum(state: &EvolutionState) -> f64 {
    momentum_with(&Spectral::new(*state.grid()), state)
}

/// Embedding constant `K0` in the case `B = 0`.
pub fn k0_constant(c: &ModelCoefficients, h: &HamiltonianStructure) -> Result<f64, ModelError> {
    if h.b_ham != 0.0 {
        return Err(ModelError::BNonZero(h.b_ham));
    }
    Ok(5f64.powf(-0.75) * 6f64.sqrt() * c.b_vv.abs() + 2f64.powf(-0.25) * h.c_ham.abs().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbThreshold {
    /// `A = (s C2)^(1/(1-s))`.
    pub threshold: f64,
    /// `C1 < (s-1)/s * A`.
    pub admissible: bool,
}

/// Threshold of the bootstrap inequality `0 <= y <= C1 + C2 y^s`.
pub fn lemma_gb_threshold(c1: f64, c2: f64, s: f64) -> Result<GbThreshold, ModelError> {
    if !(c1 >= 0.0 && c1.is_finite()) {
        return Err(ModelError::InvalidArgument(format!(
            "C1 must be >= 0, got {c1}"
        )));
    }
    if !(c2 > 0.0 && c2.is_finite()) {
        return Err(ModelError::InvalidArgument(format!(
            "C2 must be > 0, got {c2}"
        )));
    }
    if !(s > 1.0 && s.is_finite()) {
        return Err(ModelError::InvalidArgument(format!(
            "s must be > 1, got {s}"
        )));
    }
    let threshold = (s * c2).powf(1.0 / (1.0 - s));
    Ok(GbThreshold {
        threshold,
        admissible: c1 < (s - 1.0) / s * threshold,
    })
}

/// Both sides of the two global-existence inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalExistenceReport {
    pub k0: f64,
    pub energy: f64,
    /// `K0^-6 / 6`, as the criterion is stated.
    pub energy_bound: f64,
    /// `K0^-2 / 6`, the bound obtained by composing the bootstrap lemma with
    /// `y <= 2 E(0) + (2/3) K0 y^(3/2)`. Reported, not used.
    pub energy_bound_from_lemma: f64,
    pub norm_sum: f64,
    /// `K0^-3`.
    pub norm_bound: f64,
    pub energy_ok: bool,
    pub norms_ok: bool,
}

impl GlobalExistenceReport {
    pub fn holds(&self) -> bool {
        self.energy_ok && self.norms_ok
    }
}

fn require_zero_mean(field: &'static str, f: &RealField) -> Result<(), ModelError> {
    let mean = f.mean();
    if mean.abs() > MEAN_TOLERANCE {
        return Err(ModelError::NonZeroMean { field, mean });
    }
    Ok(())
}

fn sq_norm(f: &RealField) -> f64 {
    f.inner(f).expect("same field")
}

pub fn global_existence_predicate(
    c: &ModelCoefficients,
    h: &HamiltonianStructure,
    u0: &RealField,
    u1: &RealField,
    v0: &RealField,
    v1: &RealField,
) -> Result<GlobalExistenceReport, ModelError> {
    if c.a_uu != 0.0 {
        return Err(ModelError::AuuNonZero(c.a_uu));
    }
    hamiltonian_structure(c)?;
    let k0 = k0_constant(c, h)?;
    require_zero_mean("u1", u1)?;
    let state = to_first_order(u0, u1, v0, v1)?;
    let spectral = Spectral::new(*u0.grid());
    let energy = energy_with(&spectral, c, h, &state);
    let v0x = spectral.derivative(v0, 1)?;
    let norm_sum =
        sq_norm(u1) + c.alpha * c.alpha * sq_norm(u0) + sq_norm(v0) + sq_norm(v1) + sq_norm(&v0x);
    // K0 = 0 (no cubic terms at all) leaves both bounds infinite.
    let energy_bound = k0.powi(-6) / 6.0;
    let energy_bound_from_lemma = k0.powi(-2) / 6.0;
    let norm_bound = k0.powi(-3);
    Ok(GlobalExistenceReport {
        k0,
        energy,
        energy_bound,
        energy_bound_from_lemma,
        norm_sum,
        norm_bound,
        energy_ok: energy < energy_bound,
        norms_ok: norm_sum < norm_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlowupCase {
    NegativeEnergy,
    PositiveEnergyCondition,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupReport {
    pub case: BlowupCase,
    pub energy: f64,
    /// `sqrt(2 E(0))`, `NaN` when `E(0) < 0`.
    pub st1_lhs: f64,
    /// Right-hand side of the positive-energy condition; `NaN` when
    /// `u0 = v0 = 0` makes it undefined.
    pub st1_rhs: f64,
}

pub fn blowup_predicate(
    c: &ModelCoefficients,
    h: &HamiltonianStructure,
    u0: &RealField,
    u1: &RealField,
    v0: &RealField,
    v1: &RealField,
) -> Result<BlowupReport, ModelError> {
    hamiltonian_structure(c)?;
    require_zero_mean("u0", u0)?;
    require_zero_mean("u1", u1)?;
    let spectral = Spectral::new(*u0.grid());
    let state = to_first_order(u0, u1, v0, v1)?;
    let energy = energy_with(&spectral, c, h, &state);
    let iu0 = spectral.antiderivative_zero_mean(u0)?;
    let iu1 = &state.w;
    let num = iu0.inner(iu1)? + u0.inner(u1)? + v0.inner(v1)?;
    let den = (sq_norm(&iu0) + sq_norm(u0) + sq_norm(v0)).sqrt();
    let st1_rhs = if den > 0.0 { num / den } else { f64::NAN };
    let st1_lhs = if energy >= 0.0 {
        (2.0 * energy).sqrt()
    } else {
        f64::NAN
    };
    let case = if energy < 0.0 {
        BlowupCase::NegativeEnergy
    } else if st1_lhs < st1_rhs {
        BlowupCase::PositiveEnergyCondition
    } else {
        BlowupCase::None
    };
    Ok(BlowupReport {
        case,
        energy,
        st1_lhs,
        st1_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_grid;
    use proptest::prelude::*;

    fn coeffs(a: [f64; 3], b: [f64; 3]) -> ModelCoefficients {
        ModelCoefficients::new(1.0, a, b).unwrap()
    }

    #[test]
    fn nonlinearity_examples() {
        let g = build_grid(1.0, 8).unwrap();
        let c = coeffs([1.0; 3], [1.0; 3]);
        let (f1, f2) = eval_nonlinearities(&c, &g.sample(|_| 1.0), &g.sample(|_| 2.0)).unwrap();
        assert!(f1.values().iter().all(|&x| x == 9.0));
        assert!(f2.values().iter().all(|&x| x == 9.0));

        let (f1, f2) = eval_nonlinearities(&c, &g.zeros(), &g.zeros()).unwrap();
        assert_eq!((f1.sup(), f2.sup()), (0.0, 0.0));

        let c = coeffs([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let (f1, f2) = eval_nonlinearities(&c, &g.sample(|_| 3.0), &g.sample(|_| 5.0)).unwrap();
        assert_eq!((f1.values()[0], f2.values()[0]), (9.0, 9.0));
    }

    #[test]
    fn nonlinearity_grid_mismatch() {
        let c = coeffs([1.0; 3], [1.0; 3]);
        let a = build_grid(1.0, 8).unwrap().zeros();
        let b = build_grid(1.0, 16).unwrap().zeros();
        assert!(matches!(
            eval_nonlinearities(&c, &a, &b),
            Err(ModelError::Spectral(SpectralError::GridMismatch))
        ));
    }

    proptest! {
        #[test]
        fn nonlinearities_are_quadratic(
            a in proptest::array::uniform3(-4.0f64..4.0),
            b in proptest::array::uniform3(-4.0f64..4.0),
            u in -3.0f64..3.0, v in -3.0f64..3.0, lam in -8.0f64..8.0,
        ) {
            let c = coeffs(a, b);
            let lam = (lam * 4.0).round() / 4.0;
            let scale = 1.0 + lam * lam * 200.0;
            prop_assert!((c.f1(lam * u, lam * v) - lam * lam * c.f1(u, v)).abs() < 1e-13 * scale);
            prop_assert!((c.f2(lam * u, lam * v) - lam * lam * c.f2(u, v)).abs() < 1e-13 * scale);
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let c = coeffs([0.0, -1.0, -1.0], [1.0, 1.0, 0.0]);
        assert_eq!(
            hamiltonian_structure(&c).unwrap(),
            HamiltonianStructure {
                b_ham: 1.0,
                c_ham: 1.0
            }
        );
        let c = coeffs([0.0, 0.0, -1.0], [0.0, 1.0, 0.0]);
        assert_eq!(
            hamiltonian_structure(&c).unwrap(),
            HamiltonianStructure {
                b_ham: 0.0,
                c_ham: 1.0
            }
        );
        let c = coeffs([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]);
        assert!(matches!(
            hamiltonian_structure(&c),
            Err(ModelError::NotHamiltonian { .. })
        ));
    }

    #[test]
    fn potential_gradient_matches_nonlinearities() {
        let c = coeffs([0.7, -0.3, 1.1], [0.3, -1.1, 0.4]);
        let h = hamiltonian_structure(&c).unwrap();
        let (u, v, d) = (0.37, -0.81, 1e-6);
        let pu = (h.potential(&c, u + d, v) - h.potential(&c, u - d, v)) / (2.0 * d);
        let pv = (h.potential(&c, u, v + d) - h.potential(&c, u, v - d)) / (2.0 * d);
        assert!((pu + c.f1(u, v)).abs() < 1e-9);
        assert!((pv - c.f2(u, v)).abs() < 1e-9);
    }

    #[test]
    fn energy_and_momentum_of_zero_state() {
        let g = build_grid(10.0, 64).unwrap();
        let s = EvolutionState::zero(g);
        let c = coeffs([0.0, 0.0, -1.0], [0.0, 1.0, 0.0]);
        let h = hamiltonian_structure(&c).unwrap();
        assert_eq!(energy(&c, &h, &s), 0.0);
        assert_eq!(momentum(&s), 0.0);
    }

    #[test]
    fn linear_energy_is_quadratic_part() {
        let g = build_grid(20.0, 256).unwrap();
        let c = ModelCoefficients::linear(0.8).unwrap();
        let h = hamiltonian_structure(&c).unwrap();
        let bump = |x: f64| (-x * x / 4.0).exp();
        let s = EvolutionState::new(
            g.sample(bump),
            g.sample(|x| x * bump(x)),
            g.sample(|x| 0.5 * bump(x - 1.0)),
            g.sample(|x| -0.2 * bump(x + 1.0)),
            0.0,
        )
        .unwrap();
        // analytic: with b(x) = exp(-x^2/4), int b^2 = sqrt(2 pi)
        let i0 = (2.0 * std::f64::consts::PI).sqrt();
        let i_b2 = i0; // int b^2
        let i_xb_sq = 2.0 * i0 / 2.0 * 1.0; // int x^2 b^2 = sqrt(2pi) * 1
        let i_db_sq = i0 / 4.0; // int (b')^2 = int x^2/4 b^2
        let i_dxb_sq = {
            // (x b)' = b - x^2/2 b ; square = b^2 - x^2 b^2 + x^4/4 b^2
            // int x^4 b^2 = 3 sqrt(2pi)
            i0 - i_xb_sq + 3.0 * i0 / 4.0
        };
        let want = 0.5 * (0.64 * i_b2 + i_xb_sq + i_dxb_sq + 0.25 * (i_b2 + i_db_sq) + 0.04 * i_b2);
        assert!(
            (energy(&c, &h, &s) - want).abs() < 1e-10,
            "{} vs {want}",
            energy(&c, &h, &s)
        );
    }

    #[test]
    fn momentum_symmetric_case_is_nonnegative() {
        let g = build_grid(20.0, 256).unwrap();
        let u = g.sample(|x| x * (-x * x).exp());
        let s = EvolutionState::new(u.clone(), u.clone(), g.zeros(), g.zeros(), 0.0).unwrap();
        let n = crate::spectral::norms(&u);
        assert!((momentum(&s) - n.h1 * n.h1).abs() < 1e-12);
        assert!(momentum(&s) > 0.0);
    }

    #[test]
    fn k0_examples() {
        let c = coeffs([0.0, 0.0, -1.0], [0.0, 1.0, 1.0]);
        let h = hamiltonian_structure(&c).unwrap();
        let k0 = k0_constant(&c, &h).unwrap();
        let want = 5f64.powf(-0.75) * 6f64.sqrt() + 2f64.powf(-0.25);
        assert!((k0 - want).abs() < 1e-15);
        assert!((k0 - 1.573465).abs() < 1e-6, "{k0}");

        let c = coeffs([1.0, 0.0, 0.0], [0.0, 0.0, 0.0]);
        let h = hamiltonian_structure(&c).unwrap();
        assert_eq!(k0_constant(&c, &h).unwrap(), 0.0);

        let c = coeffs([0.0, -1.0, 0.0], [1.0, 0.0, 0.0]);
        let h = hamiltonian_structure(&c).unwrap();
        assert_eq!(k0_constant(&c, &h), Err(ModelError::BNonZero(1.0)));
    }

    #[test]
    fn gb_threshold_examples() {
        let r = lemma_gb_threshold(0.3, 2.0 / 3.0, 1.5).unwrap();
        assert!((r.threshold - 1.0).abs() < 1e-15);
        assert!(r.admissible);
        assert!(!lemma_gb_threshold(0.34, 2.0 / 3.0, 1.5).unwrap().admissible);

        let r = lemma_gb_threshold(0.49, 0.5, 2.0).unwrap();
        assert_eq!(r.threshold, 1.0);
        assert!(r.admissible);
        assert!(!lemma_gb_threshold(0.5, 0.5, 2.0).unwrap().admissible);

        let k0 = 5f64.powf(-0.75) * 6f64.sqrt() + 2f64.powf(-0.25);
        let r = lemma_gb_threshold(0.0, 2.0 / 3.0 * k0, 1.5).unwrap();
        assert!((r.threshold - 1.0 / (k0 * k0)).abs() < 1e-14);
        assert!((r.threshold - 0.403911).abs() < 1e-6);

        assert!(lemma_gb_threshold(-1.0, 1.0, 2.0).is_err());
        assert!(lemma_gb_threshold(0.0, 0.0, 2.0).is_err());
        assert!(lemma_gb_threshold(0.0, 1.0, 1.0).is_err());
    }

    fn global_coeffs() -> ModelCoefficients {
        coeffs([0.0, 0.0, -1.0], [0.0, 1.0, 1.0])
    }

    #[test]
    fn global_existence_zero_and_large_data() {
        let c = global_coeffs();
        let h = hamiltonian_structure(&c).unwrap();
        let g = build_grid(20.0, 128).unwrap();
        let z = g.zeros();
        assert!(global_existence_predicate(&c, &h, &z, &z, &z, &z)
            .unwrap()
            .holds());

        let bump = g.sample(|x| 1.0 / x.cosh());
        let big = bump.scaled(10.0);
        let r = global_existence_predicate(&c, &h, &big, &z, &big, &z).unwrap();
        assert!(!r.norms_ok);
        assert!(!r.holds());
    }

    #[test]
    fn global_existence_flip_found_by_bisection() {
        let c = global_coeffs();
        let h = hamiltonian_structure(&c).unwrap();
        let g = build_grid(30.0, 256).unwrap();
        let z = g.zeros();
        let prof = g.sample(|x| 1.0 / x.cosh());
        let holds = |lam: f64| {
            let p = prof.scaled(lam);
            global_existence_predicate(&c, &h, &p, &z, &p, &z)
                .unwrap()
                .holds()
        };
        let (mut lo, mut hi) = (0.0, 10.0);
        assert!(holds(lo) && !holds(hi));
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // The norm inequality alone flips at sqrt(K0^-3 / S(1)); the energy
        // inequality as stated is stricter and flips first.
        let p1 = global_existence_predicate(&c, &h, &prof, &z, &prof, &z).unwrap();
        let norm_flip = (p1.norm_bound / p1.norm_sum).sqrt();
        assert!(lo < norm_flip);
        let at =
            global_existence_predicate(&c, &h, &prof.scaled(hi), &z, &prof.scaled(hi), &z).unwrap();
        assert!(!at.energy_ok && at.norms_ok);
        assert!((at.energy - at.energy_bound).abs() < 1e-9 * at.energy_bound.max(1e-300));
    }

    #[test]
    fn global_existence_preconditions() {
        let g = build_grid(10.0, 64).unwrap();
        let z = g.zeros();
        let c = coeffs([1.0, 0.0, -1.0], [0.0, 1.0, 0.0]);
        let h = candidate_structure(&c);
        assert_eq!(
            global_existence_predicate(&c, &h, &z, &z, &z, &z),
            Err(ModelError::AuuNonZero(1.0))
        );
        let c = coeffs([0.0, -1.0, 0.0], [1.0, 0.0, 0.0]);
        let h = hamiltonian_structure(&c).unwrap();
        assert!(matches!(
            global_existence_predicate(&c, &h, &z, &z, &z, &z),
            Err(ModelError::BNonZero(_))
        ));
        let c = coeffs([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]);
        assert!(matches!(
            global_existence_predicate(&c, &candidate_structure(&c), &z, &z, &z, &z),
            Err(ModelError::NotHamiltonian { .. })
        ));
        let c = global_coeffs();
        let h = hamiltonian_structure(&c).unwrap();
        let one = g.sample(|_| 1.0);
        assert!(matches!(
            global_existence_predicate(&c, &h, &z, &one, &z, &z),
            Err(ModelError::NonZeroMean { field: "u1", .. })
        ));
    }

    // b_vv > 0 and a large positive v bump make the cubic term dominate.
    fn focusing() -> ModelCoefficients {
        coeffs([0.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    }

    #[test]
    fn blowup_negative_energy() {
        let c = focusing();
        let h = hamiltonian_structure(&c).unwrap();
        let g = build_grid(30.0, 256).unwrap();
        let z = g.zeros();
        let v0 = g.sample(|x| 10.0 / x.cosh().powi(2));
        let r = blowup_predicate(&c, &h, &z, &z, &v0, &z).unwrap();
        assert!(r.energy < 0.0);
        assert_eq!(r.case, BlowupCase::NegativeEnergy);
    }

    #[test]
    fn blowup_none_without_velocity() {
        let c = focusing();
        let h = hamiltonian_structure(&c).unwrap();
        let g = build_grid(30.0, 256).unwrap();
        let z = g.zeros();
        let v0 = g.sample(|x| 0.5 / x.cosh().powi(2));
        let r = blowup_predicate(&c, &h, &z, &z, &v0, &z).unwrap();
        assert!(r.energy > 0.0);
        assert_eq!(r.st1_rhs, 0.0);
        assert_eq!(r.case, BlowupCase::None);
    }

    #[test]
    fn blowup_requires_zero_mean_u0() {
        let c = focusing();
        let h = hamiltonian_structure(&c).unwrap();
        let g = build_grid(30.0, 256).unwrap();
        let z = g.zeros();
        let u0 = g.sample(|x| 1.0 / x.cosh());
        assert!(matches!(
            blowup_predicate(&c, &h, &u0, &z, &z, &z),
            Err(ModelError::NonZeroMean { field: "u0", .. })
        ));
    }

    // Direct evaluation of the positive-energy condition through a dense DFT,
    // independent of the FFT-based antiderivative.
    fn st1_brute(u0: &RealField, u1: &RealField, v0: &RealField, v1: &RealField) -> f64 {
        let g = u0.grid();
        let n = g.len();
        let x = g.nodes();
        let h = g.spacing();
        let len = 2.0 * g.half_length();
        let coeff = |f: &RealField, j: usize| {
            let k = g.wavenumber(j);
            let (mut re, mut im) = (0.0, 0.0);
            for (i, xi) in x.iter().enumerate() {
                re += f.values()[i] * (k * xi).cos();
                im -= f.values()[i] * (k * xi).sin();
            }
            (re * h, im * h)
        };
        let mut inv_uu = 0.0;
        let mut inv_u0 = 0.0;
        for j in 1..n {
            if j == n / 2 {
                continue;
            }
            let k = g.wavenumber(j);
            let a = coeff(u0, j);
            let b = coeff(u1, j);
            inv_uu += (a.0 * b.0 + a.1 * b.1) / (k * k) / len;
            inv_u0 += (a.0 * a.0 + a.1 * a.1) / (k * k) / len;
        }
        let num = inv_uu + u0.inner(u1).unwrap() + v0.inner(v1).unwrap();
        let den = (inv_u0 + u0.inner(u0).unwrap() + v0.inner(v0).unwrap()).sqrt();
        num / den
    }

    #[test]
    fn blowup_case_flip_in_velocity_scale() {
        // u-cubic focusing: a_uu > 0 with a negative mean-zero bump.
        let c = coeffs([1.0, 0.0, 0.0], [0.0, 0.0, 0.0]);
        let h = hamiltonian_structure(&c).unwrap();
        let g = build_grid(16.0, 64).unwrap();
        let z = g.zeros();
        let phi = g.sample(|x| -(1.0 - x * x) * (-x * x / 2.0).exp());
        assert!(phi.mean().abs() < 1e-12);
        let u0 = phi.scaled(4.0);
        let case_at = |lam: f64| {
            let u1 = phi.scaled(lam);
            blowup_predicate(&c, &h, &u0, &u1, &z, &z).unwrap()
        };
        let r0 = case_at(0.0);
        assert_eq!(r0.case, BlowupCase::NegativeEnergy);
        // positive lambda: the condition holds once E >= 0 as well
        let rp = case_at(40.0);
        assert!(rp.energy > 0.0);
        assert_eq!(rp.case, BlowupCase::PositiveEnergyCondition);
        assert!(
            (rp.st1_rhs - st1_brute(&u0, &phi.scaled(40.0), &z, &z)).abs()
                < 1e-9 * rp.st1_rhs.abs()
        );
        // negative lambda: the right-hand side turns negative; once the energy
        // turns positive no sufficient condition remains
        let (mut lo, mut hi) = (-40.0, 0.0);
        assert_eq!(case_at(lo).case, BlowupCase::None);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if case_at(mid).case == BlowupCase::None {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // analytic crossing: E(lam) = E(0) + lam^2/2 (|d^-1 phi|^2 + |phi|^2)
        let spectral = Spectral::new(g);
        let iphi = spectral.antiderivative_zero_mean(&phi).unwrap();
        let q = iphi.inner(&iphi).unwrap() + phi.inner(&phi).unwrap();
        let lam_c = -(-2.0 * r0.energy / q).sqrt();
        assert!((lo - lam_c).abs() < 1e-8, "{lo} vs {lam_c}");
    }
}
