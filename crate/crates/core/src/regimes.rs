//! Linearization of the traveling-wave system at the origin.
//!
//! With `mu = 1 - alpha^2/c_s^2` the characteristic equation is
//! `lambda^4 - B lambda^2 + A = 0` where `A = mu/(1-c_s^2)` and
//! `B = mu + 1/(1-c_s^2)`. The `(B, A)` plane is split by the curves
//! `C0 = {A=0, B>0}`, `C1 = {A=0, B<0}` into regions 2, 3 (left/right) and 4;
//! region 1 cannot occur for this system.

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::ModelCoefficients;

/// Points with `|mu|` below this are reported as lying on a curve.
pub const CURVE_TOLERANCE: f64 = 1e-9;
/// `c_s^2` within this of 1 is rejected.
pub const SPEED_TOLERANCE: f64 = 1e-12;
/// Below this `|c20|` the generalized solitary wave prediction is withheld.
pub const C20_TOLERANCE: f64 = 1e-12;
/// Beyond this `|mu|` the normal-form predictions are extrapolations.
pub const ASYMPTOTIC_MU: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegimeError {
    #[error("c_s^2 = {0} is within 1e-12 of 1; A and B are singular")]
    SpeedSingular(f64),
    #[error("c_s must be nonzero and finite, got {0}")]
    Degenerate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegionLabel {
    C0,
    C1,
    Region1,
    Region2,
    Region3L,
    Region3R,
    Region4,
    Singular,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::C0 => "C0",
            Self::C1 => "C1",
            Self::Region1 => "Region1",
            Self::Region2 => "Region2",
            Self::Region3L => "Region3L",
            Self::Region3R => "Region3R",
            Self::Region4 => "Region4",
            Self::Singular => "Singular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Prediction {
    #[serde(rename = "CSW")]
    Csw,
    #[serde(rename = "GSW")]
    Gsw,
    Periodic,
    None,
}

impl Prediction {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Csw => "CSW",
            Self::Gsw => "GSW",
            Self::Periodic => "Periodic",
            Self::None => "None",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizationParams {
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

fn serialize_roots<S: Serializer>(roots: &[Complex64; 4], s: S) -> Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = roots.iter().map(|r| [r.re, r.im]).collect();
    pairs.serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub alpha: f64,
    pub c_s: f64,
    pub mu: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(serialize_with = "serialize_roots")]
    pub roots: [Complex64; 4],
    pub label: RegionLabel,
    pub z_minus: f64,
    pub z_plus: f64,
    pub predicted: Prediction,
    pub c20: f64,
    pub warnings: Vec<String>,
}

pub fn linearization_params(
    c: &ModelCoefficients,
    c_s: f64,
) -> Result<LinearizationParams, RegimeError> {
    if !(c_s.is_finite() && c_s != 0.0) {
        return Err(RegimeError::Degenerate(c_s));
    }
    let c2 = c_s * c_s;
    if (c2 - 1.0).abs() <= SPEED_TOLERANCE {
        return Err(RegimeError::SpeedSingular(c2));
    }
    let mu = 1.0 - c.alpha * c.alpha / c2;
    let inv = 1.0 / (1.0 - c2);
    Ok(LinearizationParams {
        mu,
        a: mu * inv,
        b: mu + inv,
    })
}

/// Roots of `lambda^4 - B lambda^2 + A`, solved as a quadratic in
/// `lambda^2` with the cancellation-free root pairing.
pub fn quartic_roots(a: f64, b: f64) -> [Complex64; 4] {
    let disc = Complex64::new(b * b - 4.0 * a, 0.0).sqrt();
    let sign = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = (Complex64::new(b, 0.0) + sign * disc) * 0.5;
    let (s1, s2) = if q.norm() == 0.0 {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (q, Complex64::new(a, 0.0) / q)
    };
    let r1 = s1.sqrt();
    let r2 = s2.sqrt();
    [r1, -r1, r2, -r2]
}

pub fn z_pm(alpha: f64) -> (f64, f64) {
    let a2 = alpha * alpha;
    let root = (a2 * a2 + 4.0).sqrt();
    // z- via Vieta (z- z+ = alpha^2) to avoid cancellation for small alpha
    let z_plus = 0.5 * ((2.0 + a2) + root);
    (a2 / z_plus, z_plus)
}

pub fn classify(c: &ModelCoefficients, c_s: f64) -> Result<RegionReport, RegimeError> {
    let p = linearization_params(c, c_s)?;
    let a2 = c.alpha * c.alpha;
    let c2 = c_s * c_s;
    let (z_minus, z_plus) = z_pm(c.alpha);
    let roots = quartic_roots(p.a, p.b);
    let c20 = -c.a_uu / c2;
    let mut warnings = Vec::new();

    let label = if p.mu.abs() <= CURVE_TOLERANCE {
        if c2 < 1.0 {
            RegionLabel::C0
        } else {
            RegionLabel::C1
        }
    } else if p.a > 0.0 && p.b.abs() < 2.0 * p.a.sqrt() {
        RegionLabel::Region1
    } else if a2 < c2 && c2 < 1.0 {
        RegionLabel::Region2
    } else if 1.0 < c2 && c2 < a2 {
        RegionLabel::Region4
    } else {
        let lo = a2.min(1.0);
        let right = if p.mu > 0.0 {
            if c2 > z_plus {
                Some(true)
            } else if lo < c2 && c2 < z_plus {
                Some(false)
            } else {
                None
            }
        } else if z_minus < c2 && c2 < lo {
            Some(true)
        } else if c2 < z_minus {
            Some(false)
        } else {
            None
        };
        // Exactly on c_s^2 = z+ or z- (B = 0) the table is silent.
        let right = right.unwrap_or_else(|| {
            warnings.push("on the 3L/3R boundary B = 0; labeled by sign of B".to_string());
            p.b >= 0.0
        });
        if right {
            RegionLabel::Region3R
        } else {
            RegionLabel::Region3L
        }
    };

    let predicted = match label {
        RegionLabel::Region2 => Prediction::Csw,
        RegionLabel::Region3L | RegionLabel::Region3R if p.mu > 0.0 => {
            if c20.abs() < C20_TOLERANCE {
                warnings.push("c20 = -a_uu/c_s^2 vanishes; GSW prediction withheld".to_string());
                Prediction::None
            } else {
                Prediction::Gsw
            }
        }
        RegionLabel::Region3L | RegionLabel::Region3R | RegionLabel::Region4 => {
            Prediction::Periodic
        }
        _ => Prediction::None,
    };
    if p.mu.abs() > ASYMPTOTIC_MU {
        warnings.push(format!(
            "|mu| = {:.3} > 0.5: outside asymptotic regime",
            p.mu.abs()
        ));
    }

    Ok(RegionReport {
        alpha: c.alpha,
        c_s,
        mu: p.mu,
        a: p.a,
        b: p.b,
        roots,
        label,
        z_minus,
        z_plus,
        predicted,
        c20,
        warnings,
    })
}

/// Like [`classify`], but maps the singular speed `c_s^2 = 1` to
/// [`RegionLabel::Singular`] instead of an error. Used by lattice sweeps.
pub fn classify_or_singular(c: &ModelCoefficients, c_s: f64) -> Result<RegionReport, RegimeError> {
    match classify(c, c_s) {
        Err(RegimeError::SpeedSingular(_)) => {
            let (z_minus, z_plus) = z_pm(c.alpha);
            let nan = f64::NAN;
            Ok(RegionReport {
                alpha: c.alpha,
                c_s,
                mu: 1.0 - c.alpha * c.alpha / (c_s * c_s),
                a: nan,
                b: nan,
                roots: [Complex64::new(nan, nan); 4],
                label: RegionLabel::Singular,
                z_minus,
                z_plus,
                predicted: Prediction::None,
                c20: -c.a_uu / (c_s * c_s),
                warnings: vec!["c_s^2 = 1".to_string()],
            })
        }
        other => other,
    }
}
