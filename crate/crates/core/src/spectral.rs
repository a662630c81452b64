//! Periodic Fourier collocation on a truncated interval `(-L, L)`.
//!
//! Forward transforms are unnormalized (plain DFT sums), inverse transforms
//! carry the `1/N` factor, so a forward/inverse round trip is the identity.
//! Spectral coefficients are stored in FFT order: index `j` holds the mode
//! `m = j` for `j < N/2` and `m = j - N` otherwise, so the Nyquist mode
//! `m = -N/2` lives at index `N/2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

/// Default absolute tolerance for the zero-mean precondition.
pub const MEAN_TOLERANCE: f64 = 1e-10;
/// Default tolerance on the imaginary part left after an inverse transform.
pub const REALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("half length must be positive and finite, got {0}")]
    NonPositiveLength(f64),
    #[error("node count must be even, got {0}")]
    OddN(usize),
    #[error("node count must be at least 8, got {0}")]
    TooFewNodes(usize),
    #[error("field has {got} samples but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("symbol is not conjugate-symmetric: imaginary residue {0:e}")]
    NonRealOutput(f64),
    #[error("field mean {0:e} is not zero within tolerance")]
    NonZeroMean(f64),
    #[error("derivative order must be positive")]
    ZeroOrder,
}

/// Uniform periodic grid on `(-L, L)` with `N` nodes `x_j = -L + j h`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PeriodicGrid {
    half_length: f64,
    node_count: usize,
}

impl PeriodicGrid {
    pub fn new(half_length: f64, node_count: usize) -> Result<Self, SpectralError> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(SpectralError::NonPositiveLength(half_length));
        }
        if !node_count.is_multiple_of(2) {
            return Err(SpectralError::OddN(node_count));
        }
        if node_count < 8 {
            return Err(SpectralError::TooFewNodes(node_count));
        }
        Ok(Self {
            half_length,
            node_count,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.node_count
    }

    pub fn is_empty(&self) -> bool {
        self.node_count == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.node_count as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count).map(|j| self.node(j)).collect()
    }

    /// Integer mode number stored at FFT index `j`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.node_count as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Wavenumber `k = pi m / L` stored at FFT index `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        PI * self.mode(j) as f64 / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.node_count).map(|j| self.wavenumber(j)).collect()
    }

    /// FFT index of the unpaired Nyquist mode `m = -N/2`.
    pub fn nyquist_index(&self) -> usize {
        self.node_count / 2
    }

    /// Mask keeping modes with `|m| <= N/3` (2/3-rule truncation).
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cutoff = (self.node_count / 3) as i64;
        (0..self.node_count)
            .map(|j| self.mode(j).abs() <= cutoff)
            .collect()
    }

    /// Build a field by sampling `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: *self,
            values: self.nodes().into_iter().map(f).collect(),
        }
    }

    pub fn zeros(&self) -> RealField {
        RealField {
            grid: *self,
            values: vec![0.0; self.node_count],
        }
    }
}

impl fmt::Display for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(-{}, {}) with N={}",
            self.half_length, self.half_length, self.node_count
        )
    }
}

/// Real samples on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite(j));
        }
        Ok(Self { grid, values })
    }

    /// Wrap samples without the finiteness scan. Used on hot paths where the
    /// caller already guarantees the length.
    pub(crate) fn from_raw(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, factor: f64) -> RealField {
        self.map(|v| factor * v)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(
        &self,
        other: &RealField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<RealField, SpectralError> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn check_same_grid(&self, other: &RealField) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        Ok(())
    }

    /// Discrete `L^2` inner product `h * sum(f g)`.
    pub fn inner(&self, other: &RealField) -> Result<f64, SpectralError> {
        self.check_same_grid(other)?;
        Ok(self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }
}

/// Forward/inverse DFT plans for one grid.
///
/// Plans are immutable and shareable; scratch space is allocated per call.
#[derive(Clone)]
pub struct Spectral {
    grid: PeriodicGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.len()),
            inverse: planner.plan_fft_inverse(grid.len()),
            wavenumbers: grid.wavenumbers(),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Unnormalized DFT of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse DFT (with the `1/N` factor) returning the complex samples.
    pub fn inverse_complex(&self, mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
        self.inverse.process(&mut coeffs);
        let scale = 1.0 / self.grid.len() as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        coeffs
    }

    /// Inverse DFT keeping the real part only. Callers guarantee the
    /// coefficients are conjugate symmetric.
    pub fn inverse_real(&self, coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse_complex(coeffs)
            .into_iter()
            .map(|c| c.re)
            .collect()
    }

    /// Multiply the spectrum of `values` by `multiplier` (FFT order) and
    /// transform back, dropping the imaginary part.
    pub fn apply_multiplier(&self, values: &[f64], multiplier: &[Complex64]) -> Vec<f64> {
        let mut hat = self.forward(values);
        for (c, m) in hat.iter_mut().zip(multiplier) {
            *c *= m;
        }
        self.inverse_real(hat)
    }

    /// Apply a Fourier symbol `sigma(k)` and return the real result.
    ///
    /// The unpaired Nyquist mode receives `Re sigma(k)`, which zeroes it for
    /// odd derivatives.
    pub fn apply_symbol(
        &self,
        f: &RealField,
        sigma: impl Fn(f64) -> Complex64,
    ) -> Result<RealField, SpectralError> {
        if *f.grid() != self.grid {
            return Err(SpectralError::GridMismatch);
        }
        let nyq = self.grid.nyquist_index();
        let mut hat = self.forward(f.values());
        for (j, c) in hat.iter_mut().enumerate() {
            let s = sigma(self.wavenumbers[j]);
            *c *= if j == nyq {
                Complex64::new(s.re, 0.0)
            } else {
                s
            };
        }
        let out = self.inverse_complex(hat);
        let scale = out.iter().fold(1.0_f64, |m, c| m.max(c.re.abs()));
        let imag = out.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        if imag > REALITY_TOLERANCE * scale {
            return Err(SpectralError::NonRealOutput(imag));
        }
        Ok(RealField::from_raw(
            self.grid,
            out.into_iter().map(|c| c.re).collect(),
        ))
    }

    /// Spectral multiplier `(ik)^order` with the Nyquist mode zeroed for odd
    /// orders.
    pub fn derivative_multiplier(&self, order: u32) -> Vec<Complex64> {
        let nyq = self.grid.nyquist_index();
        self.wavenumbers
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if j == nyq && order % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k).powu(order)
                }
            })
            .collect()
    }

    pub fn derivative(&self, f: &RealField, order: u32) -> Result<RealField, SpectralError> {
        if order == 0 {
            return Err(SpectralError::ZeroOrder);
        }
        if *f.grid() != self.grid {
            return Err(SpectralError::GridMismatch);
        }
        let mult = self.derivative_multiplier(order);
        Ok(RealField::from_raw(
            self.grid,
            self.apply_multiplier(f.values(), &mult),
        ))
    }

    /// Zero-mean antiderivative: divide by `ik` for `k != 0`, drop the mean.
    pub fn antiderivative_zero_mean(&self, f: &RealField) -> Result<RealField, SpectralError> {
        if *f.grid() != self.grid {
            return Err(SpectralError::GridMismatch);
        }
        let mean = f.mean();
        if mean.abs() > MEAN_TOLERANCE {
            return Err(SpectralError::NonZeroMean(mean));
        }
        let nyq = self.grid.nyquist_index();
        let mut hat = self.forward(f.values());
        for (j, c) in hat.iter_mut().enumerate() {
            let k = self.wavenumbers[j];
            *c = if j == 0 || j == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                *c / Complex64::new(0.0, k)
            };
        }
        Ok(RealField::from_raw(self.grid, self.inverse_real(hat)))
    }
}

/// Discrete trapezoid norms on a periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Norms {
    pub l2: f64,
    pub sup: f64,
    pub h1: f64,
}

pub fn build_grid(half_length: f64, node_count: usize) -> Result<PeriodicGrid, SpectralError> {
    PeriodicGrid::new(half_length, node_count)
}

pub fn apply_fourier_symbol(
    f: &RealField,
    sigma: impl Fn(f64) -> Complex64,
) -> Result<RealField, SpectralError> {
    Spectral::new(*f.grid()).apply_symbol(f, sigma)
}

pub fn derivative(f: &RealField, order: u32) -> Result<RealField, SpectralError> {
    Spectral::new(*f.grid()).derivative(f, order)
}

pub fn antiderivative_zero_mean(f: &RealField) -> Result<RealField, SpectralError> {
    Spectral::new(*f.grid()).antiderivative_zero_mean(f)
}

pub fn norms(f: &RealField) -> Norms {
    let h = f.grid().spacing();
    let l2_sq = h * f.values().iter().map(|v| v * v).sum::<f64>();
    let df = derivative(f, 1).expect("order 1 on own grid");
    let dl2_sq = h * df.values().iter().map(|v| v * v).sum::<f64>();
    Norms {
        l2: l2_sq.sqrt(),
        sup: f.sup(),
        h1: (l2_sq + dl2_sq).sqrt(),
    }
}

/// `h * sum(f_j)`, spectrally accurate for smooth periodic data.
pub fn integral(f: &RealField) -> f64 {
    f.grid().spacing() * f.values().iter().sum::<f64>()
}

/// Fraction of spectral energy held by the top third of the modes.
pub fn top_third_energy_fraction(spectral: &Spectral, f: &RealField) -> f64 {
    let hat = spectral.forward(f.values());
    let mask = spectral.grid().dealias_mask();
    let total: f64 = hat.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let top: f64 = hat
        .iter()
        .zip(&mask)
        .filter(|(_, &keep)| !keep)
        .map(|(c, _)| c.norm_sqr())
        .sum();
    top / total
}
