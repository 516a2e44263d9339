//! Periodic grid fields with FFT-based Wirtinger derivatives, d-bar
//! inversion, dealiased products and integration.
//!
//! Conventions: `z = x + iy`, `∂ = (∂x − i∂y)/2`, `∂̄ = (∂x + i∂y)/2`.
//! A mode `e^{i(kx x + ky y)}` has symbols `σ∂ = (i kx + ky)/2` and
//! `σ∂̄ = (i kx − ky)/2`. Samples are stored row-major over `(x, y)`, so the
//! sample at `(x_j, y_k)` lives at index `j·n + k`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use mvn_core::Wirtinger;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use thiserror::Error;

/// Highest derivative order accepted by [`wirtinger`].
pub const MAX_ORDER: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("n must be even ≥ 8 (got {0})")]
    BadSize(usize),
    #[error("length must be positive and finite (got {0})")]
    BadLength(f64),
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("derivative order must be in 1..={MAX_ORDER} (got {0})")]
    BadOrder(u32),
    #[error("grid mismatch")]
    GridMismatch,
    #[error("gauge obstruction: |mean| = {mean:e} exceeds {tol:e}")]
    GaugeObstruction { mean: f64, tol: f64 },
}

/// Square periodic grid on `[0, length)²` with `n` samples per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Grid, SpectralError> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SpectralError::BadSize(n));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(SpectralError::BadLength(length));
        }
        Ok(Grid { n, length })
    }

    /// `n` samples on `[0, 2π)²`.
    pub fn standard(n: usize) -> Result<Grid, SpectralError> {
        Grid::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// `(x, y)` of the sample at flat index `idx`.
    pub fn node(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx / self.n), self.coord(idx % self.n))
    }

    /// Signed mode number of FFT bin `j`; the Nyquist bin maps to `−n/2`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Angular wavenumber of FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI / self.length * self.mode(j) as f64
    }

    /// Largest mode number kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> f64 {
        self.n as f64 / 3.0
    }
}

/// Fourier symbol of one Wirtinger derivative at wavenumber `(kx, ky)`.
pub fn symbol(dir: Wirtinger, kx: f64, ky: f64) -> Complex64 {
    match dir {
        Wirtinger::Dz => Complex64::new(ky, kx) * 0.5,
        Wirtinger::Dzbar => Complex64::new(-ky, kx) * 0.5,
    }
}

fn check_samples<T>(grid: &Grid, data: &[T], finite: impl Fn(&T) -> bool) -> Result<(), SpectralError> {
    if data.len() != grid.len() {
        return Err(SpectralError::SampleCount {
            expected: grid.len(),
            got: data.len(),
        });
    }
    match data.iter().position(|v| !finite(v)) {
        Some(i) => Err(SpectralError::NonFinite(i)),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    data: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    data: Vec<f64>,
}

impl ComplexField {
    pub fn new(grid: Grid, data: Vec<Complex64>) -> Result<Self, SpectralError> {
        check_samples(&grid, &data, |v| v.re.is_finite() && v.im.is_finite())?;
        Ok(ComplexField { grid, data })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        ComplexField { grid, data }
    }

    pub fn zeros(grid: Grid) -> Self {
        ComplexField {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        ComplexField {
            grid,
            data: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let data = (0..grid.len())
            .map(|i| {
                let (x, y) = grid.node(i);
                f(x, y)
            })
            .collect();
        ComplexField { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        ComplexField {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn re(&self) -> RealField {
        RealField {
            grid: self.grid,
            data: self.data.iter().map(|v| v.re).collect(),
        }
    }

    pub fn im(&self) -> RealField {
        RealField {
            grid: self.grid,
            data: self.data.iter().map(|v| v.im).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn mean(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() / self.data.len() as f64
    }

    /// Max-norm of `self − other`.
    pub fn max_diff(&self, other: &ComplexField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Max-norm of `self − other` relative to the max-norm of `other`.
    pub fn rel_diff(&self, other: &ComplexField) -> f64 {
        let scale = other.max_abs();
        let d = self.max_diff(other);
        if scale == 0.0 {
            d
        } else {
            d / scale
        }
    }

    fn zip_with(&self, other: &ComplexField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        ComplexField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl RealField {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self, SpectralError> {
        check_samples(&grid, &data, |v| v.is_finite())?;
        Ok(RealField { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        RealField {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        RealField {
            grid,
            data: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let data = (0..grid.len())
            .map(|i| {
                let (x, y) = grid.node(i);
                f(x, y)
            })
            .collect();
        RealField { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        RealField {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, other: &RealField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn has_non_finite(&self) -> bool {
        self.data.iter().any(|v| !v.is_finite())
    }
}

macro_rules! field_ops {
    ($ty:ident, $scalar:ty) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                assert_eq!(self.grid, rhs.grid, "grid mismatch");
                $ty {
                    grid: self.grid,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
                }
            }
        }
        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                assert_eq!(self.grid, rhs.grid, "grid mismatch");
                $ty {
                    grid: self.grid,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
                }
            }
        }
        impl Mul<$scalar> for &$ty {
            type Output = $ty;
            fn mul(self, rhs: $scalar) -> $ty {
                $ty {
                    grid: self.grid,
                    data: self.data.iter().map(|a| a * rhs).collect(),
                }
            }
        }
        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty {
                    grid: self.grid,
                    data: self.data.iter().map(|a| -a).collect(),
                }
            }
        }
    };
}

field_ops!(ComplexField, Complex64);
field_ops!(RealField, f64);

impl Mul<f64> for &ComplexField {
    type Output = ComplexField;
    fn mul(self, rhs: f64) -> ComplexField {
        self.map(|v| v * rhs)
    }
}

/// Fourier coefficients `c` with `f(x, y) = Σ c · e^{i(kx x + ky y)}`,
/// stored in FFT bin order with the same layout as the samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    modes: Vec<Complex64>,
}

type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

thread_local! {
    static PLANS: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((n, inverse))
            .or_insert_with(|| {
                let dir = if inverse {
                    FftDirection::Inverse
                } else {
                    FftDirection::Forward
                };
                planner.plan_fft(n, dir)
            })
            .clone()
    })
}

/// Unnormalized in-place 2-D transform of an `n × n` row-major array.
fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // transforms along y (contiguous rows)
    fft.process_with_scratch(data, &mut scratch);
    // transforms along x (columns)
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        for j in 0..n {
            col[j] = data[j * n + k];
        }
        fft.process_with_scratch(&mut col, &mut scratch);
        for j in 0..n {
            data[j * n + k] = col[j];
        }
    }
}

impl Spectrum {
    pub fn forward(f: &ComplexField) -> Spectrum {
        let n = f.grid.n;
        let mut modes = f.data.clone();
        fft2(&mut modes, n, false);
        let norm = 1.0 / (n * n) as f64;
        for m in &mut modes {
            *m *= norm;
        }
        Spectrum { grid: f.grid, modes }
    }

    pub fn forward_real(f: &RealField) -> Spectrum {
        Spectrum::forward(&f.to_complex())
    }

    pub fn inverse(&self) -> ComplexField {
        let mut data = self.modes.clone();
        fft2(&mut data, self.grid.n, true);
        ComplexField {
            grid: self.grid,
            data,
        }
    }

    pub fn zeros(grid: Grid) -> Spectrum {
        Spectrum {
            grid,
            modes: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn modes(&self) -> &[Complex64] {
        &self.modes
    }

    pub fn modes_mut(&mut self) -> &mut [Complex64] {
        &mut self.modes
    }

    /// Coefficient of the mode with signed numbers `(mx, my)`.
    pub fn coeff(&self, mx: i64, my: i64) -> Complex64 {
        let n = self.grid.n as i64;
        let j = mx.rem_euclid(n) as usize;
        let k = my.rem_euclid(n) as usize;
        self.modes[j * self.grid.n + k]
    }

    /// Multiplies every mode by `f(kx, ky)`.
    pub fn apply_symbol(&self, f: impl Fn(f64, f64) -> Complex64) -> Spectrum {
        let n = self.grid.n;
        let kx: Vec<f64> = (0..n).map(|j| self.grid.wavenumber(j)).collect();
        let mut modes = self.modes.clone();
        for j in 0..n {
            for k in 0..n {
                modes[j * n + k] *= f(kx[j], kx[k]);
            }
        }
        Spectrum {
            grid: self.grid,
            modes,
        }
    }

    /// `∂ᵃ∂̄ᵇ` applied spectrally.
    pub fn derive(&self, a: u32, b: u32) -> Spectrum {
        if a == 0 && b == 0 {
            return self.clone();
        }
        self.apply_symbol(|kx, ky| {
            symbol(Wirtinger::Dz, kx, ky).powu(a) * symbol(Wirtinger::Dzbar, kx, ky).powu(b)
        })
    }

    /// Zeroes every mode with `|m| > n/3` along either axis.
    pub fn dealias(&mut self) {
        let n = self.grid.n;
        let cut = self.grid.dealias_cutoff();
        for j in 0..n {
            let mj = self.grid.mode(j).abs() as f64;
            for k in 0..n {
                if mj > cut || self.grid.mode(k).abs() as f64 > cut {
                    self.modes[j * n + k] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Sum of `|c|²`.
    pub fn energy(&self) -> f64 {
        self.modes.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl Spectrum {
    pub fn from_modes(grid: Grid, modes: Vec<Complex64>) -> Spectrum {
        assert_eq!(modes.len(), grid.len(), "mode count");
        Spectrum { grid, modes }
    }

    pub fn into_modes(self) -> Vec<Complex64> {
        self.modes
    }
}

impl Add for &Spectrum {
    type Output = Spectrum;
    fn add(self, rhs: &Spectrum) -> Spectrum {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        Spectrum {
            grid: self.grid,
            modes: self.modes.iter().zip(&rhs.modes).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Mul<Complex64> for &Spectrum {
    type Output = Spectrum;
    fn mul(self, rhs: Complex64) -> Spectrum {
        Spectrum {
            grid: self.grid,
            modes: self.modes.iter().map(|a| a * rhs).collect(),
        }
    }
}

/// Spectral `∂^order` or `∂̄^order`.
pub fn wirtinger(f: &ComplexField, dir: Wirtinger, order: u32) -> Result<ComplexField, SpectralError> {
    if order == 0 || order > MAX_ORDER {
        return Err(SpectralError::BadOrder(order));
    }
    let (a, b) = match dir {
        Wirtinger::Dz => (order, 0),
        Wirtinger::Dzbar => (0, order),
    };
    Ok(Spectrum::forward(f).derive(a, b).inverse())
}

/// Default tolerance on the mean of a d-bar right-hand side.
pub fn gauge_tolerance(f: &ComplexField) -> f64 {
    1e-12 * f.max_abs()
}

/// Zero-mean solution `g` of `∂̄g = f` with the default tolerance.
pub fn dbar_inverse(f: &ComplexField) -> Result<ComplexField, SpectralError> {
    dbar_inverse_with(f, gauge_tolerance(f))
}

pub fn dbar_inverse_with(f: &ComplexField, tol_mean: f64) -> Result<ComplexField, SpectralError> {
    Ok(dbar_inverse_spectrum(&Spectrum::forward(f), tol_mean)?.inverse())
}

/// Spectral form of [`dbar_inverse_with`]; returns coefficients.
pub fn dbar_inverse_spectrum(s: &Spectrum, tol_mean: f64) -> Result<Spectrum, SpectralError> {
    let mean = s.modes[0].norm();
    if mean > tol_mean {
        return Err(SpectralError::GaugeObstruction { mean, tol: tol_mean });
    }
    Ok(s.apply_symbol(|kx, ky| {
        if kx == 0.0 && ky == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            1.0 / symbol(Wirtinger::Dzbar, kx, ky)
        }
    }))
}

/// Pointwise product, optionally followed by 2/3-rule truncation.
pub fn product(f: &ComplexField, g: &ComplexField, dealias: bool) -> Result<ComplexField, SpectralError> {
    if f.grid != g.grid {
        return Err(SpectralError::GridMismatch);
    }
    let out = f.zip_with(g, |a, b| a * b);
    Ok(if dealias { dealiased(&out) } else { out })
}

/// 2/3-rule truncation of `f`.
pub fn dealiased(f: &ComplexField) -> ComplexField {
    let mut s = Spectrum::forward(f);
    s.dealias();
    s.inverse()
}

/// `∫ f dx dy` over the period cell.
pub fn integrate(f: &ComplexField) -> Complex64 {
    f.mean() * f.grid.length * f.grid.length
}

pub fn integrate_real(f: &RealField) -> f64 {
    let sum: f64 = f.data.iter().sum();
    sum / f.data.len() as f64 * f.grid.length * f.grid.length
}
