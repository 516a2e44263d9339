//! First and second flows of the hierarchy for real periodic `p`.
//!
//! The `(+)`-parts are
//!
//! ```text
//! n = 1:  ∂³p + 3ω∂p + (3/2)p∂ω
//! n = 2:  ∂⁵p + 5ω∂³p + (15/2)∂ω∂²p + (5/2)∂p(2ω² + 3∂²ω + 2ζ)
//!         + (5/2)p∂(ω² + ζ + ∂²ω)
//! ```
//!
//! with `∂̄ω = ∂(p²)` and `∂̄ζ = ∂(p²ω − (∂p)²)` solved in the zero-mean
//! gauge. For real `p` the full right-hand side is `2·Re` of the plus part.

use std::fmt;

use mvn_core::verifier::{flow_rhs_symbolic, flux_direct};
use mvn_core::Wirtinger;
use num_complex::Complex64;
use thiserror::Error;

use crate::eval::{eval_on_grid, Binding};
use crate::spectral::{
    dbar_inverse, integrate_real, symbol, wirtinger, ComplexField, Grid, RealField, SpectralError, Spectrum,
};

/// Default cap on `max|p|` before a run is declared blown up.
pub const BLOWUP_CAP: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("flow n={0} is not supported (only 1 and 2)")]
    UnsupportedFlow(u32),
    #[error("time step must be positive and finite (got {0})")]
    BadStep(f64),
    #[error("blow-up at t={t}: max|p| = {max_abs_p:e}")]
    BlowUp { t: f64, max_abs_p: f64 },
    #[error("non-finite values at t={0}")]
    NonFinite(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn check_flow(n: u32) -> Result<(), FlowError> {
    match n {
        1 | 2 => Ok(()),
        _ => Err(FlowError::UnsupportedFlow(n)),
    }
}

/// `ω = ∂̄⁻¹∂(p²)`.
pub fn compute_omega(p: &RealField) -> Result<ComplexField, FlowError> {
    let sq = p.map(|v| v * v).to_complex();
    Ok(dbar_inverse(&wirtinger(&sq, Wirtinger::Dz, 1)?)?)
}

/// `ζ = ∂̄⁻¹∂(p²ω − (∂p)²)`.
pub fn compute_zeta(p: &RealField, omega: &ComplexField) -> Result<ComplexField, FlowError> {
    let pc = p.to_complex();
    let dp = wirtinger(&pc, Wirtinger::Dz, 1)?;
    let src = ComplexField::from_vec_unchecked(
        *p.grid(),
        pc.samples()
            .iter()
            .zip(omega.samples())
            .zip(dp.samples())
            .map(|((a, w), d)| a * a * w - d * d)
            .collect(),
    );
    Ok(dbar_inverse(&wirtinger(&src, Wirtinger::Dz, 1)?)?)
}

/// Symbol tables for one grid.
struct Tables {
    dz: Vec<Complex64>,
    /// `σ∂ / σ∂̄`, zero at the origin.
    ratio: Vec<Complex64>,
    keep: Vec<bool>,
}

impl Tables {
    fn new(grid: &Grid) -> Tables {
        let n = grid.n();
        let cut = grid.dealias_cutoff();
        let mut t = Tables {
            dz: Vec::with_capacity(n * n),
            ratio: Vec::with_capacity(n * n),
            keep: Vec::with_capacity(n * n),
        };
        for j in 0..n {
            for k in 0..n {
                let (kx, ky) = (grid.wavenumber(j), grid.wavenumber(k));
                let a = symbol(Wirtinger::Dz, kx, ky);
                let b = symbol(Wirtinger::Dzbar, kx, ky);
                t.dz.push(a);
                t.ratio.push(if j == 0 && k == 0 { Complex64::new(0.0, 0.0) } else { a / b });
                t.keep.push(grid.mode(j).abs() as f64 <= cut && grid.mode(k).abs() as f64 <= cut);
            }
        }
        t
    }
}

/// Evaluator for the plus part with optional dealiasing of every product.
struct PlusPart<'a> {
    grid: Grid,
    t: &'a Tables,
    dealias: bool,
}

type Modes = Vec<Complex64>;

impl PlusPart<'_> {
    fn field(&self, m: &[Complex64]) -> Vec<Complex64> {
        Spectrum::from_modes(self.grid, m.to_vec()).inverse().into_samples()
    }

    fn modes(&self, f: Vec<Complex64>) -> Modes {
        let mut s = Spectrum::forward(&ComplexField::from_vec_unchecked(self.grid, f));
        if self.dealias {
            for (m, &k) in s.modes_mut().iter_mut().zip(&self.t.keep) {
                if !k {
                    *m = Complex64::new(0.0, 0.0);
                }
            }
        }
        s.into_modes()
    }

    fn prod(&self, a: &[Complex64], b: &[Complex64]) -> Modes {
        self.modes(a.iter().zip(b).map(|(x, y)| x * y).collect())
    }

    fn d(&self, m: &[Complex64], k: u32) -> Modes {
        m.iter().zip(&self.t.dz).map(|(v, s)| v * s.powu(k)).collect()
    }

    fn dbar_inv_d(&self, m: &[Complex64]) -> Modes {
        m.iter().zip(&self.t.ratio).map(|(v, r)| v * r).collect()
    }

    fn eval(&self, p_hat: &[Complex64], n: u32) -> Modes {
        let p = self.field(p_hat);
        let p1 = self.field(&self.d(p_hat, 1));
        let sq = self.field(&self.prod(&p, &p));
        let w_hat = self.dbar_inv_d(&self.modes(sq.clone()));
        let w = self.field(&w_hat);
        let dw = self.field(&self.d(&w_hat, 1));
        let mut out = self.d(p_hat, 2 * n + 1);
        let mut acc = |m: Modes, c: f64| {
            for (o, v) in out.iter_mut().zip(m) {
                *o += v * c;
            }
        };
        if n == 1 {
            acc(self.prod(&w, &p1), 3.0);
            acc(self.prod(&p, &dw), 1.5);
            return out;
        }
        let p2 = self.field(&self.d(p_hat, 2));
        let p3 = self.field(&self.d(p_hat, 3));
        let sqw = self.prod(&sq, &w);
        let dp_sq = self.prod(&p1, &p1);
        let src: Modes = sqw.iter().zip(&dp_sq).map(|(a, b)| a - b).collect();
        let z_hat = self.dbar_inv_d(&src);
        let w2_hat = self.prod(&w, &w);
        let ddw_hat = self.d(&w_hat, 2);
        let inner1: Modes = w2_hat
            .iter()
            .zip(&ddw_hat)
            .zip(&z_hat)
            .map(|((a, b), c)| 2.0 * a + 3.0 * b + 2.0 * c)
            .collect();
        let inner2: Modes = w2_hat
            .iter()
            .zip(&ddw_hat)
            .zip(&z_hat)
            .map(|((a, b), c)| a + b + c)
            .collect();
        let inner1 = self.field(&inner1);
        let inner2 = self.field(&self.d(&inner2, 1));
        acc(self.prod(&w, &p3), 5.0);
        acc(self.prod(&dw, &p2), 7.5);
        acc(self.prod(&p1, &inner1), 2.5);
        acc(self.prod(&p, &inner2), 2.5);
        out
    }
}

/// Spectrum of the plus part for real `p` given by its spectrum.
fn plus_modes(grid: Grid, tables: &Tables, p_hat: &[Complex64], n: u32, dealias: bool) -> Modes {
    PlusPart {
        grid,
        t: tables,
        dealias,
    }
    .eval(p_hat, n)
}

/// Spectrum of `2·Re(g)` from the spectrum of `g`.
fn twice_real_part(grid: &Grid, g: &[Complex64]) -> Modes {
    let n = grid.n();
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let cj = (n - j) % n;
            let ck = (n - k) % n;
            out.push(g[j * n + k] + g[cj * n + ck].conj());
        }
    }
    out
}

/// Plus part `δp/δt⁺` as a complex field.
pub fn flow_rhs_plus(p: &RealField, n: u32, dealias: bool) -> Result<ComplexField, FlowError> {
    check_flow(n)?;
    let tables = Tables::new(p.grid());
    let p_hat = Spectrum::forward_real(p).into_modes();
    let m = plus_modes(*p.grid(), &tables, &p_hat, n, dealias);
    Ok(Spectrum::from_modes(*p.grid(), m).inverse())
}

/// Full right-hand side `2·Re(δp/δt⁺)`.
pub fn flow_rhs(p: &RealField, n: u32, dealias: bool) -> Result<RealField, FlowError> {
    Ok(&flow_rhs_plus(p, n, dealias)?.re() * 2.0)
}

/// `S = 2∫p² dx dy`.
pub fn willmore(p: &RealField) -> f64 {
    2.0 * integrate_real(&p.map(|v| v * v))
}

/// Relative max-norm of `2p·δp/δt⁺ − ∂F` with the flux bracket `F`,
/// all products exact. Zero for `p = 0`.
pub fn flux_residual_numeric(p: &RealField, n: u32) -> Result<f64, FlowError> {
    check_flow(n)?;
    let plus = flow_rhs_plus(p, n, false)?;
    let lhs = ComplexField::from_vec_unchecked(
        *p.grid(),
        plus.samples()
            .iter()
            .zip(p.samples())
            .map(|(r, &q)| 2.0 * q * r)
            .collect(),
    );
    let flux = flux_direct(n).expect("flow index already checked");
    let f = eval_on_grid(&flux, &binding_for(p, n)?).expect("binding covers p, ω, ζ");
    let df = wirtinger(&f, Wirtinger::Dz, 1)?;
    let scale = lhs.max_abs();
    let diff = lhs.max_diff(&df);
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

fn binding_for(p: &RealField, n: u32) -> Result<Binding, FlowError> {
    let omega = compute_omega(p)?;
    let mut binding = Binding::new(p.clone());
    if n == 2 {
        binding = binding.with_zeta(compute_zeta(p, &omega)?);
    }
    Ok(binding.with_omega(omega))
}

/// Relative max-norm difference between [`flow_rhs`] (dealiasing off) and
/// the symbolic right-hand side evaluated on the grid plus its conjugate.
pub fn symbolic_agreement(p: &RealField, n: u32) -> Result<f64, FlowError> {
    check_flow(n)?;
    let numeric = flow_rhs(p, n, false)?.to_complex();
    let poly = flow_rhs_symbolic(n).expect("flow index already checked");
    let plus = eval_on_grid(&poly, &binding_for(p, n)?).expect("binding covers p, ω, ζ");
    let symbolic = &plus + &plus.conj();
    let scale = numeric.max_abs();
    let diff = numeric.max_diff(&symbolic);
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Integrating-factor RK4 with exact linear propagation.
    Ifrk4,
    Rk4,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ifrk4 => "ifrk4",
            Scheme::Rk4 => "rk4",
        }
    }

    pub fn from_name(s: &str) -> Option<Scheme> {
        match s {
            "ifrk4" => Some(Scheme::Ifrk4),
            "rk4" => Some(Scheme::Rk4),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub p: RealField,
    pub t: f64,
    pub n_flow: u32,
}

impl FlowState {
    pub fn new(p: RealField, n_flow: u32) -> Result<Self, FlowError> {
        check_flow(n_flow)?;
        Ok(FlowState { p, t: 0.0, n_flow })
    }
}

/// Default step `0.5 / (k_cut/2)^(2n+1)` with `k_cut` the 2/3-rule cutoff
/// wavenumber.
pub fn default_dt(grid: &Grid, n_flow: u32) -> f64 {
    let k_cut = 2.0 * std::f64::consts::PI / grid.length() * grid.dealias_cutoff();
    0.5 / (k_cut / 2.0).powi(2 * n_flow as i32 + 1)
}

/// Time stepper for one flow on one grid.
pub struct Stepper {
    grid: Grid,
    n_flow: u32,
    dt: f64,
    scheme: Scheme,
    dealias: bool,
    pub blowup_cap: f64,
    tables: Tables,
    /// `exp(L dt/2)` with `L = σ∂^(2n+1) + σ∂̄^(2n+1)`.
    half: Vec<Complex64>,
    linear: Vec<Complex64>,
    /// False on the Nyquist row and column, where odd derivatives of a
    /// real field are undefined, and outside the 2/3 band when dealiasing;
    /// the evolved spectrum is kept zero there.
    regular: Vec<bool>,
    /// Max-norm of the imaginary part discarded by the last step.
    pub last_discarded_imag: f64,
}

impl Stepper {
    pub fn new(grid: Grid, n_flow: u32, dt: f64, scheme: Scheme, dealias: bool) -> Result<Self, FlowError> {
        check_flow(n_flow)?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(FlowError::BadStep(dt));
        }
        let tables = Tables::new(&grid);
        let order = 2 * n_flow + 1;
        let n = grid.n();
        let mut linear = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let (kx, ky) = (grid.wavenumber(j), grid.wavenumber(k));
                linear.push(symbol(Wirtinger::Dz, kx, ky).powu(order) + symbol(Wirtinger::Dzbar, kx, ky).powu(order));
            }
        }
        let half = linear.iter().map(|l| (l * (dt / 2.0)).exp()).collect();
        // Nyquist modes always, and with dealiasing every mode outside the
        // retained band, are held at zero: the dealiased rhs never reaches
        // them, so their IF nonlinear term would be the stiff −L·p̂ alone.
        let regular = (0..n * n)
            .map(|i| {
                let (j, k) = (i / n, i % n);
                j != n / 2 && k != n / 2 && (!dealias || tables.keep[i])
            })
            .collect();
        Ok(Stepper {
            grid,
            n_flow,
            dt,
            scheme,
            dealias,
            blowup_cap: BLOWUP_CAP,
            tables,
            half,
            linear,
            regular,
            last_discarded_imag: 0.0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Spectrum of the full right-hand side.
    fn rhs(&self, p_hat: &[Complex64]) -> Modes {
        let plus = plus_modes(self.grid, &self.tables, p_hat, self.n_flow, self.dealias);
        let mut r = twice_real_part(&self.grid, &plus);
        self.clear_nyquist(&mut r);
        r
    }

    fn clear_nyquist(&self, m: &mut [Complex64]) {
        for (v, &ok) in m.iter_mut().zip(&self.regular) {
            if !ok {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Nonlinear part `rhs − L·p̂`.
    fn nonlinear(&self, p_hat: &[Complex64]) -> Modes {
        let mut r = self.rhs(p_hat);
        for ((v, l), p) in r.iter_mut().zip(&self.linear).zip(p_hat) {
            *v -= l * p;
        }
        r
    }

    fn ifrk4(&self, v: &[Complex64]) -> Modes {
        let dt = self.dt;
        let e = &self.half;
        let combine = |f: &dyn Fn(usize) -> Complex64| -> Modes { (0..v.len()).map(f).collect() };
        let a: Modes = self.nonlinear(v).into_iter().map(|x| x * dt).collect();
        let va = combine(&|i| e[i] * (v[i] + a[i] / 2.0));
        let b: Modes = self.nonlinear(&va).into_iter().map(|x| x * dt).collect();
        let vb = combine(&|i| e[i] * v[i] + b[i] / 2.0);
        let c: Modes = self.nonlinear(&vb).into_iter().map(|x| x * dt).collect();
        let vc = combine(&|i| e[i] * e[i] * v[i] + e[i] * c[i]);
        let d: Modes = self.nonlinear(&vc).into_iter().map(|x| x * dt).collect();
        combine(&|i| {
            let e2 = e[i] * e[i];
            e2 * v[i] + (e2 * a[i] + 2.0 * e[i] * (b[i] + c[i]) + d[i]) / 6.0
        })
    }

    fn rk4(&self, v: &[Complex64]) -> Modes {
        let dt = self.dt;
        let axpy = |k: &[Complex64], s: f64| -> Modes { v.iter().zip(k).map(|(a, b)| a + b * s).collect() };
        let k1 = self.rhs(v);
        let k2 = self.rhs(&axpy(&k1, dt / 2.0));
        let k3 = self.rhs(&axpy(&k2, dt / 2.0));
        let k4 = self.rhs(&axpy(&k3, dt));
        (0..v.len())
            .map(|i| v[i] + (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) * (dt / 6.0))
            .collect()
    }

    /// Advances `state` by one step, keeping `p` real.
    pub fn step(&mut self, state: &FlowState) -> Result<FlowState, FlowError> {
        let mut v = Spectrum::forward_real(&state.p).into_modes();
        self.clear_nyquist(&mut v);
        let next = match self.scheme {
            Scheme::Ifrk4 => self.ifrk4(&v),
            Scheme::Rk4 => self.rk4(&v),
        };
        let field = Spectrum::from_modes(self.grid, next).inverse();
        let t = state.t + self.dt;
        if field.samples().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(FlowError::NonFinite(t));
        }
        self.last_discarded_imag = field.im().max_abs();
        let p = field.re();
        let max_abs_p = p.max_abs();
        if max_abs_p > self.blowup_cap {
            return Err(FlowError::BlowUp { t, max_abs_p });
        }
        Ok(FlowState {
            p,
            t,
            n_flow: state.n_flow,
        })
    }
}

/// One step of the chosen scheme with default dealiasing.
pub fn step(state: &FlowState, dt: f64, scheme: Scheme) -> Result<FlowState, FlowError> {
    Stepper::new(*state.p.grid(), state.n_flow, dt, scheme, true)?.step(state)
}

/// One row of the diagnostics stream.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub step: usize,
    pub t: f64,
    pub s: f64,
    pub max_abs_p: f64,
    pub s_drift_rel: f64,
    pub flux_residual: Option<f64>,
}

impl Diagnostics {
    pub fn of(step: usize, state: &FlowState, s0: f64) -> Diagnostics {
        let s = willmore(&state.p);
        Diagnostics {
            step,
            t: state.t,
            s,
            max_abs_p: state.p.max_abs(),
            s_drift_rel: if s0 == 0.0 { (s - s0).abs() } else { (s - s0).abs() / s0 },
            flux_residual: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::standard(32).unwrap()
    }

    fn cosine(eps: f64) -> RealField {
        RealField::from_fn(grid(), |x, _| eps * x.cos())
    }

    #[test]
    fn omega_examples() {
        assert_eq!(compute_omega(&RealField::zeros(grid())).unwrap().max_abs(), 0.0);
        let w = compute_omega(&cosine(0.1)).unwrap();
        let expect = RealField::from_fn(grid(), |x, _| (2.0 * x).cos() / 200.0).to_complex();
        assert!(w.max_diff(&expect) < 1e-16);
        assert!(compute_omega(&RealField::constant(grid(), 0.7)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn zeta_examples() {
        let z = RealField::zeros(grid());
        let w = compute_omega(&z).unwrap();
        assert_eq!(compute_zeta(&z, &w).unwrap().max_abs(), 0.0);
        let c = RealField::constant(grid(), 0.7);
        let w = compute_omega(&c).unwrap();
        assert!(compute_zeta(&c, &w).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn zeta_for_a_cosine_matches_fourier_arithmetic() {
        // p² = ε²(1 + cos 2x)/2, ω = (ε²/2) cos 2x, (∂p)² = (ε²/8)(1 − cos 2x)
        let eps = 0.1f64;
        let p = cosine(eps);
        let w = compute_omega(&p).unwrap();
        let zeta = compute_zeta(&p, &w).unwrap();
        let e2 = eps * eps;
        let e4 = e2 * e2;
        let a2 = e4 / 4.0 + e2 / 8.0;
        let a4 = e4 / 8.0;
        // ∂ = ∂̄ on y-independent fields, so ζ is p²ω − (∂p)² minus its mean
        let expect = RealField::from_fn(grid(), |x, _| a2 * (2.0 * x).cos() + a4 * (4.0 * x).cos()).to_complex();
        assert!(zeta.max_diff(&expect) < 1e-16, "{}", zeta.max_diff(&expect));
    }

    #[test]
    fn rhs_fixed_points() {
        for n in [1, 2] {
            assert_eq!(flow_rhs(&RealField::zeros(grid()), n, true).unwrap().max_abs(), 0.0);
            assert!(flow_rhs(&RealField::constant(grid(), 0.3), n, true).unwrap().max_abs() < 1e-14);
        }
        assert_eq!(flow_rhs(&cosine(0.1), 3, true), Err(FlowError::UnsupportedFlow(3)));
    }

    #[test]
    fn first_flow_of_a_cosine() {
        let r = flow_rhs(&cosine(0.1), 1, true).unwrap();
        let expect = RealField::from_fn(grid(), |x, _| x.sin() / 40.0 - 3.0 * (3.0 * x).sin() / 2000.0);
        assert!(r.max_diff(&expect) < 1e-12 * expect.max_abs());
    }

    #[test]
    fn willmore_examples() {
        assert_eq!(willmore(&RealField::zeros(grid())), 0.0);
        assert!((willmore(&cosine(0.1)) - PI * PI / 25.0).abs() < 1e-14);
        let c = 0.3;
        assert!((willmore(&RealField::constant(grid(), c)) - 8.0 * PI * PI * c * c).abs() < 1e-12);
    }

    #[test]
    fn flux_residual_examples() {
        assert_eq!(flux_residual_numeric(&RealField::zeros(grid()), 1).unwrap(), 0.0);
        assert!(flux_residual_numeric(&cosine(0.1), 1).unwrap() < 1e-10);
        assert!(flux_residual_numeric(&cosine(0.1), 2).unwrap() < 1e-10);
    }

    #[test]
    fn step_fixed_points() {
        for scheme in [Scheme::Ifrk4, Scheme::Rk4] {
            for n in [1, 2] {
                let s = FlowState::new(RealField::zeros(grid()), n).unwrap();
                assert_eq!(step(&s, 1e-3, scheme).unwrap().p.max_abs(), 0.0);
                let s = FlowState::new(RealField::constant(grid(), 0.25), n).unwrap();
                let next = step(&s, 1e-3, scheme).unwrap();
                assert!(next.p.max_diff(&s.p) < 1e-14);
                assert!((next.t - 1e-3).abs() < 1e-18);
            }
        }
    }

    #[test]
    fn step_rejects_bad_dt_and_detects_blowup() {
        let s = FlowState::new(cosine(0.1), 1).unwrap();
        assert_eq!(step(&s, 0.0, Scheme::Rk4), Err(FlowError::BadStep(0.0)));
        let mut st = Stepper::new(grid(), 1, 1e-3, Scheme::Ifrk4, true).unwrap();
        st.blowup_cap = 0.05;
        assert!(matches!(st.step(&s), Err(FlowError::BlowUp { .. })));
    }

    #[test]
    fn linear_symbol_is_imaginary() {
        let st = Stepper::new(grid(), 2, 1e-3, Scheme::Ifrk4, true).unwrap();
        assert!(st.linear.iter().all(|l| l.re.abs() < 1e-9 * (1.0 + l.im.abs())));
    }

    #[test]
    fn default_dt_heuristic() {
        let g = Grid::standard(64).unwrap();
        let k = 64.0 / 3.0 / 2.0;
        assert!((default_dt(&g, 2) - 0.5 / f64::powi(k, 5)).abs() < 1e-18);
        assert!((default_dt(&g, 1) - 0.5 / f64::powi(k, 3)).abs() < 1e-15);
    }
}
