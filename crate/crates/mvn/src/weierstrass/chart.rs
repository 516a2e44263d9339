//! Sample charts and their derivative operators.
//!
//! Periodic charts differentiate spectrally; open charts use 4th-order
//! finite differences (centered inside, one-sided of the same order at the
//! two outermost samples).

use num_complex::Complex64;

use super::WeierstrassError;
use crate::spectral::{Grid, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartKind {
    Periodic,
    Open,
}

impl ChartKind {
    pub fn name(self) -> &'static str {
        match self {
            ChartKind::Periodic => "periodic",
            ChartKind::Open => "open",
        }
    }

    pub fn from_name(name: &str) -> Option<ChartKind> {
        match name {
            "periodic" => Some(ChartKind::Periodic),
            "open" => Some(ChartKind::Open),
            _ => None,
        }
    }
}

/// Samples stay this many nodes away from open edges to count as interior.
pub const EDGE_MARGIN: usize = 2;

/// Square sample chart over `[x_min, x_max] × [y_min, y_max]`. Samples are
/// row-major over `(x, y)`: index `j·n + k` sits at `(x_j, y_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    pub kind: ChartKind,
    pub n: usize,
    pub extent: [f64; 4],
    /// Restricts integrals and residual norms to `|z| ≤ radius`.
    pub disk: Option<f64>,
}

impl Chart {
    pub fn open(n: usize, extent: [f64; 4]) -> Result<Chart, WeierstrassError> {
        if n < 2 {
            return Err(WeierstrassError::BadChart(format!("open charts need n ≥ 2 (got {n})")));
        }
        let [x0, x1, y0, y1] = extent;
        if !(x1 > x0) || !(y1 > y0) || extent.iter().any(|v| !v.is_finite()) {
            return Err(WeierstrassError::BadChart(format!("empty extent {extent:?}")));
        }
        Ok(Chart {
            kind: ChartKind::Open,
            n,
            extent,
            disk: None,
        })
    }

    /// Periodic chart on `[0, length)²`.
    pub fn periodic(n: usize, length: f64) -> Result<Chart, WeierstrassError> {
        Grid::new(n, length).map_err(|e| WeierstrassError::BadChart(e.to_string()))?;
        Ok(Chart {
            kind: ChartKind::Periodic,
            n,
            extent: [0.0, length, 0.0, length],
            disk: None,
        })
    }

    pub fn with_disk(mut self, radius: f64) -> Chart {
        self.disk = Some(radius);
        self
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Larger side of the extent.
    pub fn span(&self) -> f64 {
        (self.extent[1] - self.extent[0]).max(self.extent[3] - self.extent[2])
    }

    pub fn hx(&self) -> f64 {
        self.step(self.extent[1] - self.extent[0])
    }

    pub fn hy(&self) -> f64 {
        self.step(self.extent[3] - self.extent[2])
    }

    fn step(&self, span: f64) -> f64 {
        match self.kind {
            ChartKind::Periodic => span / self.n as f64,
            ChartKind::Open => span / (self.n - 1) as f64,
        }
    }

    pub fn node(&self, idx: usize) -> (f64, f64) {
        let (j, k) = (idx / self.n, idx % self.n);
        (
            self.extent[0] + j as f64 * self.hx(),
            self.extent[2] + k as f64 * self.hy(),
        )
    }

    pub fn sample<T>(&self, f: impl Fn(f64, f64) -> T) -> Vec<T> {
        (0..self.len())
            .map(|i| {
                let (x, y) = self.node(i);
                f(x, y)
            })
            .collect()
    }

    /// Spectral grid of a periodic chart.
    pub fn grid(&self) -> Option<Grid> {
        match self.kind {
            ChartKind::Periodic => Grid::new(self.n, self.extent[1] - self.extent[0]).ok(),
            ChartKind::Open => None,
        }
    }

    fn in_disk(&self, idx: usize) -> bool {
        match self.disk {
            None => true,
            Some(r) => {
                let (x, y) = self.node(idx);
                x * x + y * y <= r * r
            }
        }
    }

    /// Whether sample `idx` enters residual norms: inside the disk and, on
    /// open charts, at least [`EDGE_MARGIN`] nodes from every edge.
    pub fn is_active(&self, idx: usize) -> bool {
        if !self.in_disk(idx) {
            return false;
        }
        match self.kind {
            ChartKind::Periodic => true,
            ChartKind::Open => {
                let (j, k) = (idx / self.n, idx % self.n);
                let lo = EDGE_MARGIN;
                let hi = self.n.saturating_sub(EDGE_MARGIN + 1);
                (lo..=hi).contains(&j) && (lo..=hi).contains(&k)
            }
        }
    }

    /// Quadrature weights (trapezoid on open charts) times the disk mask.
    pub fn weights(&self) -> Vec<f64> {
        let (hx, hy) = (self.hx(), self.hy());
        (0..self.len())
            .map(|i| {
                if !self.in_disk(i) {
                    return 0.0;
                }
                let mut w = hx * hy;
                if self.kind == ChartKind::Open {
                    let (j, k) = (i / self.n, i % self.n);
                    if j == 0 || j == self.n - 1 {
                        w *= 0.5;
                    }
                    if k == 0 || k == self.n - 1 {
                        w *= 0.5;
                    }
                }
                w
            })
            .collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights().iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub(crate) fn require_derivatives(&self) -> Result<(), WeierstrassError> {
        if self.kind == ChartKind::Open && self.n < 6 {
            return Err(WeierstrassError::BadChart(format!(
                "finite differences need n ≥ 6 (got {})",
                self.n
            )));
        }
        Ok(())
    }

    /// Max-norm over active samples.
    pub fn active_max(&self, v: impl Iterator<Item = f64>) -> f64 {
        v.enumerate()
            .filter(|(i, _)| self.is_active(*i))
            .fold(0.0, |m, (_, x)| m.max(x.abs()))
    }

    fn spectral(&self, f: &[Complex64], sym: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
        let grid = self.grid().expect("periodic chart");
        let field = crate::spectral::ComplexField::new(grid, f.to_vec()).expect("sample count");
        Spectrum::forward(&field).apply_symbol(sym).inverse().into_samples()
    }

    /// `∂f/∂x`.
    pub fn dx(&self, f: &[Complex64]) -> Vec<Complex64> {
        match self.kind {
            ChartKind::Periodic => self.spectral(f, |kx, _| Complex64::new(0.0, kx)),
            ChartKind::Open => fd_axis(f, self.n, self.n, 1, self.hx(), first_diff),
        }
    }

    /// `∂f/∂y`.
    pub fn dy(&self, f: &[Complex64]) -> Vec<Complex64> {
        match self.kind {
            ChartKind::Periodic => self.spectral(f, |_, ky| Complex64::new(0.0, ky)),
            ChartKind::Open => fd_axis(f, self.n, 1, self.n, self.hy(), first_diff),
        }
    }

    pub fn dxx(&self, f: &[Complex64]) -> Vec<Complex64> {
        match self.kind {
            ChartKind::Periodic => self.spectral(f, |kx, _| Complex64::new(-kx * kx, 0.0)),
            ChartKind::Open => fd_axis(f, self.n, self.n, 1, self.hx(), second_diff),
        }
    }

    pub fn dyy(&self, f: &[Complex64]) -> Vec<Complex64> {
        match self.kind {
            ChartKind::Periodic => self.spectral(f, |_, ky| Complex64::new(-ky * ky, 0.0)),
            ChartKind::Open => fd_axis(f, self.n, 1, self.n, self.hy(), second_diff),
        }
    }

    pub fn dxy(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.dy(&self.dx(f))
    }

    /// `∂f = (f_x − i f_y)/2`.
    pub fn dz(&self, f: &[Complex64]) -> Vec<Complex64> {
        combine(&self.dx(f), &self.dy(f), -1.0)
    }

    /// `∂̄f = (f_x + i f_y)/2`.
    pub fn dzbar(&self, f: &[Complex64]) -> Vec<Complex64> {
        combine(&self.dx(f), &self.dy(f), 1.0)
    }

    /// `∂²f = (f_xx − 2i f_xy − f_yy)/4`.
    pub fn dz2(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (a, b, c) = (self.dxx(f), self.dxy(f), self.dyy(f));
        (0..a.len())
            .map(|i| (a[i] - Complex64::new(0.0, 2.0) * b[i] - c[i]) / 4.0)
            .collect()
    }

    /// `∂∂̄f = (f_xx + f_yy)/4`.
    pub fn laplace4(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (a, c) = (self.dxx(f), self.dyy(f));
        a.iter().zip(&c).map(|(a, c)| (a + c) / 4.0).collect()
    }
}

fn combine(fx: &[Complex64], fy: &[Complex64], sign: f64) -> Vec<Complex64> {
    fx.iter()
        .zip(fy)
        .map(|(a, b)| (a + Complex64::new(0.0, sign) * b) / 2.0)
        .collect()
}

pub fn lift(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

type Stencil = fn(&[Complex64], usize, f64) -> Complex64;

/// Applies a 1-D stencil along one axis. `stride` steps along the axis,
/// `other` steps between the lines.
fn fd_axis(f: &[Complex64], n: usize, stride: usize, other: usize, h: f64, st: Stencil) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..n {
        let base = l * other;
        for (i, v) in line.iter_mut().enumerate() {
            *v = f[base + i * stride];
        }
        for i in 0..n {
            out[base + i * stride] = st(&line, i, h);
        }
    }
    out
}

fn first_diff(f: &[Complex64], i: usize, h: f64) -> Complex64 {
    let n = f.len();
    let d = 12.0 * h;
    if i >= 2 && i + 2 < n {
        (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / d
    } else if i == 0 {
        (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / d
    } else if i == 1 {
        (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / d
    } else if i == n - 1 {
        (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / d
    } else {
        (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / d
    }
}

fn second_diff(f: &[Complex64], i: usize, h: f64) -> Complex64 {
    let n = f.len();
    let d = 12.0 * h * h;
    if i >= 2 && i + 2 < n {
        (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / d
    } else if i == 0 {
        (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]) / d
    } else if i == 1 {
        (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) / d
    } else if i == n - 1 {
        (45.0 * f[n - 1] - 154.0 * f[n - 2] + 214.0 * f[n - 3] - 156.0 * f[n - 4] + 61.0 * f[n - 5]
            - 10.0 * f[n - 6])
            / d
    } else {
        (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4] - 6.0 * f[n - 5] + f[n - 6]) / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn stencils_are_exact_on_quartics() {
        let ch = Chart::open(9, [-1.0, 2.0, 0.0, 1.0]).unwrap();
        let f = ch.sample(|x, y| c(x.powi(4) - 2.0 * x * x * y + y.powi(3)));
        let fx = ch.sample(|x, y| c(4.0 * x.powi(3) - 4.0 * x * y));
        let fyy = ch.sample(|_, y| c(6.0 * y));
        let fxx = ch.sample(|x, y| c(12.0 * x * x - 4.0 * y));
        let err = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err(&ch.dx(&f), &fx) < 1e-12);
        assert!(err(&ch.dyy(&f), &fyy) < 1e-11);
        assert!(err(&ch.dxx(&f), &fxx) < 1e-11);
    }

    #[test]
    fn wirtinger_on_open_chart() {
        let ch = Chart::open(8, [-1.0, 1.0, -1.0, 1.0]).unwrap();
        // f = z̄²: ∂f = 0, ∂̄f = 2z̄
        let f = ch.sample(|x, y| Complex64::new(x, -y).powi(2));
        assert!(ch.dz(&f).iter().all(|v| v.norm() < 1e-12));
        let g = ch.dzbar(&f);
        let want = ch.sample(|x, y| 2.0 * Complex64::new(x, -y));
        assert!(g.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn periodic_derivatives_are_spectral() {
        let ch = Chart::periodic(16, 2.0 * std::f64::consts::PI).unwrap();
        let f = ch.sample(|x, y| c((2.0 * x + y).sin()));
        let fx = ch.sample(|x, y| c(2.0 * (2.0 * x + y).cos()));
        assert!(ch.dx(&f).iter().zip(&fx).all(|(a, b)| (a - b).norm() < 1e-13));
    }

    #[test]
    fn trapezoid_weights_and_disk() {
        let ch = Chart::open(11, [-1.0, 1.0, -1.0, 1.0]).unwrap();
        let one = vec![1.0; ch.len()];
        assert!((ch.integrate(&one) - 4.0).abs() < 1e-14);
        let disk = ch.with_disk(0.5);
        assert!(disk.integrate(&one) < 1.0);
        assert!(!disk.is_active(0));
        assert!(ch.is_active(5 * 11 + 5));
        assert!(!ch.is_active(11 + 5));
    }

    #[test]
    fn rejects_bad_charts() {
        assert!(Chart::open(1, [0.0, 1.0, 0.0, 1.0]).is_err());
        assert!(Chart::open(4, [1.0, 1.0, 0.0, 1.0]).is_err());
        assert!(Chart::periodic(7, 1.0).is_err());
        assert!(Chart::open(4, [0.0, 1.0, 0.0, 1.0]).unwrap().require_derivatives().is_err());
    }
}
