//! Frame, curvature and the geometric Willmore functional.

use num_complex::Complex64;

use super::{derivative_floor, lift, relative, Chart, Immersion, SpinorField, WeierstrassError};

/// Frame and curvature data of an immersion.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameCurvature {
    pub chart: Chart,
    /// Conformal factor, `λ² = 2Σ|∂X_j|²`.
    pub lambda: Vec<f64>,
    pub e1: Vec<[f64; 3]>,
    pub e2: Vec<[f64; 3]>,
    /// `e₁ × e₂`.
    pub e3: Vec<[f64; 3]>,
    /// `H = (2/λ²)⟨∂∂̄X, e₃⟩`.
    pub h: Vec<f64>,
    /// `φ = (2/λ²)⟨∂²X, e₃⟩`.
    pub phi: Vec<Complex64>,
    /// `K = H² − |φ|²`.
    pub k: Vec<f64>,
}

impl FrameCurvature {
    /// Potential `p = λH/2`.
    pub fn potential(&self) -> Vec<f64> {
        self.lambda.iter().zip(&self.h).map(|(l, h)| l * h / 2.0).collect()
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn dot_c(v: [Complex64; 3], e: [f64; 3]) -> Complex64 {
    v[0] * e[0] + v[1] * e[1] + v[2] * e[2]
}

fn at(f: &[Vec<Complex64>; 3], i: usize) -> [Complex64; 3] {
    [f[0][i], f[1][i], f[2][i]]
}

/// Derivative fields shared by the curvature and residual computations.
struct Jets {
    xx: [Vec<Complex64>; 3],
    xy: [Vec<Complex64>; 3],
    dz: [Vec<Complex64>; 3],
    lap: [Vec<Complex64>; 3],
    dz2: [Vec<Complex64>; 3],
}

impl Jets {
    fn of(x: &Immersion) -> Jets {
        let ch = &x.chart;
        let c = [0, 1, 2].map(|j| lift(&x.x[j]));
        Jets {
            xx: [0, 1, 2].map(|j| ch.dx(&c[j])),
            xy: [0, 1, 2].map(|j| ch.dy(&c[j])),
            dz: [0, 1, 2].map(|j| ch.dz(&c[j])),
            lap: [0, 1, 2].map(|j| ch.laplace4(&c[j])),
            dz2: [0, 1, 2].map(|j| ch.dz2(&c[j])),
        }
    }
}

pub fn frame_and_curvature(x: &Immersion) -> Result<FrameCurvature, WeierstrassError> {
    let ch = x.chart;
    ch.require_derivatives()?;
    let jets = Jets::of(x);
    let n = ch.len();
    let lambda: Vec<f64> = (0..n)
        .map(|i| (2.0 * jets.dz.iter().map(|d| d[i].norm_sqr()).sum::<f64>()).sqrt())
        .collect();
    let lmax = lambda.iter().fold(0.0f64, |m, v| m.max(*v));
    if let Some(index) = (0..n).find(|&i| ch.is_active(i) && !(lambda[i] >= 1e-8 * lmax)) {
        return Err(WeierstrassError::DegenerateMetric { index });
    }
    let mut fc = FrameCurvature {
        chart: ch,
        lambda,
        e1: Vec::with_capacity(n),
        e2: Vec::with_capacity(n),
        e3: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        k: Vec::with_capacity(n),
    };
    for i in 0..n {
        let tx = at(&jets.xx, i).map(|v| v.re);
        let ty = at(&jets.xy, i).map(|v| v.re);
        let e1 = unit(tx);
        let e3 = unit(cross(tx, ty));
        let e2 = cross(e3, e1);
        let l2 = fc.lambda[i] * fc.lambda[i];
        let h = if l2 > 0.0 { 2.0 / l2 * dot_c(at(&jets.lap, i), e3).re } else { 0.0 };
        let phi = if l2 > 0.0 { dot_c(at(&jets.dz2, i), e3) * (2.0 / l2) } else { Complex64::new(0.0, 0.0) };
        fc.e1.push(e1);
        fc.e2.push(e2);
        fc.e3.push(e3);
        fc.h.push(h);
        fc.phi.push(phi);
        fc.k.push(h * h - phi.norm_sqr());
    }
    Ok(fc)
}

/// Relative residuals of `∂∂̄X = (λ²/2)He₃` and
/// `∂²X = ∂λ(e₁ − ie₂) + (λ²/2)φe₃`, componentwise over active samples.
pub fn structure_residuals(x: &Immersion, fc: &FrameCurvature) -> Result<(f64, f64), WeierstrassError> {
    let ch = &x.chart;
    ch.require_derivatives()?;
    let jets = Jets::of(x);
    let dl = ch.dz(&lift(&fc.lambda));
    let i_unit = Complex64::new(0.0, 1.0);
    let floor = derivative_floor(ch, &[&jets.dz[0], &jets.dz[1], &jets.dz[2]]);
    let mut eq1 = 0.0f64;
    let mut eq3 = 0.0f64;
    for c in 0..3 {
        let r1: Vec<Complex64> = (0..ch.len())
            .map(|i| jets.lap[c][i] - fc.lambda[i].powi(2) / 2.0 * fc.h[i] * fc.e3[i][c])
            .collect();
        let r3: Vec<Complex64> = (0..ch.len())
            .map(|i| {
                jets.dz2[c][i]
                    - dl[i] * (fc.e1[i][c] - i_unit * fc.e2[i][c])
                    - fc.phi[i] * (fc.lambda[i].powi(2) / 2.0 * fc.e3[i][c])
            })
            .collect();
        eq1 = eq1.max(relative(ch, &r1, &[&jets.lap[0], &jets.lap[1], &jets.lap[2]], floor));
        eq3 = eq3.max(relative(ch, &r3, &[&jets.dz2[0], &jets.dz2[1], &jets.dz2[2]], floor));
    }
    Ok((eq1, eq3))
}

/// Relative residuals of `∂̄(ψ₁/λ) = (φ̄/2)ψ₂` and `∂(ψ₂/λ) = −(φ/2)ψ₁`.
pub fn hopf_residuals(psi: &SpinorField, fc: &FrameCurvature) -> Result<(f64, f64), WeierstrassError> {
    let ch = &psi.chart;
    ch.require_derivatives()?;
    if fc.lambda.len() != ch.len() {
        return Err(WeierstrassError::ChartMismatch);
    }
    let q1: Vec<Complex64> = psi.psi1.iter().zip(&fc.lambda).map(|(v, l)| v / l).collect();
    let q2: Vec<Complex64> = psi.psi2.iter().zip(&fc.lambda).map(|(v, l)| v / l).collect();
    let a = ch.dzbar(&q1);
    let a_rhs: Vec<Complex64> = (0..ch.len()).map(|i| fc.phi[i].conj() / 2.0 * psi.psi2[i]).collect();
    let b = ch.dz(&q2);
    let b_rhs: Vec<Complex64> = (0..ch.len()).map(|i| -fc.phi[i] / 2.0 * psi.psi1[i]).collect();
    let ra: Vec<Complex64> = a.iter().zip(&a_rhs).map(|(x, y)| x - y).collect();
    let rb: Vec<Complex64> = b.iter().zip(&b_rhs).map(|(x, y)| x - y).collect();
    let floor = derivative_floor(ch, &[&q1, &q2]);
    Ok((
        relative(ch, &ra, &[&a, &a_rhs, &ch.dz(&q1)], floor),
        relative(ch, &rb, &[&b, &b_rhs, &ch.dzbar(&q2)], floor),
    ))
}

/// `∫(λ²/2)H² dx dy` over the chart (disk-masked when the chart has one).
pub fn willmore_geometric(fc: &FrameCurvature) -> f64 {
    let dens: Vec<f64> = fc
        .lambda
        .iter()
        .zip(&fc.h)
        .map(|(l, h)| l * l / 2.0 * h * h)
        .collect();
    fc.chart.integrate(&dens)
}

/// `2∫p² dx dy` with the same quadrature as [`willmore_geometric`].
pub fn willmore_from_p(chart: &Chart, p: &[f64]) -> f64 {
    2.0 * chart.integrate(&p.iter().map(|v| v * v).collect::<Vec<_>>())
}
