//! Spinor extraction, Dirac residual and closedness of the inducing forms.

use num_complex::Complex64;

use super::{conformality, derivative_floor, relative, Immersion, SpinorField, WeierstrassError, TOL_CONF};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ROUNDOFF: f64 = 1e-14;

/// Previous neighbor and linear prediction for sample `idx` of the
/// row-major sweep: along the row, or down the first column at a row
/// start. `None` for the first sample.
fn predict(out: &[Complex64], idx: usize, n: usize) -> Option<(Complex64, Complex64)> {
    let (j, k) = (idx / n, idx % n);
    Some(match (j, k) {
        (0, 0) => return None,
        (_, 0) if j >= 2 => (out[idx - n], 2.0 * out[idx - n] - out[idx - 2 * n]),
        (_, 0) => (out[idx - n], out[idx - n]),
        (_, 1) => (out[idx - 1], out[idx - 1]),
        _ => (out[idx - 1], 2.0 * out[idx - 1] - out[idx - 2]),
    })
}

fn nearer(root: Complex64, pred: Complex64) -> Complex64 {
    if (root - pred).norm() <= (root + pred).norm() {
        root
    } else {
        -root
    }
}

/// Square roots of `s` chosen by continuity along the row-major sweep.
///
/// Each sample takes the root nearer a linear extrapolation from the two
/// previous samples of its row (of the first column at a row start). The
/// first sample takes the principal root. Samples with `|s| ≤ tiny` are
/// set to zero.
fn continuous_sqrt(s: &[Complex64], n: usize, tiny: f64) -> Result<Vec<Complex64>, WeierstrassError> {
    let mut out = vec![ZERO; s.len()];
    for idx in 0..s.len() {
        if s[idx].norm() <= tiny {
            continue;
        }
        let root = s[idx].sqrt();
        out[idx] = match predict(&out, idx, n) {
            None => root,
            Some((prev, pred)) => {
                let pick = nearer(root, pred);
                let distance = (pick - pred).norm();
                if prev.norm() > 0.0 && distance > 0.5 * prev.norm() {
                    return Err(WeierstrassError::BranchDiscontinuity { index: idx, distance });
                }
                pick
            }
        };
    }
    Ok(out)
}

/// Spinors of a conformal immersion with the default conformality bound.
pub fn extract_spinors(x: &Immersion) -> Result<SpinorField, WeierstrassError> {
    extract_spinors_with(x, TOL_CONF)
}

/// `ψ₁ = (∂̄F)^{1/2}` by continuity; `ψ₂ = ±(−∂F)^{1/2}` with the sign
/// that best satisfies `ψ₂ψ̄₁ = −∂X₃`, falling back to continuity where
/// `ψ₁` vanishes.
pub fn extract_spinors_with(x: &Immersion, tol_conf: f64) -> Result<SpinorField, WeierstrassError> {
    let chart = x.chart;
    chart.require_derivatives()?;
    let d = x.dz();
    let residual = conformality(&chart, &d);
    if !(residual <= tol_conf) {
        return Err(WeierstrassError::NonConformal { residual, tol: tol_conf });
    }
    let f: Vec<Complex64> = (0..chart.len())
        .map(|k| Complex64::new(x.x[1][k], x.x[0][k]))
        .collect();
    let s1 = chart.dzbar(&f);
    let s2: Vec<Complex64> = chart.dz(&f).into_iter().map(|v| -v).collect();
    // squares at roundoff level of the metric are zero; their roots would
    // otherwise be of order sqrt(eps)
    let tiny = ROUNDOFF * s1.iter().chain(&s2).fold(0.0f64, |m, v| m.max(v.norm()));
    let psi1 = continuous_sqrt(&s1, chart.n, tiny)?;
    let dx3 = &d[2];
    let scale1 = psi1.iter().fold(0.0f64, |m, v| m.max(v.norm_sqr()));
    let mut psi2 = vec![ZERO; chart.len()];
    for k in 0..chart.len() {
        if s2[k].norm() <= tiny {
            continue;
        }
        let r = s2[k].sqrt();
        psi2[k] = if psi1[k].norm_sqr() > 1e-6 * scale1 {
            let plus = (r * psi1[k].conj() + dx3[k]).norm();
            let minus = (-r * psi1[k].conj() + dx3[k]).norm();
            if plus <= minus {
                r
            } else {
                -r
            }
        } else {
            predict(&psi2, k, chart.n).map_or(r, |(_, pred)| nearer(r, pred))
        };
    }
    Ok(SpinorField {
        chart,
        psi1,
        psi2,
    })
}

/// `max(‖∂ψ₁ − pψ₂‖, ‖∂̄ψ₂ + pψ₁‖)` relative to the largest spinor
/// derivative or potential term (at least `max|ψ|/span`), over active
/// samples.
pub fn dirac_residual(psi: &SpinorField, p: &[f64]) -> Result<f64, WeierstrassError> {
    let ch = &psi.chart;
    ch.require_derivatives()?;
    if p.len() != ch.len() {
        return Err(WeierstrassError::ChartMismatch);
    }
    let d1 = ch.dz(&psi.psi1);
    let db1 = ch.dzbar(&psi.psi1);
    let d2 = ch.dz(&psi.psi2);
    let db2 = ch.dzbar(&psi.psi2);
    let p_psi2: Vec<Complex64> = psi.psi2.iter().zip(p).map(|(v, q)| v * q).collect();
    let p_psi1: Vec<Complex64> = psi.psi1.iter().zip(p).map(|(v, q)| v * q).collect();
    let r1: Vec<Complex64> = d1.iter().zip(&p_psi2).map(|(a, b)| a - b).collect();
    let r2: Vec<Complex64> = db2.iter().zip(&p_psi1).map(|(a, b)| a + b).collect();
    let scales: [&[Complex64]; 6] = [&d1, &db1, &d2, &db2, &p_psi1, &p_psi2];
    let floor = derivative_floor(ch, &[&psi.psi1, &psi.psi2]);
    Ok(relative(ch, &r1, &scales, floor).max(relative(ch, &r2, &scales, floor)))
}

/// Closedness residuals of the inducing forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedResiduals {
    /// `‖∂(ψ₁²) + ∂̄(ψ₂²)‖`, relative.
    pub r_plus: f64,
    /// `‖∂̄(ψ₂ψ̄₁) − ∂(ψ₁ψ̄₂)‖`, relative.
    pub r_3: f64,
}

impl ClosedResiduals {
    pub fn max(&self) -> f64 {
        self.r_plus.max(self.r_3)
    }
}

pub fn check_closed(psi: &SpinorField) -> Result<ClosedResiduals, WeierstrassError> {
    let ch = &psi.chart;
    ch.require_derivatives()?;
    let sq1: Vec<Complex64> = psi.psi1.iter().map(|v| v * v).collect();
    let sq2: Vec<Complex64> = psi.psi2.iter().map(|v| v * v).collect();
    let a = ch.dz(&sq1);
    let b = ch.dzbar(&sq2);
    let r: Vec<Complex64> = a.iter().zip(&b).map(|(a, b)| a + b).collect();
    let floor = derivative_floor(ch, &[&sq1, &sq2]);
    let r_plus = relative(ch, &r, &[&a, &b, &ch.dzbar(&sq1), &ch.dz(&sq2)], floor);
    let m21: Vec<Complex64> = psi.psi2.iter().zip(&psi.psi1).map(|(a, b)| a * b.conj()).collect();
    let m12: Vec<Complex64> = psi.psi1.iter().zip(&psi.psi2).map(|(a, b)| a * b.conj()).collect();
    let c = ch.dzbar(&m21);
    let d = ch.dz(&m12);
    let r: Vec<Complex64> = c.iter().zip(&d).map(|(a, b)| a - b).collect();
    let r_3 = relative(ch, &r, &[&c, &d, &ch.dz(&m21), &ch.dzbar(&m12)], floor);
    Ok(ClosedResiduals { r_plus, r_3 })
}

#[cfg(test)]
mod tests {
    use super::super::{builtin, plane, sphere, Chart};
    use super::*;

    #[test]
    fn plane_spinors() {
        let x = plane(Chart::open(16, [-1.0, 1.0, -1.0, 1.0]).unwrap());
        let s = extract_spinors(&x).unwrap();
        let e = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!(s.psi1.iter().all(|v| (v - e).norm() < 1e-12));
        assert!(s.psi2.iter().all(|v| v.norm() < 1e-12));
        assert!(s.lambda().iter().all(|l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn non_conformal_input_is_rejected() {
        let x = Immersion::from_fn(Chart::open(16, [-1.0, 1.0, -1.0, 1.0]).unwrap(), |x, y| [2.0 * x, y, 0.0]);
        let e = extract_spinors(&x).unwrap_err();
        assert!(e.to_string().starts_with("non-conformal immersion"));
    }

    #[test]
    fn trivial_plane_forms_are_closed() {
        let ch = Chart::open(8, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let s = SpinorField::new(ch, vec![Complex64::new(1.0, 0.0); 64], vec![ZERO; 64]).unwrap();
        let r = check_closed(&s).unwrap();
        assert_eq!((r.r_plus, r.r_3), (0.0, 0.0));
    }

    #[test]
    fn sphere_lambda_on_a_fine_chart() {
        let ch = Chart::open(129, [-2.0, 2.0, -2.0, 2.0]).unwrap();
        let s = extract_spinors_with(&sphere(ch), 1e-4).unwrap();
        let err = ch.active_max(
            s.lambda()
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let (x, y) = ch.node(i);
                    l - 2.0 / (1.0 + x * x + y * y)
                }),
        );
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn enneper_spinors_solve_the_free_dirac_system() {
        let b = builtin("enneper").unwrap();
        let s = extract_spinors(&b.immersion).unwrap();
        let zero = vec![0.0; s.chart.len()];
        assert!(dirac_residual(&s, &zero).unwrap() < 1e-8);
    }

    #[test]
    fn branch_jump_is_reported() {
        // a sign flip of s between neighbors turns the root by 90°
        let mut s = vec![Complex64::new(1.0, 0.0); 64];
        s[2] = Complex64::new(-1.0, 0.0);
        assert!(matches!(
            continuous_sqrt(&s, 8, 0.0),
            Err(WeierstrassError::BranchDiscontinuity { .. })
        ));
    }
}
