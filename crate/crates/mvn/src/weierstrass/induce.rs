//! Reconstruction of an immersion from spinors by contour integration.

use num_complex::Complex64;

use super::{check_closed, ChartKind, ClosedResiduals, Immersion, SpinorField, WeierstrassError, TOL_CLOSED};

/// Period vectors of a periodic chart: the change of `X` over one cycle
/// along `x` (at the basepoint row) and along `y` (at the basepoint
/// column).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Periods {
    pub along_x: [f64; 3],
    pub along_y: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct InducedSurface {
    /// Integrated along x first, then y; zero at the basepoint.
    pub immersion: Immersion,
    /// Max over samples of `|X_xfirst − X_yfirst|` relative to
    /// `max|X_xfirst|`.
    pub path_residual: f64,
    pub closed: ClosedResiduals,
    /// Set when `path_residual` exceeds ten times the closedness bound.
    pub inconsistent: bool,
    /// Present on periodic charts.
    pub periods: Option<Periods>,
}

/// Cumulative trapezoid along a line of `len` samples, from `start`.
fn cumulative(len: usize, start: usize, h: f64, f: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for i in start + 1..len {
        out[i] = out[i - 1] + (f(i - 1) + f(i)) * (h / 2.0);
    }
    for i in (0..start).rev() {
        out[i] = out[i + 1] - (f(i) + f(i + 1)) * (h / 2.0);
    }
    out
}

/// Integrates `dG = gx dx + gy dy` from `(j0, k0)`, returning the x-first
/// and y-first results.
fn integrate_paths(
    n: usize,
    (j0, k0): (usize, usize),
    (hx, hy): (f64, f64),
    gx: &[Complex64],
    gy: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut xfirst = vec![Complex64::new(0.0, 0.0); n * n];
    let mut yfirst = vec![Complex64::new(0.0, 0.0); n * n];
    let row = cumulative(n, j0, hx, |j| gx[j * n + k0]);
    for j in 0..n {
        let col = cumulative(n, k0, hy, |k| gy[j * n + k]);
        for k in 0..n {
            xfirst[j * n + k] = row[j] + col[k];
        }
    }
    let col = cumulative(n, k0, hy, |k| gy[j0 * n + k]);
    for k in 0..n {
        let row = cumulative(n, j0, hx, |j| gx[j * n + k]);
        for j in 0..n {
            yfirst[j * n + k] = col[k] + row[j];
        }
    }
    (xfirst, yfirst)
}

pub fn induce_surface(psi: &SpinorField, basepoint: (usize, usize)) -> Result<InducedSurface, WeierstrassError> {
    induce_surface_with(psi, basepoint, TOL_CLOSED)
}

/// Integrates `d(X₂ − iX₁) = ψ̄₁²dz − ψ̄₂²dz̄` and
/// `dX₃ = −(ψ₂ψ̄₁dz + ψ₁ψ̄₂dz̄)` with the cumulative trapezoid rule.
/// Periodic charts are integrated over the fundamental domain without
/// unwrapping.
pub fn induce_surface_with(
    psi: &SpinorField,
    basepoint: (usize, usize),
    tol_closed: f64,
) -> Result<InducedSurface, WeierstrassError> {
    let ch = psi.chart;
    let n = ch.n;
    if basepoint.0 >= n || basepoint.1 >= n {
        return Err(WeierstrassError::BadChart(format!("basepoint {basepoint:?} outside the chart")));
    }
    let closed = check_closed(psi)?;
    if !(closed.max() <= tol_closed) {
        return Err(WeierstrassError::FormsNotClosed {
            r_plus: closed.r_plus,
            r_3: closed.r_3,
            tol: tol_closed,
        });
    }
    let i = Complex64::new(0.0, 1.0);
    let len = ch.len();
    let mut gx = Vec::with_capacity(len);
    let mut gy = Vec::with_capacity(len);
    let mut hx = Vec::with_capacity(len);
    let mut hy = Vec::with_capacity(len);
    for s in 0..len {
        let (p1, p2) = (psi.psi1[s], psi.psi2[s]);
        // dz = dx + i dy, dz̄ = dx − i dy
        let a = p1.conj() * p1.conj();
        let b = -p2.conj() * p2.conj();
        let c = -p2 * p1.conj();
        let e = -p1 * p2.conj();
        gx.push(a + b);
        gy.push(i * (a - b));
        hx.push(c + e);
        hy.push(i * (c - e));
    }
    let steps = (ch.hx(), ch.hy());
    let (gxf, gyf) = integrate_paths(n, basepoint, steps, &gx, &gy);
    let (hxf, hyf) = integrate_paths(n, basepoint, steps, &hx, &hy);
    let to_x = |g: Complex64, h: Complex64| [-g.im, g.re, h.re];
    let mut coords = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut diff = 0.0f64;
    let mut size = 0.0f64;
    for s in 0..len {
        let a = to_x(gxf[s], hxf[s]);
        let b = to_x(gyf[s], hyf[s]);
        for c in 0..3 {
            coords[c][s] = a[c];
        }
        diff = diff.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt());
        size = size.max((a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt());
    }
    let path_residual = if size == 0.0 { diff } else { diff / size };
    let periods = (ch.kind == ChartKind::Periodic).then(|| {
        let (j0, k0) = basepoint;
        let gsum = |f: &dyn Fn(usize) -> usize, gv: &[Complex64], h: f64| -> Complex64 {
            (0..n).map(|t| gv[f(t)]).sum::<Complex64>() * h
        };
        let along_row = |t: usize| t * n + k0;
        let along_col = |t: usize| j0 * n + t;
        Periods {
            along_x: to_x(gsum(&along_row, &gx, steps.0), gsum(&along_row, &hx, steps.0)),
            along_y: to_x(gsum(&along_col, &gy, steps.1), gsum(&along_col, &hy, steps.1)),
        }
    });
    Ok(InducedSurface {
        immersion: Immersion { chart: ch, x: coords },
        path_residual,
        closed,
        inconsistent: path_residual > 10.0 * tol_closed,
        periods,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{builtin, extract_spinors, Chart};
    use super::*;

    #[test]
    fn constant_spinors_give_a_plane() {
        let ch = Chart::open(8, [-1.0, 1.0, -1.0, 1.0]).unwrap();
        let s = SpinorField::new(ch, vec![Complex64::new(1.0, 0.0); 64], vec![Complex64::new(0.0, 0.0); 64]).unwrap();
        let out = induce_surface(&s, (0, 0)).unwrap();
        // X₂ − iX₁ = z − z₀, so X₂ = x − x₀ and X₁ = −(y − y₀)
        let (x0, y0) = ch.node(0);
        for idx in 0..64 {
            let (x, y) = ch.node(idx);
            let p = out.immersion.point(idx);
            assert!((p[0] + (y - y0)).abs() < 1e-14);
            assert!((p[1] - (x - x0)).abs() < 1e-14);
            assert_eq!(p[2], 0.0);
        }
        assert!(out.path_residual < 1e-15);
        assert!(out.periods.is_none());
    }

    #[test]
    fn enneper_round_trip_is_minimal() {
        let b = builtin("enneper").unwrap();
        let s = extract_spinors(&b.immersion).unwrap();
        let c = b.immersion.chart.n / 2;
        let out = induce_surface(&s, (c, c)).unwrap();
        let fc = super::super::frame_and_curvature(&out.immersion).unwrap();
        let h = out.immersion.chart.active_max(fc.h.iter().copied());
        assert!(h < 1e-6, "{h}");
    }

    #[test]
    fn periodic_chart_reports_periods() {
        // ψ₁ = e^{iπ/4}: the plane X = (x, y, 0) with x-period 2π
        let ch = Chart::periodic(8, 2.0 * std::f64::consts::PI).unwrap();
        let e = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let s = SpinorField::new(ch, vec![e; 64], vec![Complex64::new(0.0, 0.0); 64]).unwrap();
        let out = induce_surface(&s, (0, 0)).unwrap();
        let per = out.periods.unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        assert!((per.along_x[0] - tau).abs() < 1e-12 && per.along_x[1].abs() < 1e-12);
        assert!((per.along_y[1] - tau).abs() < 1e-12 && per.along_y[0].abs() < 1e-12);
    }

    #[test]
    fn unclosed_forms_are_rejected() {
        let ch = Chart::open(8, [-1.0, 1.0, -1.0, 1.0]).unwrap();
        let psi1 = ch.sample(|x, y| Complex64::new(1.0 + x * y, 0.0));
        let s = SpinorField::new(ch, psi1, vec![Complex64::new(0.0, 0.0); 64]).unwrap();
        let e = induce_surface(&s, (0, 0)).unwrap_err();
        assert!(e.to_string().starts_with("forms not closed"));
    }
}
