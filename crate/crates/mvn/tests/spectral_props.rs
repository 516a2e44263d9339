//! Invariants of the periodic spectral layer.

use mvn::algebra::Wirtinger;
use mvn::spectral::{
    dbar_inverse, integrate, product, wirtinger, ComplexField, Grid, Spectrum,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// Field with random coefficients on modes `|mx|, |my| ≤ band`.
fn band_limited(grid: Grid, band: i64, coeffs: &[(f64, f64)]) -> ComplexField {
    let mut s = Spectrum::zeros(grid);
    let n = grid.n();
    let mut it = coeffs.iter().cycle();
    for j in 0..n {
        for k in 0..n {
            if grid.mode(j).abs() <= band && grid.mode(k).abs() <= band {
                let (a, b) = it.next().unwrap();
                s.modes_mut()[j * n + k] = Complex64::new(*a, *b);
            }
        }
    }
    s.inverse()
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forward_inverse_round_trip(c in coeffs(), len in 0.5..20.0f64) {
        let g = Grid::new(16, len).unwrap();
        let f = band_limited(g, 7, &c);
        let back = Spectrum::forward(&f).inverse();
        prop_assert!(back.max_diff(&f) <= 1e-13 * f.max_abs().max(1e-300));
    }

    #[test]
    fn wirtinger_derivatives_commute(c in coeffs()) {
        let g = Grid::standard(16).unwrap();
        let f = band_limited(g, 5, &c);
        let a = wirtinger(&wirtinger(&f, Wirtinger::Dz, 1).unwrap(), Wirtinger::Dzbar, 2).unwrap();
        let b = wirtinger(&wirtinger(&f, Wirtinger::Dzbar, 2).unwrap(), Wirtinger::Dz, 1).unwrap();
        prop_assert!(a.max_diff(&b) <= 1e-12 * a.max_abs().max(1e-300));
    }

    #[test]
    fn dbar_inverse_undoes_dbar_up_to_the_mean(c in coeffs()) {
        let g = Grid::standard(16).unwrap();
        let f = band_limited(g, 6, &c);
        let u = dbar_inverse(&wirtinger(&f, Wirtinger::Dzbar, 1).unwrap()).unwrap();
        let expect = f.map(|v| v - f.mean());
        prop_assert!(u.max_diff(&expect) <= 1e-12 * f.max_abs().max(1e-300));
    }

    #[test]
    fn leibniz_rule_on_resolved_products(c in coeffs(), d in coeffs()) {
        // both factors within n/4 so the product is resolved exactly
        let g = Grid::standard(32).unwrap();
        let f = band_limited(g, 7, &c);
        let h = band_limited(g, 7, &d);
        let fh = product(&f, &h, false).unwrap();
        let lhs = wirtinger(&fh, Wirtinger::Dz, 1).unwrap();
        let df = wirtinger(&f, Wirtinger::Dz, 1).unwrap();
        let dh = wirtinger(&h, Wirtinger::Dz, 1).unwrap();
        let rhs = &product(&df, &h, false).unwrap() + &product(&f, &dh, false).unwrap();
        prop_assert!(lhs.max_diff(&rhs) <= 1e-11 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn total_derivatives_integrate_to_zero(c in coeffs(), order in 1u32..=4) {
        let g = Grid::standard(16).unwrap();
        let f = band_limited(g, 5, &c);
        let d = wirtinger(&f, Wirtinger::Dz, order).unwrap();
        prop_assert!(integrate(&d).norm() <= 1e-11 * d.max_abs().max(1.0));
    }

    #[test]
    fn product_is_commutative(c in coeffs(), d in coeffs(), dealias in any::<bool>()) {
        let g = Grid::standard(16).unwrap();
        let f = band_limited(g, 7, &c);
        let h = band_limited(g, 7, &d);
        let a = product(&f, &h, dealias).unwrap();
        let b = product(&h, &f, dealias).unwrap();
        prop_assert!(a.max_diff(&b) <= 1e-14 * a.max_abs().max(1.0));
    }
}

#[test]
fn nonzero_mean_is_a_gauge_obstruction() {
    let g = Grid::standard(8).unwrap();
    let f = ComplexField::from_fn(g, |x, _| Complex64::new(1.0 + x.sin(), 0.0));
    let e = dbar_inverse(&f).unwrap_err();
    assert!(e.to_string().starts_with("gauge obstruction"), "{e}");
}
