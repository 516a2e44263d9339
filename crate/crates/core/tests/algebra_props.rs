use mvn_core::operator::Mat2;
use mvn_core::poly::ratio;
use mvn_core::rewrite::{normalize_with, Strategy as Order};
use mvn_core::{parse_poly, DerivSymbol, DiffPoly, Generator, MatrixOperator, Monomial};
use proptest::prelude::*;

fn generator() -> impl Strategy<Value = Generator> {
    prop::sample::select(Generator::ALL.to_vec())
}

/// Any symbol, canonical or not.
fn raw_symbol(max_order: u32) -> impl Strategy<Value = DerivSymbol> {
    (generator(), 0..=max_order, 0..=max_order).prop_map(|(g, a, b)| DerivSymbol::new(g, a, b))
}

fn canonical_symbol() -> impl Strategy<Value = DerivSymbol> {
    raw_symbol(2).prop_map(|s| {
        if s.generator.is_holomorphic_side() {
            DerivSymbol::new(s.generator, s.a, 0)
        } else if s.generator.is_antiholomorphic_side() {
            DerivSymbol::new(s.generator, 0, s.b)
        } else {
            s
        }
    })
}

fn coeff() -> impl Strategy<Value = mvn_core::Coeff> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn poly_from(symbols: impl Strategy<Value = DerivSymbol>) -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((coeff(), prop::collection::vec(symbols, 0..=2)), 0..=3).prop_map(
        |terms| {
            DiffPoly::from_monomials(
                terms
                    .into_iter()
                    .map(|(c, f)| Monomial::new(c, f)),
            )
        },
    )
}

fn raw_poly() -> impl Strategy<Value = DiffPoly> {
    poly_from(raw_symbol(2))
}

fn canonical_poly() -> impl Strategy<Value = DiffPoly> {
    poly_from(canonical_symbol())
}

/// Terms built around `∂̄ᵇω`, `∂̄ᵇζ` and their conjugates with `b ≤ 3`.
fn nonlocal_poly() -> impl Strategy<Value = DiffPoly> {
    let sym = (
        prop::sample::select(vec![
            Generator::Omega,
            Generator::Zeta,
            Generator::OmegaBar,
            Generator::ZetaBar,
            Generator::P,
        ]),
        0u32..=1,
        0u32..=3,
    )
        .prop_map(|(g, a, b)| {
            if g.is_antiholomorphic_side() {
                DerivSymbol::new(g, b, a)
            } else {
                DerivSymbol::new(g, a, b)
            }
        });
    poly_from(sym)
}

fn small_operator() -> impl Strategy<Value = MatrixOperator> {
    prop::collection::vec(
        (
            0u32..=1,
            0u32..=1,
            canonical_poly(),
            canonical_poly(),
            canonical_poly(),
            canonical_poly(),
        ),
        1..=2,
    )
    .prop_map(|terms| {
        let mut op = MatrixOperator::zero();
        for (a, b, e11, e12, e21, e22) in terms {
            op.add_term((a, b), Mat2::new(e11, e12, e21, e22));
        }
        op
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_is_idempotent(q in raw_poly()) {
        let n = q.normalize();
        prop_assert!(n.is_normalized());
        prop_assert_eq!(n.normalize(), n);
    }

    #[test]
    fn rewriting_is_confluent(q in nonlocal_poly()) {
        let eager = normalize_with(&q, Order::Eager);
        prop_assert_eq!(&normalize_with(&q, Order::Leftmost), &eager);
        prop_assert_eq!(&normalize_with(&q, Order::Rightmost), &eager);
    }

    #[test]
    fn derivatives_commute(q in canonical_poly()) {
        prop_assert_eq!(q.d().db(), q.db().d());
    }

    #[test]
    fn derivative_is_a_derivation(f in canonical_poly(), g in canonical_poly()) {
        let lhs = (&f * &g).d();
        let rhs = &(&f.d() * &g) + &(&f * &g.d());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn conj_commutes_with_derivatives(q in canonical_poly()) {
        prop_assert_eq!(q.d().conj(), q.conj().db());
        prop_assert_eq!(q.conj().conj(), q);
    }

    #[test]
    fn printed_polynomials_parse_back(q in raw_poly()) {
        let n = q.normalize();
        prop_assert_eq!(parse_poly(&n.to_string()).unwrap(), n);
    }

    #[test]
    fn leibniz_matches_repeated_differentiation(
        f in canonical_poly(), g in canonical_poly(), a in 0u32..=3, b in 0u32..=2
    ) {
        let op = MatrixOperator::derivative(a, b)
            .compose(&MatrixOperator::multiplication(Mat2::scalar(f.clone())));
        let applied = op.apply(&[g.clone(), DiffPoly::zero()]);
        prop_assert_eq!(&applied[0], &(&f * &g).d_db(a, b));
        prop_assert!(applied[1].is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn compose_is_associative(
        a in small_operator(), b in small_operator(), c in small_operator()
    ) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
    }

    #[test]
    fn commutator_is_antisymmetric(a in small_operator(), b in small_operator()) {
        prop_assert_eq!(a.commutator(&b), -&b.commutator(&a));
    }

    #[test]
    fn commutator_satisfies_jacobi(
        a in small_operator(), b in small_operator(), c in small_operator()
    ) {
        let j = &(&a.commutator(&b.commutator(&c)) + &b.commutator(&c.commutator(&a)))
            + &c.commutator(&a.commutator(&b));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn conj_transform_is_an_involution(a in small_operator()) {
        prop_assert_eq!(a.conj_transform().conj_transform(), a);
    }

    #[test]
    fn conj_transform_is_multiplicative(a in small_operator(), b in small_operator()) {
        prop_assert_eq!(
            a.compose(&b).conj_transform(),
            a.conj_transform().compose(&b.conj_transform())
        );
    }
}
