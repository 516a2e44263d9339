//! Rewrite rules for the nonlocal generators and the normal form.
//!
//! The four rules are
//!
//! ```text
//! ∂̄ω → 2p∂p
//! ∂̄ζ → 2pω∂p + p²∂ω − 2∂p∂²p
//! ∂ω̄ → 2p∂̄p
//! ∂ζ̄ → 2pω̄∂̄p + p²∂̄ω̄ − 2∂̄p∂̄²p
//! ```
//!
//! applied under any further differentiation. In normal form `ω, ζ` carry
//! only `∂` and `ω̄, ζ̄` only `∂̄`; `p` carries both.

use alloc::vec::Vec;

use crate::poly::{Coeff, DiffPoly, Wirtinger};
use crate::symbol::{DerivSymbol, Generator};

fn sym(g: Generator, a: u32, b: u32) -> DerivSymbol {
    DerivSymbol::new(g, a, b)
}

fn term(c: i64, factors: &[DerivSymbol]) -> DiffPoly {
    let mut f = factors.to_vec();
    f.sort_unstable();
    let mut out = DiffPoly::zero();
    out.add_term(f, crate::poly::ratio(c, 1));
    out
}

/// Right-hand side of the rule that removes the first offending derivative
/// from `g`: `∂̄ω`, `∂̄ζ`, `∂ω̄` or `∂ζ̄`. Returns `None` for `p`.
pub fn rule_image(g: Generator) -> Option<DiffPoly> {
    use Generator::*;
    let p = sym(P, 0, 0);
    match g {
        P => None,
        Omega => Some(term(2, &[p, sym(P, 1, 0)])),
        Zeta => {
            let w = sym(Omega, 0, 0);
            let mut out = term(2, &[p, w, sym(P, 1, 0)]);
            out += &term(1, &[p, p, sym(Omega, 1, 0)]);
            out += &term(-2, &[sym(P, 1, 0), sym(P, 2, 0)]);
            Some(out)
        }
        OmegaBar | ZetaBar => rule_image(g.conj()).map(|q| q.conj()),
    }
}

/// Normal form of the single symbol `s`.
pub fn expand_symbol(s: DerivSymbol) -> DiffPoly {
    if s.is_canonical() {
        return DiffPoly::raw_symbol(s);
    }
    let image = rule_image(s.generator).expect("p symbols are always canonical");
    // (forward steps, extra steps): ω-side loses one ∂̄, ω̄-side loses one ∂.
    let (dz, dzbar) = if s.generator.is_holomorphic_side() {
        (s.a, s.b - 1)
    } else {
        (s.a - 1, s.b)
    };
    let mut out = image;
    for _ in 0..dz {
        out = derive_canonical(&out, Wirtinger::Dz);
    }
    for _ in 0..dzbar {
        out = derive_canonical(&out, Wirtinger::Dzbar);
    }
    out
}

fn bump(s: DerivSymbol, dir: Wirtinger) -> DerivSymbol {
    match dir {
        Wirtinger::Dz => DerivSymbol::new(s.generator, s.a + 1, s.b),
        Wirtinger::Dzbar => DerivSymbol::new(s.generator, s.a, s.b + 1),
    }
}

/// Leibniz rule on a normalized polynomial, rewriting each new symbol.
pub(crate) fn derive_canonical(poly: &DiffPoly, dir: Wirtinger) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for (factors, c) in poly.terms() {
        for i in 0..factors.len() {
            if i > 0 && factors[i] == factors[i - 1] {
                continue;
            }
            let mult = factors[i..].iter().take_while(|s| **s == factors[i]).count();
            let mut rest: Vec<DerivSymbol> = Vec::with_capacity(factors.len() - 1);
            rest.extend_from_slice(&factors[..i]);
            rest.extend_from_slice(&factors[i + 1..]);
            let mut rest_poly = DiffPoly::zero();
            rest_poly.add_term(rest, c * Coeff::from_integer((mult as i64).into()));
            let ds = expand_symbol(bump(factors[i], dir));
            out += &(&rest_poly * &ds);
        }
    }
    out
}

/// Canonical form of `poly`.
pub fn normalize(poly: &DiffPoly) -> DiffPoly {
    if poly.is_normalized() {
        return poly.clone();
    }
    let mut out = DiffPoly::zero();
    for (factors, c) in poly.terms() {
        let mut acc = DiffPoly::constant(c.clone());
        for s in factors {
            acc = &acc * &expand_symbol(*s);
        }
        out += &acc;
    }
    out
}

/// Order in which single rewrite steps are applied by [`normalize_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Expand every symbol in one pass ([`normalize`]).
    Eager,
    /// One rule application at a time, leftmost offending symbol first.
    Leftmost,
    /// One rule application at a time, rightmost offending symbol first.
    Rightmost,
}

/// Leibniz rule without rewriting: only bumps derivative orders.
pub fn derive_raw(poly: &DiffPoly, dir: Wirtinger) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for (factors, c) in poly.terms() {
        for i in 0..factors.len() {
            let mut f = factors.to_vec();
            f[i] = bump(f[i], dir);
            f.sort_unstable();
            out.add_term(f, c.clone());
        }
    }
    out
}

/// One rewrite step on a symbol: strips one offending derivative through
/// its rule and re-applies the remaining derivatives without rewriting.
fn step_symbol(s: DerivSymbol) -> DiffPoly {
    let image = rule_image(s.generator).expect("offending symbol has a rule");
    let (dz, dzbar) = if s.generator.is_holomorphic_side() {
        (s.a, s.b - 1)
    } else {
        (s.a - 1, s.b)
    };
    let mut out = image;
    for _ in 0..dzbar {
        out = derive_raw(&out, Wirtinger::Dzbar);
    }
    for _ in 0..dz {
        out = derive_raw(&out, Wirtinger::Dz);
    }
    out
}

/// Normalizes by the chosen rule-application order. All strategies yield
/// the same result (confluence).
pub fn normalize_with(poly: &DiffPoly, strategy: Strategy) -> DiffPoly {
    if strategy == Strategy::Eager {
        return normalize(poly);
    }
    let mut cur = poly.clone();
    loop {
        let offending: Vec<(Vec<DerivSymbol>, Coeff, usize)> = cur
            .terms()
            .filter_map(|(f, c)| {
                let pos = match strategy {
                    Strategy::Leftmost => f.iter().position(|s| !s.is_canonical()),
                    _ => f.iter().rposition(|s| !s.is_canonical()),
                };
                pos.map(|i| (f.to_vec(), c.clone(), i))
            })
            .collect();
        let pick = match strategy {
            Strategy::Leftmost => offending.first(),
            _ => offending.last(),
        };
        let Some((factors, c, i)) = pick.cloned() else {
            return cur;
        };
        let mut rest = factors.clone();
        let s = rest.remove(i);
        let mut removed = DiffPoly::zero();
        removed.add_term(factors, c.clone());
        cur -= &removed;
        let mut rest_poly = DiffPoly::zero();
        rest_poly.add_term(rest, c);
        cur += &(&rest_poly * &step_symbol(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use Generator::*;

    #[test]
    fn dbar_omega_rule() {
        let q = DiffPoly::generator(Omega).db();
        assert_eq!(q.to_string(), "2*p*d(p)");
    }

    #[test]
    fn dbar_squared_omega() {
        let q = DiffPoly::raw_symbol(DerivSymbol::new(Omega, 0, 2)).normalize();
        assert_eq!(q.to_string(), "2*p*d(db(p)) + 2*db(p)*d(p)");
    }

    #[test]
    fn dbar_zeta_rule() {
        let q = DiffPoly::generator(Zeta).db();
        assert_eq!(q.to_string(), "p^2*d(w) + 2*p*d(p)*w - 2*d(p)*d(p,2)");
    }

    #[test]
    fn conjugate_rules() {
        let q = DiffPoly::generator(OmegaBar).d();
        assert_eq!(q.to_string(), "2*p*db(p)");
        let z = DiffPoly::generator(ZetaBar).d();
        assert_eq!(z, DiffPoly::generator(Zeta).db().conj());
    }

    #[test]
    fn mixed_derivative_of_zeta_goes_through_omega_rule() {
        // ∂̄ζ₍₁,₁₎ contains ∂̄∂ω which must be rewritten too.
        let q = DiffPoly::raw_symbol(DerivSymbol::new(Zeta, 1, 1)).normalize();
        assert!(q.is_normalized());
        let alt = normalize_with(
            &DiffPoly::raw_symbol(DerivSymbol::new(Zeta, 1, 1)),
            Strategy::Leftmost,
        );
        assert_eq!(q, alt);
    }

    #[test]
    fn normalize_is_idempotent_on_example() {
        let q = DiffPoly::raw_symbol(DerivSymbol::new(ZetaBar, 2, 1))
            * DiffPoly::raw_symbol(DerivSymbol::new(Omega, 1, 2));
        let n = q.normalize();
        assert_eq!(n.normalize(), n);
    }
}
