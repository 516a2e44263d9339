//! Generators of the differential ring and their formal derivatives.

use core::fmt;

/// A generator of the differential polynomial ring.
///
/// The declaration order is the monomial order used for canonical output:
/// `p < ω < ζ < ω̄ < ζ̄`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    /// The real potential of the Dirac operator.
    P,
    /// Nonlocal field with `∂̄ω = ∂(p²)`.
    Omega,
    /// Nonlocal field with `∂̄ζ = ∂(p²ω − (∂p)²)`.
    Zeta,
    /// Conjugate of `ω`, with `∂ω̄ = ∂̄(p²)`.
    OmegaBar,
    /// Conjugate of `ζ`.
    ZetaBar,
}

impl Generator {
    pub const ALL: [Generator; 5] = [
        Generator::P,
        Generator::Omega,
        Generator::Zeta,
        Generator::OmegaBar,
        Generator::ZetaBar,
    ];

    /// Identifier in the expression grammar.
    pub fn name(self) -> &'static str {
        match self {
            Generator::P => "p",
            Generator::Omega => "w",
            Generator::Zeta => "zt",
            Generator::OmegaBar => "wb",
            Generator::ZetaBar => "ztb",
        }
    }

    pub fn from_name(name: &str) -> Option<Generator> {
        Generator::ALL.into_iter().find(|g| g.name() == name)
    }

    /// Formal complex conjugation. `p` is real.
    pub fn conj(self) -> Generator {
        match self {
            Generator::P => Generator::P,
            Generator::Omega => Generator::OmegaBar,
            Generator::Zeta => Generator::ZetaBar,
            Generator::OmegaBar => Generator::Omega,
            Generator::ZetaBar => Generator::Zeta,
        }
    }

    /// True for `ω, ζ`: these carry no `∂̄` in canonical form.
    pub fn is_holomorphic_side(self) -> bool {
        matches!(self, Generator::Omega | Generator::Zeta)
    }

    /// True for `ω̄, ζ̄`: these carry no `∂` in canonical form.
    pub fn is_antiholomorphic_side(self) -> bool {
        matches!(self, Generator::OmegaBar | Generator::ZetaBar)
    }
}

/// `∂ᵃ∂̄ᵇ g` for a generator `g`.
///
/// Field order gives the documented total order (generator, then `a`, then `b`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivSymbol {
    pub generator: Generator,
    pub a: u32,
    pub b: u32,
}

impl DerivSymbol {
    pub const fn new(generator: Generator, a: u32, b: u32) -> Self {
        DerivSymbol { generator, a, b }
    }

    pub const fn plain(generator: Generator) -> Self {
        DerivSymbol::new(generator, 0, 0)
    }

    /// Whether the symbol is allowed in normal form.
    pub fn is_canonical(&self) -> bool {
        if self.generator.is_holomorphic_side() {
            self.b == 0
        } else if self.generator.is_antiholomorphic_side() {
            self.a == 0
        } else {
            true
        }
    }

    pub fn conj(&self) -> DerivSymbol {
        DerivSymbol::new(self.generator.conj(), self.b, self.a)
    }
}

impl fmt::Display for DerivSymbol {
    /// Prints in the expression grammar: `p`, `d(p,3)`, `d(db(p,2))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(
            f: &mut fmt::Formatter<'_>,
            op: &str,
            k: u32,
            inner: &dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result,
        ) -> fmt::Result {
            write!(f, "{op}(")?;
            inner(f)?;
            if k > 1 {
                write!(f, ",{k}")?;
            }
            f.write_str(")")
        }
        let name = self.generator.name();
        let inner_b = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if self.b == 0 {
                f.write_str(name)
            } else {
                wrap(f, "db", self.b, &|f| f.write_str(name))
            }
        };
        if self.a == 0 {
            inner_b(f)
        } else {
            wrap(f, "d", self.a, &inner_b)
        }
    }
}
