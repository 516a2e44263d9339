//! Differential polynomials with exact rational coefficients.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::rewrite;
use crate::symbol::{DerivSymbol, Generator};

/// Exact rational coefficient.
pub type Coeff = BigRational;

/// Builds the rational `num/den`.
pub fn ratio(num: i64, den: i64) -> Coeff {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Direction of a Wirtinger derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Wirtinger {
    /// `∂ = (∂x − i∂y)/2`
    Dz,
    /// `∂̄ = (∂x + i∂y)/2`
    Dzbar,
}

impl Wirtinger {
    pub fn conj(self) -> Wirtinger {
        match self {
            Wirtinger::Dz => Wirtinger::Dzbar,
            Wirtinger::Dzbar => Wirtinger::Dz,
        }
    }
}

/// A single term: coefficient times a sorted product of derivative symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Coeff,
    pub factors: Vec<DerivSymbol>,
}

impl Monomial {
    pub fn new(coeff: Coeff, mut factors: Vec<DerivSymbol>) -> Self {
        factors.sort_unstable();
        Monomial { coeff, factors }
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }
}

/// Sum of monomials, kept collected and sorted by factor multiset.
///
/// A `DiffPoly` may hold non-canonical symbols such as `∂̄ω` when built with
/// [`DiffPoly::raw_symbol`]; [`DiffPoly::normalize`] removes them. All other
/// constructors and the derivative operations produce normal form.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffPoly {
    terms: BTreeMap<Vec<DerivSymbol>, Coeff>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        DiffPoly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        let mut out = DiffPoly::zero();
        out.add_term(Vec::new(), c);
        out
    }

    pub fn integer(n: i64) -> Self {
        DiffPoly::constant(ratio(n, 1))
    }

    /// The bare generator `g`.
    pub fn generator(g: Generator) -> Self {
        DiffPoly::raw_symbol(DerivSymbol::plain(g))
    }

    /// `∂ᵃ∂̄ᵇ g`, normalized.
    pub fn symbol(s: DerivSymbol) -> Self {
        rewrite::expand_symbol(s)
    }

    /// `∂ᵃ∂̄ᵇ g` stored as-is, without applying the rewrite rules.
    pub fn raw_symbol(s: DerivSymbol) -> Self {
        let mut out = DiffPoly::zero();
        out.add_term(alloc::vec![s], Coeff::one());
        out
    }

    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(iter: I) -> Self {
        let mut out = DiffPoly::zero();
        for m in iter {
            let mut f = m.factors;
            f.sort_unstable();
            out.add_term(f, m.coeff);
        }
        out
    }

    /// Adds `c · Π factors`; `factors` must already be sorted.
    pub(crate) fn add_term(&mut self, factors: Vec<DerivSymbol>, c: Coeff) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(factors) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[DerivSymbol], &Coeff)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms
            .iter()
            .map(|(f, c)| Monomial {
                coeff: c.clone(),
                factors: f.clone(),
            })
            .collect()
    }

    /// Coefficient of the given (sorted) factor multiset.
    pub fn coeff_of(&self, factors: &[DerivSymbol]) -> Coeff {
        self.terms.get(factors).cloned().unwrap_or_else(Coeff::zero)
    }

    /// True if `self` contains `c · Π factors` as one of its monomials.
    pub fn contains_term(&self, c: &Coeff, factors: &[DerivSymbol]) -> bool {
        let mut f = factors.to_vec();
        f.sort_unstable();
        self.terms.get(&f) == Some(c)
    }

    pub fn generators(&self) -> impl Iterator<Item = Generator> + '_ {
        self.terms.keys().flat_map(|f| f.iter().map(|s| s.generator))
    }

    pub fn is_normalized(&self) -> bool {
        self.terms.keys().all(|f| f.iter().all(DerivSymbol::is_canonical))
    }

    pub fn scale(&self, c: &Coeff) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut out = DiffPoly::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Applies the rewrite rules and returns the canonical form.
    pub fn normalize(&self) -> DiffPoly {
        rewrite::normalize(self)
    }

    /// Canonical derivative in direction `dir`.
    pub fn derive(&self, dir: Wirtinger) -> DiffPoly {
        if self.is_normalized() {
            rewrite::derive_canonical(self, dir)
        } else {
            rewrite::derive_canonical(&self.normalize(), dir)
        }
    }

    /// `∂`, normalized.
    pub fn d(&self) -> DiffPoly {
        self.derive(Wirtinger::Dz)
    }

    /// `∂̄`, normalized.
    pub fn db(&self) -> DiffPoly {
        self.derive(Wirtinger::Dzbar)
    }

    /// `∂ⁱ∂̄ʲ`, normalized.
    pub fn d_db(&self, i: u32, j: u32) -> DiffPoly {
        let mut out = self.normalize();
        for _ in 0..i {
            out = rewrite::derive_canonical(&out, Wirtinger::Dz);
        }
        for _ in 0..j {
            out = rewrite::derive_canonical(&out, Wirtinger::Dzbar);
        }
        out
    }

    /// Formal conjugation: swaps `∂ ↔ ∂̄`, `ω ↔ ω̄`, `ζ ↔ ζ̄`, fixes `p` and
    /// rational coefficients.
    pub fn conj(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (f, c) in &self.terms {
            let mut g: Vec<DerivSymbol> = f.iter().map(DerivSymbol::conj).collect();
            g.sort_unstable();
            out.add_term(g, c.clone());
        }
        out
    }
}

fn merge_sorted(a: &[DerivSymbol], b: &[DerivSymbol]) -> Vec<DerivSymbol> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl<'a> Add<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (k, v) in &rhs.terms {
            self.add_term(k.clone(), v.clone());
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (k, v) in &rhs.terms {
            self.add_term(k.clone(), -v.clone());
        }
    }
}

impl<'a> Sub<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(mut self, rhs: DiffPoly) -> DiffPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

impl<'a> Mul<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &rhs.terms {
                out.add_term(merge_sorted(fa, fb), ca * cb);
            }
        }
        out
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

impl fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Writes a factor list as `p^2*d(p)*w`.
fn write_factors(f: &mut fmt::Formatter<'_>, factors: &[DerivSymbol]) -> fmt::Result {
    let mut i = 0;
    let mut first = true;
    while i < factors.len() {
        let mut j = i;
        while j < factors.len() && factors[j] == factors[i] {
            j += 1;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        write!(f, "{}", factors[i])?;
        if j - i > 1 {
            write!(f, "^{}", j - i)?;
        }
        i = j;
    }
    Ok(())
}

impl fmt::Display for DiffPoly {
    /// Canonical one-line form in the expression grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (factors, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (idx, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write_factors(f, factors)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use Generator::*;

    fn p() -> DiffPoly {
        DiffPoly::generator(P)
    }

    #[test]
    fn product_collects_and_sorts() {
        let w = DiffPoly::generator(Omega);
        let q = &(&w * &p()) * &p();
        assert_eq!(q.to_string(), "p^2*w");
        let s = &q - &(&(&p() * &w) * &p());
        assert!(s.is_zero());
    }

    #[test]
    fn derivative_is_leibniz() {
        let p2 = &p() * &p();
        assert_eq!(p2.d().to_string(), "2*p*d(p)");
        assert_eq!(p2.d_db(1, 1).to_string(), "2*p*d(db(p)) + 2*db(p)*d(p)");
    }

    #[test]
    fn display_of_signs_and_fractions() {
        let q = &p().scale(&ratio(3, 2)) - &DiffPoly::integer(1);
        assert_eq!(q.to_string(), "-1 + 3/2*p");
        assert_eq!(DiffPoly::zero().to_string(), "0");
        assert_eq!((-p()).to_string(), "-p");
    }

    #[test]
    fn conj_swaps_sides() {
        let w = DiffPoly::generator(Omega).d();
        assert_eq!(w.conj().to_string(), "db(wb)");
        assert_eq!(w.conj().conj(), w);
    }
}
