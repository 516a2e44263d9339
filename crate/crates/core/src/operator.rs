//! 2×2 matrix differential operators `Σ M₍ₐ,ᵦ₎ ∂ᵃ∂̄ᵇ` with differential
//! polynomial entries. Coefficients stand to the left of the derivatives.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::poly::{Coeff, DiffPoly};

/// 2×2 matrix of differential polynomials, `m[row][col]`, 0-based.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub m: [[DiffPoly; 2]; 2],
}

impl Mat2 {
    pub fn new(e11: DiffPoly, e12: DiffPoly, e21: DiffPoly, e22: DiffPoly) -> Self {
        Mat2 {
            m: [[e11, e12], [e21, e22]],
        }
    }

    pub fn zero() -> Self {
        Mat2::default()
    }

    pub fn identity() -> Self {
        Mat2::scalar(DiffPoly::one())
    }

    pub fn scalar(s: DiffPoly) -> Self {
        Mat2::new(s.clone(), DiffPoly::zero(), DiffPoly::zero(), s)
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(DiffPoly::is_zero)
    }

    /// `Some(s)` when the matrix is `s·I`.
    pub fn as_scalar(&self) -> Option<&DiffPoly> {
        (self.m[0][1].is_zero() && self.m[1][0].is_zero() && self.m[0][0] == self.m[1][1])
            .then_some(&self.m[0][0])
    }

    /// Entry by 1-based indices, matching the `12`/`21` naming.
    pub fn get(&self, row: usize, col: usize) -> &DiffPoly {
        &self.m[row - 1][col - 1]
    }

    pub fn set(&mut self, row: usize, col: usize, value: DiffPoly) {
        self.m[row - 1][col - 1] = value;
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> Mat2 {
        Mat2 {
            m: [
                [f(&self.m[0][0]), f(&self.m[0][1])],
                [f(&self.m[1][0]), f(&self.m[1][1])],
            ],
        }
    }

    pub fn term_count(&self) -> usize {
        self.m.iter().flatten().map(DiffPoly::len).sum()
    }

    pub fn normalize(&self) -> Mat2 {
        self.map(DiffPoly::normalize)
    }
}

impl<'a> Add<&'a Mat2> for &'a Mat2 {
    type Output = Mat2;
    fn add(self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            m: [
                [&self.m[0][0] + &rhs.m[0][0], &self.m[0][1] + &rhs.m[0][1]],
                [&self.m[1][0] + &rhs.m[1][0], &self.m[1][1] + &rhs.m[1][1]],
            ],
        }
    }
}

impl<'a> Mul<&'a Mat2> for &'a Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: &Mat2) -> Mat2 {
        let e = |i: usize, j: usize| {
            &(&self.m[i][0] * &rhs.m[0][j]) + &(&self.m[i][1] * &rhs.m[1][j])
        };
        Mat2 {
            m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `(∂-order, ∂̄-order)` of an operator term.
pub type Order = (u32, u32);

/// Finite sum `Σ M₍ₐ,ᵦ₎ ∂ᵃ∂̄ᵇ`. Zero matrices are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct MatrixOperator {
    terms: BTreeMap<Order, Mat2>,
}

fn binomial(n: u32, k: u32) -> Coeff {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Coeff::from_integer(acc)
}

impl MatrixOperator {
    pub fn zero() -> Self {
        MatrixOperator::default()
    }

    pub fn identity() -> Self {
        MatrixOperator::term((0, 0), Mat2::identity())
    }

    /// `M ∂ᵃ∂̄ᵇ`.
    pub fn term(order: Order, m: Mat2) -> Self {
        let mut out = MatrixOperator::zero();
        out.add_term(order, m);
        out
    }

    /// `∂ᵃ∂̄ᵇ` times the identity matrix.
    pub fn derivative(a: u32, b: u32) -> Self {
        MatrixOperator::term((a, b), Mat2::identity())
    }

    /// Multiplication by the matrix `m`.
    pub fn multiplication(m: Mat2) -> Self {
        MatrixOperator::term((0, 0), m)
    }

    /// The Dirac-type operator `[[∂, −p], [p, ∂̄]]`.
    pub fn dirac() -> Self {
        use crate::symbol::Generator;
        let p = DiffPoly::generator(Generator::P);
        let mut out = MatrixOperator::zero();
        let one = DiffPoly::one;
        let zero = DiffPoly::zero;
        out.add_term((1, 0), Mat2::new(one(), zero(), zero(), zero()));
        out.add_term((0, 1), Mat2::new(zero(), zero(), zero(), one()));
        out.add_term((0, 0), Mat2::new(zero(), -&p, p, zero()));
        out
    }

    pub fn add_term(&mut self, order: Order, m: Mat2) {
        if m.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&order) {
            Some(old) => &old + &m,
            None => m,
        };
        if !sum.is_zero() {
            self.terms.insert(order, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, order: Order) -> Mat2 {
        self.terms.get(&order).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Order, &Mat2)> {
        self.terms.iter()
    }

    /// Total number of monomials over all entries of all terms.
    pub fn term_count(&self) -> usize {
        self.terms.values().map(Mat2::term_count).sum()
    }

    pub fn normalize(&self) -> MatrixOperator {
        let mut out = MatrixOperator::zero();
        for (k, m) in &self.terms {
            out.add_term(*k, m.normalize());
        }
        out
    }

    /// Highest total order `a + b` with a nonzero coefficient.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    /// Operator composition `self ∘ rhs`, by the generalized Leibniz rule
    /// `(F∂ᵃ∂̄ᵇ)(G∂ᶜ∂̄ᵈ) = Σ C(a,i)C(b,j) F·(∂ⁱ∂̄ʲG) ∂^(a−i+c) ∂̄^(b−j+d)`.
    pub fn compose(&self, rhs: &MatrixOperator) -> MatrixOperator {
        let mut out = MatrixOperator::zero();
        for (&(a, b), f) in &self.terms {
            for (&(c, d), g) in &rhs.terms {
                for i in 0..=a {
                    for j in 0..=b {
                        let dg = g.map(|e| e.d_db(i, j));
                        if dg.is_zero() {
                            continue;
                        }
                        let scale = binomial(a, i) * binomial(b, j);
                        let prod = (f * &dg).map(|e| e.scale(&scale));
                        out.add_term((a - i + c, b - j + d), prod);
                    }
                }
            }
        }
        out
    }

    /// `[self, rhs] = self∘rhs − rhs∘self`.
    pub fn commutator(&self, rhs: &MatrixOperator) -> MatrixOperator {
        &self.compose(rhs) - &rhs.compose(self)
    }

    /// `J · conj(A) · J⁻¹` with `J = [[0, −1], [1, 0]]`, where `conj` swaps
    /// `∂ ↔ ∂̄`, `ω ↔ ω̄`, `ζ ↔ ζ̄` and fixes `p`. Maps the `(+)` half of
    /// a deformation operator to its `(−)` half.
    pub fn conj_transform(&self) -> MatrixOperator {
        let mut out = MatrixOperator::zero();
        for (&(a, b), m) in &self.terms {
            let c = m.map(DiffPoly::conj);
            // J [[x, y], [z, w]] J⁻¹ = [[w, −z], [−y, x]]
            let t = Mat2::new(
                c.m[1][1].clone(),
                -&c.m[1][0],
                -&c.m[0][1],
                c.m[0][0].clone(),
            );
            out.add_term((b, a), t);
        }
        out
    }

    /// Scales every coefficient by `c`.
    pub fn scale(&self, c: &Coeff) -> MatrixOperator {
        if c.is_zero() {
            return MatrixOperator::zero();
        }
        let mut out = MatrixOperator::zero();
        for (k, m) in &self.terms {
            out.add_term(*k, m.map(|e| e.scale(c)));
        }
        out
    }

    pub fn pow(&self, k: u32) -> MatrixOperator {
        let mut out = MatrixOperator::identity();
        for _ in 0..k {
            out = out.compose(self);
        }
        out
    }

    /// Applies the operator to a column of polynomials.
    pub fn apply(&self, v: &[DiffPoly; 2]) -> [DiffPoly; 2] {
        let mut out = [DiffPoly::zero(), DiffPoly::zero()];
        for (&(a, b), m) in &self.terms {
            let dv = [v[0].d_db(a, b), v[1].d_db(a, b)];
            for (r, slot) in out.iter_mut().enumerate() {
                *slot += &(&m.m[r][0] * &dv[0]);
                *slot += &(&m.m[r][1] * &dv[1]);
            }
        }
        out
    }

    /// Orders in ascending `(a, b)`.
    pub fn orders(&self) -> Vec<Order> {
        self.terms.keys().copied().collect()
    }
}

impl<'a> Add<&'a MatrixOperator> for &'a MatrixOperator {
    type Output = MatrixOperator;
    fn add(self, rhs: &MatrixOperator) -> MatrixOperator {
        let mut out = self.clone();
        for (k, m) in &rhs.terms {
            out.add_term(*k, m.clone());
        }
        out
    }
}

impl<'a> Sub<&'a MatrixOperator> for &'a MatrixOperator {
    type Output = MatrixOperator;
    fn sub(self, rhs: &MatrixOperator) -> MatrixOperator {
        self + &(-rhs)
    }
}

impl Neg for &MatrixOperator {
    type Output = MatrixOperator;
    fn neg(self) -> MatrixOperator {
        let mut out = MatrixOperator::zero();
        for (k, m) in &self.terms {
            out.add_term(*k, m.map(|e| -e));
        }
        out
    }
}

impl fmt::Display for MatrixOperator {
    /// Highest order first: `[[1, 0], [0, 1]]*D^5 + [[0, -5*d(p)], [0, 5*w]]*D^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut keys: Vec<&Order> = self.terms.keys().collect();
        keys.sort_by_key(|k| core::cmp::Reverse((k.0 + k.1, k.0)));
        for (idx, k) in keys.into_iter().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}", self.terms[k])?;
            for (sym, n) in [("D", k.0), ("Db", k.1)] {
                match n {
                    0 => {}
                    1 => write!(f, "*{sym}")?,
                    _ => write!(f, "*{sym}^{n}")?,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MatrixOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Generator;
    use alloc::string::ToString;

    fn scalar_mult(s: DiffPoly) -> MatrixOperator {
        MatrixOperator::multiplication(Mat2::scalar(s))
    }

    #[test]
    fn leibniz_first_order() {
        let p = DiffPoly::generator(Generator::P);
        let lhs = MatrixOperator::derivative(1, 0).compose(&scalar_mult(p.clone()));
        let mut rhs = MatrixOperator::term((1, 0), Mat2::scalar(p.clone()));
        rhs.add_term((0, 0), Mat2::scalar(p.d()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn leibniz_second_order() {
        let f = DiffPoly::generator(Generator::Omega);
        let lhs = MatrixOperator::derivative(2, 0).compose(&scalar_mult(f.clone()));
        let mut rhs = MatrixOperator::term((2, 0), Mat2::scalar(f.clone()));
        rhs.add_term((1, 0), Mat2::scalar(f.d().scale(&crate::poly::ratio(2, 1))));
        rhs.add_term((0, 0), Mat2::scalar(f.d_db(2, 0)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn partials_commute() {
        let d = MatrixOperator::derivative(1, 0);
        let db = MatrixOperator::derivative(0, 1);
        assert!(d.commutator(&db).is_zero());
    }

    #[test]
    fn dbar_omega_commutator() {
        let w = DiffPoly::generator(Generator::Omega);
        let c = MatrixOperator::derivative(0, 1).commutator(&scalar_mult(w));
        assert_eq!(c.to_string(), "[[2*p*d(p), 0], [0, 2*p*d(p)]]");
    }

    #[test]
    fn dirac_is_fixed_by_conj_transform() {
        let l = MatrixOperator::dirac();
        assert_eq!(l.conj_transform(), l);
        assert_eq!(l.to_string(), "[[1, 0], [0, 0]]*D + [[0, 0], [0, 1]]*Db + [[0, -p], [p, 0]]");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), crate::poly::ratio(10, 1));
        assert_eq!(binomial(4, 0), crate::poly::ratio(1, 1));
    }
}
