//! The first two mVN flows, the n = 2 deformation operators, and exact
//! checks of the identities they satisfy.
//!
//! Sign convention for `B`: the operators below satisfy
//!
//! ```text
//! δL/δt = [A, L] − B∘L,      equivalently   [L, δ/δt − A] = B∘L,
//! ```
//!
//! so the compatibility residual is `δL/δt − [A, L] + B∘L`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::operator::{Mat2, MatrixOperator};
use crate::parse::{parse_operator, parse_poly};
use crate::poly::{ratio, DiffPoly};
use crate::symbol::Generator;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyError {
    /// Only the first and second flows are available.
    UnsupportedFlow(u32),
    /// The requested flux form does not exist for this flow.
    FormUnavailable { n: u32, form: FluxForm },
    UnknownEntry(String),
    ZeroEntry(String),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::UnsupportedFlow(n) => write!(f, "flow n={n} is not supported (flows 1 and 2 only)"),
            VerifyError::FormUnavailable { n, form } => {
                write!(f, "flux form {form:?} is not available for n={n}")
            }
            VerifyError::UnknownEntry(e) => write!(f, "unknown matrix entry '{e}'"),
            VerifyError::ZeroEntry(e) => write!(f, "matrix entry '{e}' is zero"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluxForm {
    /// Flux bracket written out in `p, ω, ζ`.
    Direct,
    /// Flux `∂⁴p² + V₁₂∂³p + W₁₂∂²p + X₁₂∂p + Z₁₂p` read off the operator.
    Simpler,
}

fn poly(text: &str) -> DiffPoly {
    parse_poly(text).expect("built-in expression parses")
}

fn mat(text: &str) -> Mat2 {
    parse_operator(text)
        .expect("built-in matrix parses")
        .coeff((0, 0))
}

/// `(+)`-part of the right-hand side `δp/δt⁺` of flow `n`.
pub fn flow_rhs_symbolic(n: u32) -> Result<DiffPoly, VerifyError> {
    match n {
        1 => Ok(poly("d(p,3) + 3*w*d(p) + 3/2*p*d(w)")),
        2 => Ok(poly(
            "d(p,5) + 5*w*d(p,3) + 15/2*d(w)*d(p,2) \
             + 5/2*d(p)*(2*w^2 + 3*d(w,2) + 2*zt) \
             + 5/2*p*d(w^2 + zt + d(w,2))",
        )),
        _ => Err(VerifyError::UnsupportedFlow(n)),
    }
}

/// Flux bracket `F` with `2p·δp/δt⁺ = ∂F`, in written-out form.
pub fn flux_direct(n: u32) -> Result<DiffPoly, VerifyError> {
    match n {
        1 => Ok(poly("d(p^2,2) - 3*d(p)^2 + 3*p^2*w")),
        2 => Ok(poly(
            "d(p^2,4) - 5*d(d(p)^2,2) + 5*d(p,2)^2 + 5*w*d(p^2,2) - 15*w*d(p)^2 \
             + 5/2*d(w)*d(p^2) + 5*p^2*(w^2 + zt + d(w,2))",
        )),
        _ => Err(VerifyError::UnsupportedFlow(n)),
    }
}

/// The named coefficient matrices of `A₂⁽⁺⁾ = ∂⁵ + V∂³ + W∂² + X∂ + Z` and
/// `B₂⁽⁺⁾ = Q∂³ + R∂² + S∂ + T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformationMatrices {
    pub v: Mat2,
    pub w: Mat2,
    pub x: Mat2,
    pub z: Mat2,
    pub q: Mat2,
    pub r: Mat2,
    pub s: Mat2,
    pub t: Mat2,
}

impl DeformationMatrices {
    /// Gauge `V₁₁ = W₁₁ = X₁₁ = 0` and vanishing constant part of `Z₁₁`.
    /// The `12` entries of `R, S, T` repeat those of `W, X, Z`.
    pub fn second_flow() -> Self {
        let v = mat("[[0, -5*d(p)], [0, 5*w]]");
        let w = mat("[[0, -5*d(p,2) + 5*p*w], [0, 15/2*d(w)]]");
        let x = mat(
            "[[0, 5/2*(p*d(w) - 2*w*d(p) - 2*d(p,3))], \
              [0, 5/2*(2*w^2 + 3*d(w,2) + 2*zt)]]",
        );
        let z = mat(
            "[[0, 5*(p*(w^2 + zt + d(w,2)) + w*d(p,2) + 1/2*d(p)*d(w))], \
              [0, 5/2*d(w^2 + zt + d(w,2))]]",
        );
        let q = mat("[[0, -5*d(p)], [5*d(p), 0]]");
        let mut r = mat("[[0, 0], [10*d(p,2) + 5*p*w, 0]]");
        r.set(1, 2, w.get(1, 2).clone());
        let mut s = mat("[[0, 0], [5/2*(3*p*d(w) + 6*w*d(p) + 4*d(p,3)), 0]]");
        s.set(1, 2, x.get(1, 2).clone());
        let mut t = mat(
            "[[0, 0], [5/2*p*(2*w^2 + 2*zt + 3*d(w,2)) + 15*w*d(p,2) \
              + 15*d(p)*d(w) + 5*d(p,4), 0]]",
        );
        t.set(1, 2, z.get(1, 2).clone());
        DeformationMatrices {
            v,
            w,
            x,
            z,
            q,
            r,
            s,
            t,
        }
    }

    fn entry_mut(&mut self, name: &str) -> Result<&mut DiffPoly, VerifyError> {
        let unknown = || VerifyError::UnknownEntry(name.to_string());
        let mut chars = name.chars();
        let letter = chars.next().ok_or_else(unknown)?.to_ascii_uppercase();
        let row = chars.next().and_then(|c| c.to_digit(10)).ok_or_else(unknown)? as usize;
        let col = chars.next().and_then(|c| c.to_digit(10)).ok_or_else(unknown)? as usize;
        if chars.next().is_some() || !(1..=2).contains(&row) || !(1..=2).contains(&col) {
            return Err(unknown());
        }
        let m = match letter {
            'V' => &mut self.v,
            'W' => &mut self.w,
            'X' => &mut self.x,
            'Z' => &mut self.z,
            'Q' => &mut self.q,
            'R' => &mut self.r,
            'S' => &mut self.s,
            'T' => &mut self.t,
            _ => return Err(unknown()),
        };
        Ok(&mut m.m[row - 1][col - 1])
    }

    /// Scales the named entry (e.g. `"V12"`) by 4/5; `−5∂p` becomes `−4∂p`.
    pub fn perturb(&mut self, name: &str) -> Result<(), VerifyError> {
        let e = self.entry_mut(name)?;
        if e.is_zero() {
            return Err(VerifyError::ZeroEntry(name.to_string()));
        }
        *e = e.scale(&ratio(4, 5));
        Ok(())
    }

    /// Replaces the named entry with zero.
    pub fn drop_entry(&mut self, name: &str) -> Result<(), VerifyError> {
        *self.entry_mut(name)? = DiffPoly::zero();
        Ok(())
    }

    pub fn a_plus(&self) -> MatrixOperator {
        let mut a = MatrixOperator::derivative(5, 0);
        for (k, m) in [(3, &self.v), (2, &self.w), (1, &self.x), (0, &self.z)] {
            a.add_term((k, 0), m.clone());
        }
        a
    }

    pub fn b_plus(&self) -> MatrixOperator {
        let mut b = MatrixOperator::zero();
        for (k, m) in [(3, &self.q), (2, &self.r), (1, &self.s), (0, &self.t)] {
            b.add_term((k, 0), m.clone());
        }
        b
    }

    pub fn assemble(&self) -> LaxTriple {
        LaxTriple {
            l: MatrixOperator::dirac(),
            a_plus: self.a_plus(),
            b_plus: self.b_plus(),
            flow_rhs_plus: flow_rhs_symbolic(2).expect("n=2 is available"),
        }
    }
}

/// `L`, the `(+)` halves of `A` and `B`, and `δp/δt⁺`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaxTriple {
    pub l: MatrixOperator,
    pub a_plus: MatrixOperator,
    pub b_plus: MatrixOperator,
    pub flow_rhs_plus: DiffPoly,
}

/// The second-flow triple with the published deformation matrices.
pub fn build_triple_n2() -> LaxTriple {
    DeformationMatrices::second_flow().assemble()
}

fn p() -> DiffPoly {
    DiffPoly::generator(Generator::P)
}

/// `δL/δt` for a given `ṗ`: only the off-diagonal potential entries move.
fn l_dot(pdot: &DiffPoly) -> MatrixOperator {
    MatrixOperator::multiplication(Mat2::new(
        DiffPoly::zero(),
        -pdot,
        pdot.clone(),
        DiffPoly::zero(),
    ))
}

impl LaxTriple {
    pub fn a_minus(&self) -> MatrixOperator {
        self.a_plus.conj_transform()
    }

    pub fn b_minus(&self) -> MatrixOperator {
        self.b_plus.conj_transform()
    }

    /// `δL/δt − [A, L] + B∘L` for the chosen half; zero for a valid triple.
    pub fn check_compatibility(&self, part: Part) -> MatrixOperator {
        let (a, b, pdot) = match part {
            Part::Plus => (
                self.a_plus.clone(),
                self.b_plus.clone(),
                self.flow_rhs_plus.clone(),
            ),
            Part::Minus => (self.a_minus(), self.b_minus(), self.flow_rhs_plus.conj()),
        };
        let lhs = l_dot(&pdot);
        let comm = a.commutator(&self.l);
        let bl = b.compose(&self.l);
        &(&lhs - &comm) + &bl
    }

    /// Residuals of the five `12`/`21` component equations of the
    /// compatibility condition, with `V, W, X, Z` read from `A₂⁽⁺⁾`.
    pub fn check_telescoping(&self) -> [DiffPoly; 5] {
        let v = self.a_plus.coeff((3, 0));
        let w = self.a_plus.coeff((2, 0));
        let x = self.a_plus.coeff((1, 0));
        let z = self.a_plus.coeff((0, 0));
        let p = p();
        let dp = |k: u32| p.d_db(k, 0);
        let c = |n: i64| DiffPoly::integer(n);
        let e1 = &(&c(5) * &dp(1)) + v.get(1, 2);
        let e2 = &(&(&(&c(10) * &dp(2)) + &v.get(1, 2).d()) - &(&p * v.get(2, 2))) + w.get(1, 2);
        let e3 = &(&(&(&c(10) * &dp(3)) + &w.get(1, 2).d()) - &(&p * w.get(2, 2))) + x.get(1, 2);
        let e4 = &(&(&(&c(5) * &dp(4)) + &x.get(1, 2).d()) - &(&p * x.get(2, 2))) + z.get(1, 2);
        let mut e5 = &(&c(2) * &dp(5)) + &z.get(1, 2).d();
        e5 += &(v.get(2, 2) * &dp(3));
        e5 += &(w.get(2, 2) * &dp(2));
        e5 += &(x.get(2, 2) * &dp(1));
        e5 -= &(&c(2) * &self.flow_rhs_plus);
        [e1, e2, e3, e4, e5]
    }

    /// `∂⁴p² + V₁₂∂³p + W₁₂∂²p + X₁₂∂p + Z₁₂p` from this triple's `A₂⁽⁺⁾`.
    pub fn flux_simpler(&self) -> DiffPoly {
        let p = p();
        let mut out = (&p * &p).d_db(4, 0);
        for k in 0..=3u32 {
            out += &(self.a_plus.coeff((k, 0)).get(1, 2) * &p.d_db(k, 0));
        }
        out
    }

    /// `2p·δp/δt⁺ − ∂F` for the second flow.
    pub fn check_flux(&self, form: FluxForm) -> DiffPoly {
        let flux = match form {
            FluxForm::Direct => flux_direct(2).expect("n=2 is available"),
            FluxForm::Simpler => self.flux_simpler(),
        };
        flux_residual(&self.flow_rhs_plus, &flux)
    }

    /// Difference of the two second-flow flux brackets.
    pub fn flux_forms_difference(&self) -> DiffPoly {
        &flux_direct(2).expect("n=2 is available") - &self.flux_simpler()
    }
}

fn flux_residual(rhs: &DiffPoly, flux: &DiffPoly) -> DiffPoly {
    let two_p = &DiffPoly::integer(2) * &p();
    &(&two_p * rhs) - &flux.d()
}

/// `2p·δp/δt⁺ − ∂F` for flow `n` with the second-flow operators.
pub fn check_flux(n: u32, form: FluxForm) -> Result<DiffPoly, VerifyError> {
    match (n, form) {
        (1, FluxForm::Direct) => Ok(flux_residual(&flow_rhs_symbolic(1)?, &flux_direct(1)?)),
        (1, FluxForm::Simpler) => Err(VerifyError::FormUnavailable { n, form }),
        (2, _) => Ok(build_triple_n2().check_flux(form)),
        _ => Err(VerifyError::UnsupportedFlow(n)),
    }
}

/// Residual of a single check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Residual {
    Poly(DiffPoly),
    Operator(MatrixOperator),
}

impl Residual {
    pub fn term_count(&self) -> usize {
        match self {
            Residual::Poly(p) => p.len(),
            Residual::Operator(op) => op.term_count(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.term_count() == 0
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residual::Poly(p) => write!(f, "{p}"),
            Residual::Operator(op) => write!(f, "{op}"),
        }
    }
}

type CheckFn = Box<dyn Fn(&LaxTriple) -> Residual + Send + Sync>;

/// A named identity check against a triple.
pub struct Check {
    pub name: String,
    run: CheckFn,
}

impl Check {
    pub fn run(&self, triple: &LaxTriple) -> Residual {
        (self.run)(triple)
    }
}

/// Every identity check, in reporting order.
pub fn all_checks() -> Vec<Check> {
    let mut out: Vec<Check> = Vec::new();
    let mut push = |name: String, run: CheckFn| out.push(Check { name, run });
    push(
        "compatibility(+)".into(),
        Box::new(|t| Residual::Operator(t.check_compatibility(Part::Plus))),
    );
    push(
        "compatibility(-)".into(),
        Box::new(|t| Residual::Operator(t.check_compatibility(Part::Minus))),
    );
    for i in 0..5 {
        push(
            format!("telescoping[{}]", i + 1),
            Box::new(move |t| Residual::Poly(t.check_telescoping()[i].clone())),
        );
    }
    push(
        "flux n=1".into(),
        Box::new(|_| Residual::Poly(check_flux(1, FluxForm::Direct).expect("n=1 direct"))),
    );
    push(
        "flux n=2 direct".into(),
        Box::new(|t| Residual::Poly(t.check_flux(FluxForm::Direct))),
    );
    push(
        "flux n=2 simpler".into(),
        Box::new(|t| Residual::Poly(t.check_flux(FluxForm::Simpler))),
    );
    push(
        "flux forms agree".into(),
        Box::new(|t| Residual::Poly(t.flux_forms_difference())),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::DerivSymbol;

    #[test]
    fn triple_entries_match_the_reference_matrices() {
        let m = DeformationMatrices::second_flow();
        assert_eq!(m.v.get(1, 2), &poly("-5*d(p)"));
        assert_eq!(m.v.get(2, 2), &poly("5*w"));
        assert!(m.v.get(1, 1).is_zero() && m.v.get(2, 1).is_zero());
        assert!(m.t.get(2, 1).contains_term(
            &ratio(5, 1),
            &[DerivSymbol::new(Generator::P, 4, 0)]
        ));
        assert_eq!(m.r.get(1, 2), m.w.get(1, 2));
    }

    #[test]
    fn second_flow_contains_expected_term() {
        let f = flow_rhs_symbolic(2).unwrap();
        assert!(f.contains_term(
            &ratio(15, 2),
            &[
                DerivSymbol::new(Generator::Omega, 1, 0),
                DerivSymbol::new(Generator::P, 2, 0)
            ]
        ));
    }

    #[test]
    fn third_flow_is_out_of_scope() {
        assert_eq!(flow_rhs_symbolic(3), Err(VerifyError::UnsupportedFlow(3)));
        assert!(check_flux(3, FluxForm::Direct).is_err());
        assert!(check_flux(1, FluxForm::Simpler).is_err());
    }

    #[test]
    fn first_flux_identity() {
        assert!(check_flux(1, FluxForm::Direct).unwrap().is_zero());
    }

    #[test]
    fn perturbation_names() {
        let mut m = DeformationMatrices::second_flow();
        m.perturb("V12").unwrap();
        assert_eq!(m.v.get(1, 2), &poly("-4*d(p)"));
        assert_eq!(m.perturb("V11"), Err(VerifyError::ZeroEntry("V11".into())));
        assert!(matches!(m.perturb("Y12"), Err(VerifyError::UnknownEntry(_))));
        assert!(matches!(m.perturb("V3"), Err(VerifyError::UnknownEntry(_))));
    }
}
