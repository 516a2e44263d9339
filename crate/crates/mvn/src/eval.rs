//! Numeric evaluation of differential polynomials on periodic grids.

use std::collections::BTreeMap;

use mvn_core::{DerivSymbol, DiffPoly, Generator};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::spectral::{ComplexField, Grid, RealField, Spectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound generator '{0}'")]
    Unbound(&'static str),
    #[error("grid mismatch in binding")]
    GridMismatch,
}

/// Fields substituted for the generators. `ω̄` and `ζ̄` evaluate as the
/// complex conjugates of `ω` and `ζ`.
#[derive(Clone, Debug, Default)]
pub struct Binding {
    pub p: Option<RealField>,
    pub omega: Option<ComplexField>,
    pub zeta: Option<ComplexField>,
}

impl Binding {
    pub fn new(p: RealField) -> Self {
        Binding {
            p: Some(p),
            omega: None,
            zeta: None,
        }
    }

    pub fn with_omega(mut self, omega: ComplexField) -> Self {
        self.omega = Some(omega);
        self
    }

    pub fn with_zeta(mut self, zeta: ComplexField) -> Self {
        self.zeta = Some(zeta);
        self
    }

    fn base(&self, g: Generator) -> Result<ComplexField, EvalError> {
        let missing = || EvalError::Unbound(g.name());
        Ok(match g {
            Generator::P => self.p.as_ref().ok_or_else(missing)?.to_complex(),
            Generator::Omega => self.omega.clone().ok_or_else(missing)?,
            Generator::Zeta => self.zeta.clone().ok_or_else(missing)?,
            Generator::OmegaBar => self.omega.as_ref().ok_or_else(missing)?.conj(),
            Generator::ZetaBar => self.zeta.as_ref().ok_or_else(missing)?.conj(),
        })
    }

    fn grid(&self) -> Result<Option<Grid>, EvalError> {
        let grids = [
            self.p.as_ref().map(|f| *f.grid()),
            self.omega.as_ref().map(|f| *f.grid()),
            self.zeta.as_ref().map(|f| *f.grid()),
        ];
        let mut found = None;
        for g in grids.into_iter().flatten() {
            match found {
                None => found = Some(g),
                Some(h) if h != g => return Err(EvalError::GridMismatch),
                _ => {}
            }
        }
        Ok(found)
    }
}

pub fn coeff_to_f64(c: &mvn_core::Coeff) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Evaluates `poly` with spectral derivatives and exact pointwise products.
/// A polynomial without generators evaluates on the binding's grid.
pub fn eval_on_grid(poly: &DiffPoly, binding: &Binding) -> Result<ComplexField, EvalError> {
    let grid = binding.grid()?.ok_or(EvalError::Unbound("p"))?;
    let mut spectra: BTreeMap<Generator, Spectrum> = BTreeMap::new();
    let mut cache: BTreeMap<DerivSymbol, ComplexField> = BTreeMap::new();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (factors, c) in poly.terms() {
        let mut term = vec![Complex64::new(coeff_to_f64(c), 0.0); grid.len()];
        for s in factors {
            if !cache.contains_key(s) {
                if let std::collections::btree_map::Entry::Vacant(e) = spectra.entry(s.generator) {
                    e.insert(Spectrum::forward(&binding.base(s.generator)?));
                }
                let field = spectra[&s.generator].derive(s.a, s.b).inverse();
                cache.insert(*s, field);
            }
            for (t, v) in term.iter_mut().zip(cache[s].samples()) {
                *t *= v;
            }
        }
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
        }
    }
    Ok(ComplexField::from_vec_unchecked(grid, out))
}
