//! Generalized Weierstrass inducing of surfaces in ℝ³.
//!
//! With `F = X₂ + iX₁` the spinors are `ψ₁² = ∂̄F`, `ψ₂² = −∂F`, and they
//! satisfy `∂X₃ = −ψ₂ψ̄₁`. The Dirac system is
//!
//! ```text
//! ∂ψ₁ = pψ₂,   ∂̄ψ₂ = −pψ₁,   p = λH/2,   λ = |ψ₁|² + |ψ₂|²
//! ```
//!
//! and the immersion is recovered from the closed forms
//! `d(X₂ − iX₁) = ψ̄₁²dz − ψ̄₂²dz̄`, `dX₃ = −(ψ₂ψ̄₁dz + ψ₁ψ̄₂dz̄)`.
//! The unit normal is `e₃ = e₁ × e₂`; the opposite orientation flips `H`
//! and `φ`.

mod builtin;
mod chart;
mod curvature;
mod induce;
mod io;
mod obj;
mod spinors;

use num_complex::Complex64;
use thiserror::Error;

pub use builtin::{builtin, cylinder, enneper, plane, sphere, Builtin, BUILTIN_NAMES, SPHERE_RADIUS};
pub use chart::{lift, Chart, ChartKind, EDGE_MARGIN};
pub use curvature::{
    frame_and_curvature, hopf_residuals, structure_residuals, willmore_from_p, willmore_geometric, FrameCurvature,
};
pub use induce::{induce_surface, induce_surface_with, InducedSurface, Periods};
pub use io::{read_immersion, read_spinors, write_immersion, write_spinors};
pub use obj::{export_obj, obj_string};
pub use spinors::{check_closed, dirac_residual, extract_spinors, extract_spinors_with, ClosedResiduals};

/// Default bound on `|g_zz| / Σ|∂X_j|²`.
pub const TOL_CONF: f64 = 1e-6;
/// Default bound on the closedness residuals before inducing.
pub const TOL_CLOSED: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum WeierstrassError {
    #[error("bad chart: {0}")]
    BadChart(String),
    #[error("chart mismatch")]
    ChartMismatch,
    #[error("non-conformal immersion: residual {residual:e} exceeds {tol:e}")]
    NonConformal { residual: f64, tol: f64 },
    #[error("branch discontinuity at sample {index}: nearest root is {distance:e} from its neighbor")]
    BranchDiscontinuity { index: usize, distance: f64 },
    #[error("forms not closed: residuals {r_plus:e}, {r_3:e} exceed {tol:e}")]
    FormsNotClosed { r_plus: f64, r_3: f64, tol: f64 },
    #[error("degenerate metric at sample {index}")]
    DegenerateMetric { index: usize },
    #[error("unknown builtin '{0}' (plane, sphere, enneper, cylinder)")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Field(#[from] crate::fieldio::FieldIoError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

/// Three real coordinate fields on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Immersion {
    pub chart: Chart,
    pub x: [Vec<f64>; 3],
}

impl Immersion {
    pub fn new(chart: Chart, x: [Vec<f64>; 3]) -> Result<Immersion, WeierstrassError> {
        if x.iter().any(|c| c.len() != chart.len()) {
            return Err(WeierstrassError::ChartMismatch);
        }
        Ok(Immersion { chart, x })
    }

    pub fn from_fn(chart: Chart, f: impl Fn(f64, f64) -> [f64; 3]) -> Immersion {
        let pts = chart.sample(f);
        let x = [0, 1, 2].map(|c| pts.iter().map(|p| p[c]).collect());
        Immersion { chart, x }
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        [self.x[0][idx], self.x[1][idx], self.x[2][idx]]
    }

    /// `∂X_j` for each coordinate.
    pub fn dz(&self) -> [Vec<Complex64>; 3] {
        [0, 1, 2].map(|c| self.chart.dz(&lift(&self.x[c])))
    }

    /// Max over active samples of `|Σ(∂X_j)²| / Σ|∂X_j|²`.
    pub fn conformality_residual(&self) -> f64 {
        conformality(&self.chart, &self.dz())
    }

    /// Copy translated so that sample `idx` sits at the origin.
    pub fn translated(&self, idx: usize) -> Immersion {
        let x = [0, 1, 2].map(|c| {
            let b = self.x[c][idx];
            self.x[c].iter().map(|v| v - b).collect()
        });
        Immersion { chart: self.chart, x }
    }

    /// Max-norm distance to `other` over active samples.
    pub fn max_distance(&self, other: &Immersion) -> f64 {
        self.chart.active_max((0..self.chart.len()).map(|i| {
            (0..3)
                .map(|c| (self.x[c][i] - other.x[c][i]).powi(2))
                .sum::<f64>()
                .sqrt()
        }))
    }
}

fn conformality(chart: &Chart, d: &[Vec<Complex64>; 3]) -> f64 {
    chart.active_max((0..chart.len()).map(|i| {
        let gzz: Complex64 = d.iter().map(|c| c[i] * c[i]).sum();
        let norm: f64 = d.iter().map(|c| c[i].norm_sqr()).sum();
        if norm == 0.0 {
            0.0
        } else {
            gzz.norm() / norm
        }
    }))
}

/// Spinor pair on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub chart: Chart,
    pub psi1: Vec<Complex64>,
    pub psi2: Vec<Complex64>,
}

impl SpinorField {
    pub fn new(chart: Chart, psi1: Vec<Complex64>, psi2: Vec<Complex64>) -> Result<SpinorField, WeierstrassError> {
        if psi1.len() != chart.len() || psi2.len() != chart.len() {
            return Err(WeierstrassError::ChartMismatch);
        }
        Ok(SpinorField { chart, psi1, psi2 })
    }

    /// `λ = |ψ₁|² + |ψ₂|²`.
    pub fn lambda(&self) -> Vec<f64> {
        self.psi1
            .iter()
            .zip(&self.psi2)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }
}

/// Relative max-norm of `r` against the largest of `scales` and `floor`,
/// over active samples; absolute when all of them vanish.
///
/// The floor keeps residuals of derivatives that vanish identically (a
/// plane, a minimal surface) from being measured against roundoff.
pub(crate) fn relative(chart: &Chart, r: &[Complex64], scales: &[&[Complex64]], floor: f64) -> f64 {
    let num = chart.active_max(r.iter().map(|v| v.norm()));
    let den = scales
        .iter()
        .map(|s| chart.active_max(s.iter().map(|v| v.norm())))
        .fold(floor, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Derivative scale `max|f| / span` of the given fields.
pub(crate) fn derivative_floor(chart: &Chart, fields: &[&[Complex64]]) -> f64 {
    let m = fields
        .iter()
        .map(|s| chart.active_max(s.iter().map(|v| v.norm())))
        .fold(0.0, f64::max);
    m / chart.span()
}
