//! Initial conditions for flow runs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spectral::{Grid, RealField, Spectrum};

/// Largest `|m|` of the random band-limited field.
pub const RANDOM_BAND: i64 = 4;
/// Truncation of the periodic bump series.
pub const BUMP_MODES: i64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcKind {
    /// `ε cos(2πx/L)`.
    Cosine,
    /// Real field with random modes `0 < |m| ≤ 4`, scaled to `max|p| = ε`.
    Random,
    /// Truncated Fourier series of a periodic Gaussian, `max p = ε`.
    Bump,
}

impl IcKind {
    pub fn name(self) -> &'static str {
        match self {
            IcKind::Cosine => "cosine",
            IcKind::Random => "random",
            IcKind::Bump => "bump",
        }
    }
}

fn scale_to(p: RealField, amplitude: f64) -> RealField {
    let m = p.max_abs();
    if m == 0.0 {
        p
    } else {
        p.map(|v| v * amplitude / m)
    }
}

pub fn cosine(grid: Grid, amplitude: f64) -> RealField {
    let k = 2.0 * PI / grid.length();
    RealField::from_fn(grid, |x, _| amplitude * (k * x).cos())
}

/// Random band-limited real field, deterministic in `seed`.
pub fn random_band_limited(grid: Grid, amplitude: f64, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Spectrum::zeros(grid);
    let n = grid.n() as i64;
    for mx in -RANDOM_BAND..=RANDOM_BAND {
        for my in -RANDOM_BAND..=RANDOM_BAND {
            let r2 = mx * mx + my * my;
            // one representative of each ± pair
            if r2 == 0 || r2 > RANDOM_BAND * RANDOM_BAND || (mx, my) < (0, 0) {
                continue;
            }
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let idx = |a: i64, b: i64| (a.rem_euclid(n) * n + b.rem_euclid(n)) as usize;
            s.modes_mut()[idx(mx, my)] = c;
            s.modes_mut()[idx(-mx, -my)] = c.conj();
        }
    }
    scale_to(s.inverse().re(), amplitude)
}

/// Periodic bump centered in the cell with width `width` (physical units).
pub fn bump(grid: Grid, amplitude: f64, width: f64) -> RealField {
    let k = 2.0 * PI / grid.length();
    let c = grid.length() / 2.0;
    let series = |t: f64| -> f64 {
        (-BUMP_MODES..=BUMP_MODES)
            .map(|m| {
                let km = k * m as f64;
                (-(km * width).powi(2) / 2.0).exp() * (km * (t - c)).cos()
            })
            .sum()
    };
    scale_to(RealField::from_fn(grid, |x, y| series(x) * series(y)), amplitude)
}

/// Builds the initial field for `kind`.
pub fn initial_condition(grid: Grid, kind: IcKind, amplitude: f64, seed: u64) -> RealField {
    match kind {
        IcKind::Cosine => cosine(grid, amplitude),
        IcKind::Random => random_band_limited(grid, amplitude, seed),
        IcKind::Bump => bump(grid, amplitude, grid.length() / 8.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_field_is_seeded_and_band_limited() {
        let g = Grid::standard(32).unwrap();
        let a = random_band_limited(g, 0.1, 7);
        assert_eq!(a, random_band_limited(g, 0.1, 7));
        assert_ne!(a, random_band_limited(g, 0.1, 8));
        assert!((a.max_abs() - 0.1).abs() < 1e-15);
        let s = Spectrum::forward_real(&a);
        for mx in -16i64..16 {
            for my in -16i64..16 {
                if mx * mx + my * my > 16 || (mx == 0 && my == 0) {
                    assert!(s.coeff(mx, my).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn bump_peaks_at_the_center() {
        let g = Grid::standard(32).unwrap();
        let b = bump(g, 0.2, g.length() / 8.0);
        let center = 16 * 32 + 16;
        assert!((b.samples()[center] - 0.2).abs() < 1e-15);
        assert!(b.samples()[0] < 0.01);
    }
}
