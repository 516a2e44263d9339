//! Closed-form example immersions.

use std::f64::consts::PI;

use super::{Chart, Immersion, WeierstrassError};

pub const BUILTIN_NAMES: [&str; 4] = ["plane", "sphere", "enneper", "cylinder"];

/// `X = (x, y, 0)`.
pub fn plane(chart: Chart) -> Immersion {
    Immersion::from_fn(chart, |x, y| [x, y, 0.0])
}

/// Unit sphere through inverse stereographic projection,
/// `X = (2x, 2y, r² − 1)/(1 + r²)`; `H = 1`, `λ = 2/(1 + r²)`.
pub fn sphere(chart: Chart) -> Immersion {
    Immersion::from_fn(chart, |x, y| {
        let r2 = x * x + y * y;
        let d = 1.0 + r2;
        [2.0 * x / d, 2.0 * y / d, (r2 - 1.0) / d]
    })
}

/// Enneper's minimal surface, `λ = 1 + r²`.
pub fn enneper(chart: Chart) -> Immersion {
    Immersion::from_fn(chart, |x, y| {
        [
            x - x.powi(3) / 3.0 + x * y * y,
            -y + y.powi(3) / 3.0 - x * x * y,
            x * x - y * y,
        ]
    })
}

/// Unit cylinder `X = (cos x, sin x, y)`; `H = −1/2`, `K = 0`.
pub fn cylinder(chart: Chart) -> Immersion {
    Immersion::from_fn(chart, |x, y| [x.cos(), x.sin(), y])
}

/// A named example with its default chart.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub name: &'static str,
    pub immersion: Immersion,
    /// Closed-form `∫(λ²/2)H² dx dy` over the chart, when known.
    pub willmore_exact: Option<f64>,
}

/// Sphere disk radius of the default sphere chart.
pub const SPHERE_RADIUS: f64 = 10.0;

pub fn builtin(name: &str) -> Result<Builtin, WeierstrassError> {
    let unit = [-1.0, 1.0, -1.0, 1.0];
    Ok(match name {
        "plane" => Builtin {
            name: "plane",
            immersion: plane(Chart::open(32, unit)?),
            willmore_exact: Some(0.0),
        },
        "sphere" => {
            let r = SPHERE_RADIUS;
            let chart = Chart::open(128, [-r, r, -r, r])?.with_disk(r);
            Builtin {
                name: "sphere",
                immersion: sphere(chart),
                willmore_exact: Some(2.0 * PI * (1.0 - 1.0 / (1.0 + r * r))),
            }
        }
        "enneper" => Builtin {
            name: "enneper",
            immersion: enneper(Chart::open(64, unit)?),
            willmore_exact: Some(0.0),
        },
        "cylinder" => Builtin {
            name: "cylinder",
            immersion: cylinder(Chart::open(64, [-1.5, 1.5, -1.5, 1.5])?),
            // (λ²/2)H² = 1/8 over a 3 × 3 square
            willmore_exact: Some(9.0 / 8.0),
        },
        other => return Err(WeierstrassError::UnknownBuiltin(other.to_string())),
    })
}
