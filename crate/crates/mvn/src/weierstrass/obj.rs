//! Wavefront OBJ export.

use std::fmt::Write;
use std::path::Path;

use super::{ChartKind, Immersion, WeierstrassError};

/// Triangulated mesh of the immersion: one vertex per sample (row-major),
/// two triangles per chart cell. Triangles are wound so that face normals
/// point along `−e₃`, outward on the builtin sphere. Periodic charts close
/// their seams.
pub fn obj_string(x: &Immersion) -> String {
    let n = x.chart.n;
    let cells = match x.chart.kind {
        ChartKind::Periodic => n,
        ChartKind::Open => n - 1,
    };
    let mut out = String::with_capacity(n * n * 60);
    for idx in 0..x.chart.len() {
        let p = x.point(idx);
        let _ = writeln!(out, "v {:.12e} {:.12e} {:.12e}", p[0], p[1], p[2]);
    }
    // OBJ indices are 1-based
    let vid = |j: usize, k: usize| (j % n) * n + (k % n) + 1;
    for j in 0..cells {
        for k in 0..cells {
            let (a, b, c, d) = (vid(j, k), vid(j + 1, k), vid(j + 1, k + 1), vid(j, k + 1));
            let _ = writeln!(out, "f {a} {c} {b}");
            let _ = writeln!(out, "f {a} {d} {c}");
        }
    }
    out
}

pub fn export_obj(path: &Path, x: &Immersion) -> Result<(), WeierstrassError> {
    std::fs::write(path, obj_string(x)).map_err(|source| WeierstrassError::Io {
        path: path.to_path_buf(),
        source,
    })
}
