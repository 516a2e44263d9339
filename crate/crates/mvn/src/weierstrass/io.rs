//! Immersion and spinor files in the field text format.
//!
//! Chart data travels as header extras: `chart=open|periodic`,
//! `extent=x0,x1,y0,y1` and optionally `disk=r`. Files without `chart` are
//! read as periodic on `[0, length)²`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{Chart, Immersion, SpinorField, WeierstrassError};
use crate::fieldio::{read_data, write_data, FieldHeader, FieldIoError, FieldKind};

const COORD_FILES: [&str; 3] = ["x1.txt", "x2.txt", "x3.txt"];
const SPINOR_FILES: [&str; 2] = ["psi1.txt", "psi2.txt"];

fn header(chart: &Chart, kind: FieldKind) -> FieldHeader {
    let e = chart.extent;
    let mut extras = vec![
        ("chart".to_string(), chart.kind.name().to_string()),
        ("extent".to_string(), format!("{},{},{},{}", e[0], e[1], e[2], e[3])),
    ];
    if let Some(r) = chart.disk {
        extras.push(("disk".to_string(), r.to_string()));
    }
    FieldHeader {
        n: chart.n,
        length: e[1] - e[0],
        kind,
        extras,
    }
}

fn bad(message: String) -> WeierstrassError {
    WeierstrassError::Field(FieldIoError::Format { line: 1, message })
}

fn chart_of(h: &FieldHeader) -> Result<Chart, WeierstrassError> {
    let chart = match h.extra("chart") {
        None | Some("periodic") => Chart::periodic(h.n, h.length)?,
        Some("open") => {
            let text = h.extra("extent").ok_or_else(|| bad("open chart without extent".into()))?;
            let v: Vec<f64> = text
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(format!("extent: {e}")))?;
            let extent: [f64; 4] = v
                .try_into()
                .map_err(|_| bad(format!("extent needs four values (got '{text}')")))?;
            Chart::open(h.n, extent)?
        }
        Some(other) => return Err(bad(format!("unknown chart '{other}'"))),
    };
    match h.extra("disk") {
        None => Ok(chart),
        Some(r) => Ok(chart.with_disk(r.parse().map_err(|e| bad(format!("disk: {e}")))?)),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), WeierstrassError> {
    fs::create_dir_all(dir).map_err(|source| WeierstrassError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `x1.txt`, `x2.txt`, `x3.txt` into `dir`.
pub fn write_immersion(dir: &Path, x: &Immersion) -> Result<(), WeierstrassError> {
    ensure_dir(dir)?;
    let h = header(&x.chart, FieldKind::Real);
    for (name, c) in COORD_FILES.iter().zip(&x.x) {
        let values: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        write_data(&dir.join(name), &h, &values)?;
    }
    Ok(())
}

pub fn read_immersion(dir: &Path) -> Result<Immersion, WeierstrassError> {
    let mut chart = None;
    let mut coords = Vec::with_capacity(3);
    for name in COORD_FILES {
        let d = read_data(&dir.join(name))?;
        if d.header.kind != FieldKind::Real {
            return Err(FieldIoError::Kind {
                expected: "real",
                found: d.header.kind.name(),
            }
            .into());
        }
        let c = chart_of(&d.header)?;
        if chart.is_some_and(|prev| prev != c) {
            return Err(WeierstrassError::ChartMismatch);
        }
        chart = Some(c);
        coords.push(d.values.iter().map(|v| v.re).collect::<Vec<f64>>());
    }
    let chart = chart.expect("three coordinate files");
    let [a, b, c]: [Vec<f64>; 3] = coords.try_into().expect("three coordinate files");
    Immersion::new(chart, [a, b, c])
}

/// Writes `psi1.txt` and `psi2.txt` into `dir`.
pub fn write_spinors(dir: &Path, psi: &SpinorField) -> Result<(), WeierstrassError> {
    ensure_dir(dir)?;
    let h = header(&psi.chart, FieldKind::Complex);
    write_data(&dir.join(SPINOR_FILES[0]), &h, &psi.psi1)?;
    write_data(&dir.join(SPINOR_FILES[1]), &h, &psi.psi2)?;
    Ok(())
}

pub fn read_spinors(dir: &Path) -> Result<SpinorField, WeierstrassError> {
    let a = read_data(&dir.join(SPINOR_FILES[0]))?;
    let b = read_data(&dir.join(SPINOR_FILES[1]))?;
    let chart = chart_of(&a.header)?;
    if chart_of(&b.header)? != chart {
        return Err(WeierstrassError::ChartMismatch);
    }
    SpinorField::new(chart, a.values, b.values)
}

#[cfg(test)]
mod tests {
    use super::super::{builtin, extract_spinors};
    use super::*;

    #[test]
    fn immersion_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = builtin("sphere").unwrap();
        write_immersion(dir.path(), &b.immersion).unwrap();
        let back = read_immersion(dir.path()).unwrap();
        assert_eq!(back, b.immersion);
        let head = fs::read_to_string(dir.path().join("x1.txt")).unwrap();
        assert!(head.starts_with("# n=128 length=20 kind=real chart=open extent=-10,10,-10,10 disk=10\n"));
    }

    #[test]
    fn spinor_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = extract_spinors(&builtin("enneper").unwrap().immersion).unwrap();
        write_spinors(dir.path(), &s).unwrap();
        assert_eq!(read_spinors(dir.path()).unwrap(), s);
    }

    #[test]
    fn bad_extent_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        for name in COORD_FILES {
            fs::write(dir.path().join(name), "# n=2 length=1 kind=real chart=open extent=0,1\n0\n0\n0\n0\n").unwrap();
        }
        let e = read_immersion(dir.path()).unwrap_err();
        assert!(e.to_string().contains("extent needs four values"), "{e}");
    }
}
