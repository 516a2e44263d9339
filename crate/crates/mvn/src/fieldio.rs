//! Field text format.
//!
//! ```text
//! # n=<n> length=<float> kind=<real|complex> [key=value ...]
//! <re> | <re> <im>        (n² lines, row-major over (x, y))
//! ```
//!
//! Values are written with 17 significant digits so files round-trip
//! exactly. Extra header keys carry chart metadata for open charts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thiserror::Error;

use crate::spectral::{ComplexField, Grid, RealField, SpectralError};

#[derive(Debug, Error)]
pub enum FieldIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("expected a {expected} field, found {found}")]
    Kind {
        expected: &'static str,
        found: &'static str,
    },
    #[error(transparent)]
    Grid(#[from] SpectralError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Real,
    Complex,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Real => "real",
            FieldKind::Complex => "complex",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldHeader {
    pub n: usize,
    pub length: f64,
    pub kind: FieldKind,
    pub extras: Vec<(String, String)>,
}

impl FieldHeader {
    pub fn extra(&self, key: &str) -> Option<&str> {
        self.extras
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Parsed file contents before conversion into a field type.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldData {
    pub header: FieldHeader,
    pub values: Vec<Complex64>,
}

fn format_err(line: usize, message: impl Into<String>) -> FieldIoError {
    FieldIoError::Format {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<FieldHeader, FieldIoError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| format_err(1, "header must start with '#'"))?;
    let (mut n, mut length, mut kind) = (None, None, None);
    let mut extras = Vec::new();
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| format_err(1, format!("malformed header token '{tok}'")))?;
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|e| format_err(1, format!("n: {e}")))?),
            "length" => {
                length = Some(v.parse::<f64>().map_err(|e| format_err(1, format!("length: {e}")))?)
            }
            "kind" => {
                kind = Some(match v {
                    "real" => FieldKind::Real,
                    "complex" => FieldKind::Complex,
                    _ => return Err(format_err(1, format!("unknown kind '{v}'"))),
                })
            }
            _ => extras.push((k.to_string(), v.to_string())),
        }
    }
    Ok(FieldHeader {
        n: n.ok_or_else(|| format_err(1, "missing n"))?,
        length: length.ok_or_else(|| format_err(1, "missing length"))?,
        kind: kind.ok_or_else(|| format_err(1, "missing kind"))?,
        extras,
    })
}

pub fn parse_field(text: &str) -> Result<FieldData, FieldIoError> {
    let mut lines = text.lines();
    let header = parse_header(lines.next().ok_or_else(|| format_err(1, "empty file"))?)?;
    let expected = header.n * header.n;
    let mut values = Vec::with_capacity(expected);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = |what: &str| -> Result<f64, FieldIoError> {
            parts
                .next()
                .ok_or_else(|| format_err(lineno, format!("missing {what} part")))?
                .parse::<f64>()
                .map_err(|e| format_err(lineno, format!("{what}: {e}")))
        };
        let re = next("real")?;
        let im = match header.kind {
            FieldKind::Real => 0.0,
            FieldKind::Complex => next("imaginary")?,
        };
        if parts.next().is_some() {
            return Err(format_err(lineno, "too many values"));
        }
        values.push(Complex64::new(re, im));
    }
    if values.len() != expected {
        return Err(format_err(
            values.len() + 2,
            format!("expected {expected} samples, found {}", values.len()),
        ));
    }
    Ok(FieldData { header, values })
}

pub fn format_field(header: &FieldHeader, values: &[Complex64]) -> String {
    let mut out = String::with_capacity(values.len() * 50);
    let _ = write!(
        out,
        "# n={} length={} kind={}",
        header.n,
        header.length,
        header.kind.name()
    );
    for (k, v) in &header.extras {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    for v in values {
        let _ = match header.kind {
            FieldKind::Real => writeln!(out, "{:.16e}", v.re),
            FieldKind::Complex => writeln!(out, "{:.16e} {:.16e}", v.re, v.im),
        };
    }
    out
}

pub fn read_data(path: &Path) -> Result<FieldData, FieldIoError> {
    let text = fs::read_to_string(path).map_err(|source| FieldIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_field(&text)
}

pub fn write_data(path: &Path, header: &FieldHeader, values: &[Complex64]) -> Result<(), FieldIoError> {
    fs::write(path, format_field(header, values)).map_err(|source| FieldIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn header_for(grid: &Grid, kind: FieldKind) -> FieldHeader {
    FieldHeader {
        n: grid.n(),
        length: grid.length(),
        kind,
        extras: Vec::new(),
    }
}

pub fn write_real(path: &Path, f: &RealField) -> Result<(), FieldIoError> {
    let values: Vec<Complex64> = f.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    write_data(path, &header_for(f.grid(), FieldKind::Real), &values)
}

pub fn write_complex(path: &Path, f: &ComplexField) -> Result<(), FieldIoError> {
    write_data(path, &header_for(f.grid(), FieldKind::Complex), f.samples())
}

pub fn read_real(path: &Path) -> Result<RealField, FieldIoError> {
    let d = read_data(path)?;
    if d.header.kind != FieldKind::Real {
        return Err(FieldIoError::Kind {
            expected: "real",
            found: d.header.kind.name(),
        });
    }
    let grid = Grid::new(d.header.n, d.header.length)?;
    Ok(RealField::new(grid, d.values.iter().map(|v| v.re).collect())?)
}

/// Reads a complex field; real files are accepted and widened.
pub fn read_complex(path: &Path) -> Result<ComplexField, FieldIoError> {
    let d = read_data(path)?;
    let grid = Grid::new(d.header.n, d.header.length)?;
    Ok(ComplexField::new(grid, d.values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let g = Grid::new(8, 1.0).unwrap();
        let f = ComplexField::from_fn(g, |x, y| Complex64::new((7.0 * x).sin() / 3.0, y.exp()));
        let h = header_for(&g, FieldKind::Complex);
        let back = parse_field(&format_field(&h, f.samples())).unwrap();
        assert_eq!(back.values, f.samples());
        assert_eq!(back.header, h);
    }

    #[test]
    fn header_format() {
        let g = Grid::new(8, 0.5).unwrap();
        let text = format_field(&header_for(&g, FieldKind::Real), &vec![Complex64::new(0.1, 0.0); 64]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# n=8 length=0.5 kind=real");
        let first = lines.next().unwrap();
        assert_eq!(first, "1.0000000000000001e-1");
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_field("").is_err());
        assert!(parse_field("# n=8 kind=real\n").is_err());
        let short = "# n=8 length=1 kind=real\n1.0\n";
        assert!(matches!(parse_field(short), Err(FieldIoError::Format { .. })));
        let mut text = String::from("# n=8 length=1 kind=complex\n");
        for _ in 0..64 {
            text.push_str("1.0\n");
        }
        assert!(parse_field(&text).is_err());
    }

    #[test]
    fn extras_are_preserved() {
        let h = parse_header("# n=8 length=1 kind=real chart=open extent=-1,1,-1,1").unwrap();
        assert_eq!(h.extra("chart"), Some("open"));
        assert_eq!(h.extra("extent"), Some("-1,1,-1,1"));
    }
}
