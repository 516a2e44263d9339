//! Configured flow runs with diagnostics and snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fieldio::{self, FieldIoError};
use crate::flow::{default_dt, flux_residual_numeric, Diagnostics, FlowError, FlowState, Scheme, Stepper};
use crate::ic::{initial_condition, IcKind};
use crate::spectral::Grid;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Field(#[from] FieldIoError),
    #[error("step {step}: {source}")]
    Flow { step: usize, source: FlowError },
}

impl EvolveError {
    /// Blow-ups and non-finite states are run failures; everything else is
    /// a setup problem.
    pub fn is_runtime(&self) -> bool {
        matches!(self, EvolveError::Flow { .. })
    }
}

fn default_length() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

fn default_scheme() -> String {
    "ifrk4".into()
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub n_flow: u32,
    /// Omitted means the default heuristic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub steps: usize,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "yes")]
    pub dealias: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSection {
    pub kind: IcKind,
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_every() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default = "default_every")]
    pub snapshot_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out(),
            snapshot_every: default_every(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub grid: GridSection,
    pub flow: FlowSection,
    pub ic: IcSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl EvolveConfig {
    pub fn from_toml(text: &str) -> Result<Self, EvolveError> {
        let cfg: EvolveConfig = toml::from_str(text).map_err(|e| EvolveError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, EvolveError> {
        let text = fs::read_to_string(path).map_err(|source| EvolveError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        EvolveConfig::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |m: String| Err(EvolveError::Config(m));
        Grid::new(self.grid.n, self.grid.length).map_err(|e| EvolveError::Config(e.to_string()))?;
        if !matches!(self.flow.n_flow, 1 | 2) {
            return bad(format!("n_flow must be 1 or 2 (got {})", self.flow.n_flow));
        }
        if let Some(dt) = self.flow.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad(format!("dt must be positive (got {dt})"));
            }
        }
        if Scheme::from_name(&self.flow.scheme).is_none() {
            return bad(format!("unknown scheme '{}' (ifrk4 or rk4)", self.flow.scheme));
        }
        if !self.ic.amplitude.is_finite() {
            return bad("amplitude must be finite".into());
        }
        if self.output.snapshot_every == 0 {
            return bad("snapshot_every must be at least 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.grid.n, self.grid.length).expect("validated")
    }

    pub fn scheme(&self) -> Scheme {
        Scheme::from_name(&self.flow.scheme).expect("validated")
    }

    /// Step size after applying the default heuristic.
    pub fn dt(&self) -> f64 {
        self.flow.dt.unwrap_or_else(|| default_dt(&self.grid(), self.flow.n_flow))
    }

    /// The configuration with every default filled in.
    pub fn resolved(&self) -> EvolveConfig {
        let mut c = self.clone();
        c.flow.dt = Some(self.dt());
        c
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Outcome of a completed run.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolveSummary {
    pub steps: usize,
    pub final_state: FlowState,
    pub diagnostics: Vec<Diagnostics>,
    /// Largest imaginary part discarded by any step.
    pub max_discarded_imag: f64,
}

impl EvolveSummary {
    pub fn final_drift(&self) -> f64 {
        self.diagnostics.last().map_or(0.0, |d| d.s_drift_rel)
    }
}

/// Runs the configured flow, calling `snapshot` on step 0 and every
/// `snapshot_every` steps. Flux residuals are recorded on snapshot steps.
pub fn evolve(
    cfg: &EvolveConfig,
    snapshot: impl FnMut(usize, &FlowState) -> Result<(), EvolveError>,
) -> Result<EvolveSummary, EvolveError> {
    let mut diagnostics = Vec::new();
    let (final_state, max_discarded_imag) = evolve_recording(cfg, &mut diagnostics, snapshot)?;
    Ok(EvolveSummary {
        steps: cfg.flow.steps,
        final_state,
        diagnostics,
        max_discarded_imag,
    })
}

/// As [`evolve`], appending diagnostics to `diagnostics` as they are
/// produced so that they survive an aborted run.
pub fn evolve_recording(
    cfg: &EvolveConfig,
    diagnostics: &mut Vec<Diagnostics>,
    mut snapshot: impl FnMut(usize, &FlowState) -> Result<(), EvolveError>,
) -> Result<(FlowState, f64), EvolveError> {
    cfg.validate()?;
    let grid = cfg.grid();
    let n_flow = cfg.flow.n_flow;
    let p0 = initial_condition(grid, cfg.ic.kind, cfg.ic.amplitude, cfg.ic.seed);
    let mut state = FlowState::new(p0, n_flow).map_err(|source| EvolveError::Flow { step: 0, source })?;
    let mut stepper = Stepper::new(grid, n_flow, cfg.dt(), cfg.scheme(), cfg.flow.dealias)
        .map_err(|source| EvolveError::Flow { step: 0, source })?;
    let s0 = crate::flow::willmore(&state.p);
    let every = cfg.output.snapshot_every;
    let record = |step: usize, state: &FlowState| -> Result<Diagnostics, EvolveError> {
        let mut d = Diagnostics::of(step, state, s0);
        if step.is_multiple_of(every) {
            d.flux_residual =
                Some(flux_residual_numeric(&state.p, n_flow).map_err(|source| EvolveError::Flow { step, source })?);
        }
        Ok(d)
    };
    diagnostics.push(record(0, &state)?);
    snapshot(0, &state)?;
    let mut max_imag: f64 = 0.0;
    for step in 1..=cfg.flow.steps {
        state = stepper.step(&state).map_err(|source| EvolveError::Flow { step, source })?;
        max_imag = max_imag.max(stepper.last_discarded_imag);
        diagnostics.push(record(step, &state)?);
        if step % every == 0 {
            snapshot(step, &state)?;
        }
    }
    Ok((state, max_imag))
}

pub const CSV_HEADER: &str = "step,t,S,max_abs_p,s_drift_rel,flux_residual";

pub fn diagnostics_csv(rows: &[Diagnostics]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for d in rows {
        let _ = write!(
            out,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},",
            d.step, d.t, d.s, d.max_abs_p, d.s_drift_rel
        );
        if let Some(f) = d.flux_residual {
            let _ = write!(out, "{f:.17e}");
        }
        out.push('\n');
    }
    out
}

pub fn snapshot_name(step: usize) -> String {
    format!("p_{step:06}.txt")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvolveError + '_ {
    move |source| EvolveError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs `cfg` and writes `config.toml` (resolved), snapshots and
/// `diagnostics.csv` into `dir`. The CSV is written even when the run
/// aborts.
pub fn run_to_dir(cfg: &EvolveConfig, dir: &Path) -> Result<EvolveSummary, EvolveError> {
    cfg.validate()?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let cfg_path = dir.join("config.toml");
    fs::write(&cfg_path, cfg.resolved().to_toml()).map_err(io_err(&cfg_path))?;
    let mut diagnostics = Vec::new();
    let result = evolve_recording(cfg, &mut diagnostics, |step, state| {
        fieldio::write_real(&dir.join(snapshot_name(step)), &state.p)?;
        Ok(())
    });
    let csv_path = dir.join("diagnostics.csv");
    fs::write(&csv_path, diagnostics_csv(&diagnostics)).map_err(io_err(&csv_path))?;
    let (final_state, max_discarded_imag) = result?;
    Ok(EvolveSummary {
        steps: cfg.flow.steps,
        final_state,
        diagnostics,
        max_discarded_imag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[grid]
n = 16

[flow]
n_flow = 1
steps = 3

[ic]
kind = "cosine"
amplitude = 0.1

[output]
snapshot_every = 2
"#;

    #[test]
    fn parses_with_defaults() {
        let c = EvolveConfig::from_toml(BASIC).unwrap();
        assert_eq!(c.grid.length, 2.0 * std::f64::consts::PI);
        assert_eq!(c.scheme(), Scheme::Ifrk4);
        assert!(c.flow.dealias);
        assert_eq!(c.dt(), default_dt(&c.grid(), 1));
        let back = EvolveConfig::from_toml(&c.resolved().to_toml()).unwrap();
        assert_eq!(back, c.resolved());
    }

    #[test]
    fn rejects_invalid_configs() {
        for (from, to) in [
            ("n = 16", "n = 7"),
            ("n_flow = 1", "n_flow = 3"),
            ("steps = 3", "steps = 3\nscheme = \"euler\""),
            ("snapshot_every = 2", "snapshot_every = 0"),
            ("amplitude = 0.1", "amplitude = 0.1\ncolour = 1"),
        ] {
            let text = BASIC.replace(from, to);
            assert!(matches!(EvolveConfig::from_toml(&text), Err(EvolveError::Config(_))), "{to}");
        }
    }

    #[test]
    fn zero_steps_gives_initial_snapshot_only() {
        let mut c = EvolveConfig::from_toml(BASIC).unwrap();
        c.flow.steps = 0;
        let mut snaps = Vec::new();
        let s = evolve(&c, |step, _| {
            snaps.push(step);
            Ok(())
        })
        .unwrap();
        assert_eq!(snaps, vec![0]);
        assert_eq!(s.diagnostics.len(), 1);
        assert_eq!(s.diagnostics[0].s_drift_rel, 0.0);
    }

    #[test]
    fn snapshot_cadence_and_csv() {
        let c = EvolveConfig::from_toml(BASIC).unwrap();
        let mut snaps = Vec::new();
        let s = evolve(&c, |step, _| {
            snaps.push(step);
            Ok(())
        })
        .unwrap();
        assert_eq!(snaps, vec![0, 2]);
        let csv = diagnostics_csv(&s.diagnostics);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[2].ends_with(','));
        assert!(!lines[3].ends_with(','));
    }
}
