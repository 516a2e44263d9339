//! The `mvn` command line: argument parsing and the four subcommands.
//!
//! Every subcommand returns an exit status: 0 on success, 1 when a check
//! or residual fails (or a flow blows up), 2 on usage, configuration or
//! I/O errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{ArgGroup, Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::algebra::parse::parse_definitions;
use crate::algebra::verifier::{all_checks, Check, DeformationMatrices, Residual};
use crate::algebra::{LaxTriple, Mat2, Wirtinger};
use crate::evolve::{run_to_dir, EvolveConfig};
use crate::spectral::{dbar_inverse, symbol, wirtinger, ComplexField, Grid};
use crate::weierstrass::{
    builtin, check_closed, dirac_residual, export_obj, extract_spinors_with, frame_and_curvature, hopf_residuals,
    induce_surface_with, read_immersion, structure_residuals, willmore_from_p, willmore_geometric, Immersion,
    TOL_CLOSED, TOL_CONF,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mvn", version, about = "Modified Veselov–Novikov hierarchy: symbolic checks, flows and surface inducing")]
pub struct Cli {
    /// Configuration file (evolve).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output location: run directory (evolve) or OBJ mesh (induce).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the initial-condition seed (evolve).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for independent checks.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: u16,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact symbolic identity checks.
    Verify(VerifyArgs),
    /// Time evolution of a configured flow.
    Evolve(EvolveArgs),
    /// Spinor extraction and surface reconstruction with a residual report.
    Induce(InduceArgs),
    /// Quick spectral self-check of the d-bar inverse.
    DbarTest,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Scales one deformation-matrix entry (e.g. V12) by 4/5.
    #[arg(long, value_name = "ENTRY")]
    pub perturb: Option<String>,
    /// Writes the normalized matrices and operators into this directory.
    #[arg(long, value_name = "DIR")]
    pub emit: Option<PathBuf>,
    /// Definitions file overriding deformation matrices (`V = [[..]]`).
    #[arg(long, value_name = "FILE")]
    pub triple: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Overrides the step count.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(ArgGroup::new("source").required(true).args(["builtin", "input"])))]
pub struct InduceArgs {
    /// Built-in immersion: plane, sphere, enneper or cylinder.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Directory holding x1.txt, x2.txt, x3.txt.
    #[arg(long, value_name = "DIR")]
    pub input: Option<PathBuf>,
    /// Residual report CSV.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match &cli.command {
        Command::Verify(a) => run_verify(&cli, a, out, err),
        Command::Evolve(a) => run_evolve(&cli, a, out, err),
        Command::Induce(a) => run_induce(&cli, a, out, err),
        Command::DbarTest => run_dbar_test(out),
    }
}

const MATRIX_NAMES: [&str; 8] = ["V", "W", "X", "Z", "Q", "R", "S", "T"];

fn matrix_slot<'a>(m: &'a mut DeformationMatrices, name: &str) -> Option<&'a mut Mat2> {
    Some(match name {
        "V" => &mut m.v,
        "W" => &mut m.w,
        "X" => &mut m.x,
        "Z" => &mut m.z,
        "Q" => &mut m.q,
        "R" => &mut m.r,
        "S" => &mut m.s,
        "T" => &mut m.t,
        _ => return None,
    })
}

fn matrices_text(m: &DeformationMatrices) -> String {
    let mut out = String::new();
    for (name, mat) in MATRIX_NAMES.iter().zip([&m.v, &m.w, &m.x, &m.z, &m.q, &m.r, &m.s, &m.t]) {
        let _ = writeln!(out, "{name} = {}", mat.normalize());
    }
    out
}

fn operators_text(t: &LaxTriple) -> String {
    format!(
        "L = {}\nA_plus = {}\nB_plus = {}\nA_minus = {}\nB_minus = {}\nflow_rhs_plus = {}\n",
        t.l.normalize(),
        t.a_plus.normalize(),
        t.b_plus.normalize(),
        t.a_minus().normalize(),
        t.b_minus().normalize(),
        t.flow_rhs_plus
    )
}

fn load_matrices(path: &Path) -> Result<DeformationMatrices, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let defs = parse_definitions(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut m = DeformationMatrices::second_flow();
    for (name, expr) in defs {
        let op = expr.into_operator();
        if op.order().unwrap_or(0) != 0 {
            return Err(format!("{}: '{name}' must be a multiplication matrix", path.display()));
        }
        let slot = matrix_slot(&mut m, &name)
            .ok_or_else(|| format!("{}: unknown matrix '{name}' (expected one of V W X Z Q R S T)", path.display()))?;
        *slot = op.coeff((0, 0));
    }
    Ok(m)
}

/// Runs `checks` on `threads` workers, returning results in input order.
fn run_checks(checks: &[Check], triple: &LaxTriple, threads: usize) -> Vec<(Residual, Duration)> {
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<(Residual, Duration)>>> = Mutex::new(vec![None; checks.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads.min(checks.len()).max(1) {
            s.spawn(|| loop {
                let i = {
                    let mut g = next.lock().expect("queue lock");
                    let i = *g;
                    *g += 1;
                    i
                };
                if i >= checks.len() {
                    break;
                }
                let start = Instant::now();
                let r = checks[i].run(triple);
                results.lock().expect("result lock")[i] = Some((r, start.elapsed()));
            });
        }
    });
    results
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|r| r.expect("every check ran"))
        .collect()
}

pub fn run_verify(cli: &Cli, args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let mut m = match &args.triple {
        None => DeformationMatrices::second_flow(),
        Some(path) => match load_matrices(path) {
            Ok(m) => m,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_ERROR;
            }
        },
    };
    if let Some(entry) = &args.perturb {
        if let Err(e) = m.perturb(entry) {
            let _ = writeln!(err, "error: --perturb: {e}");
            return EXIT_ERROR;
        }
    }
    let triple = m.assemble();
    if let Some(dir) = &args.emit {
        let written = fs::create_dir_all(dir)
            .and_then(|_| fs::write(dir.join("matrices.txt"), matrices_text(&m)))
            .and_then(|_| fs::write(dir.join("operators.txt"), operators_text(&triple)));
        if let Err(e) = written {
            let _ = writeln!(err, "error: {}: {e}", dir.display());
            return EXIT_ERROR;
        }
    }
    let checks = all_checks();
    let results = run_checks(&checks, &triple, cli.threads as usize);
    let _ = writeln!(out, "{:<20} {:>8}  {:<8} {:>10}", "check", "terms", "status", "time");
    let mut failed = 0;
    for (c, (r, time)) in checks.iter().zip(&results) {
        let status = if r.is_zero() { "ZERO" } else { "NONZERO" };
        failed += usize::from(!r.is_zero());
        let _ = writeln!(
            out,
            "{:<20} {:>8}  {:<8} {:>8.1}ms",
            c.name,
            r.term_count(),
            status,
            time.as_secs_f64() * 1e3
        );
    }
    if failed == 0 {
        let _ = writeln!(out, "all {} checks ZERO", checks.len());
        EXIT_OK
    } else {
        let _ = writeln!(out, "{failed} of {} checks NONZERO", checks.len());
        EXIT_FAIL
    }
}

pub fn run_evolve(cli: &Cli, args: &EvolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let Some(path) = &cli.config else {
        let _ = writeln!(err, "error: evolve needs --config <FILE>");
        return EXIT_ERROR;
    };
    let mut cfg = match EvolveConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    if let Some(s) = args.steps {
        cfg.flow.steps = s;
    }
    if let Some(s) = cli.seed {
        cfg.ic.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    let dir = cfg.output.dir.clone();
    match run_to_dir(&cfg, &dir) {
        Ok(summary) => {
            let _ = writeln!(
                out,
                "flow {} on n={}: {} steps, dt={:e}, final relative S drift {:e}, output in {}",
                cfg.flow.n_flow,
                cfg.grid.n,
                summary.steps,
                cfg.dt(),
                summary.final_drift(),
                dir.display()
            );
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_runtime() {
                EXIT_FAIL
            } else {
                EXIT_ERROR
            }
        }
    }
}

/// One row of the induce report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub value: f64,
    /// `None` for informational rows.
    pub tolerance: Option<f64>,
}

impl ReportRow {
    fn check(q: &str, value: f64, tol: f64) -> ReportRow {
        ReportRow {
            quantity: q.to_string(),
            value,
            tolerance: Some(tol),
        }
    }

    fn info(q: &str, value: f64) -> ReportRow {
        ReportRow {
            quantity: q.to_string(),
            value,
            tolerance: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.tolerance.is_none_or(|t| self.value <= t)
    }

    pub fn status(&self) -> &'static str {
        match (self.tolerance, self.passed()) {
            (None, _) => "INFO",
            (Some(_), true) => "PASS",
            (Some(_), false) => "FAIL",
        }
    }
}

pub const REPORT_HEADER: &str = "quantity,value,tolerance,status";

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in rows {
        let tol = r.tolerance.map(|t| format!("{t:e}")).unwrap_or_default();
        let _ = writeln!(s, "{},{:.6e},{},{}", r.quantity, r.value, tol, r.status());
    }
    s
}

/// Tolerances of the structure-equation and Hopf checks on finite-difference
/// charts.
pub const TOL_STRUCTURE: f64 = 1e-4;
/// Relative agreement of the two Willmore forms.
pub const TOL_WILLMORE_FORMS: f64 = 1e-10;
/// Relative agreement with a closed-form Willmore value.
pub const TOL_WILLMORE_EXACT: f64 = 1e-2;

/// Residual report of the full extract, induce and compare pipeline.
/// Returns the rows and the induced immersion; errors abort the pipeline.
pub fn induce_report(
    x: &Immersion,
    willmore_exact: Option<f64>,
) -> Result<(Vec<ReportRow>, Immersion), crate::weierstrass::WeierstrassError> {
    let ch = x.chart;
    let mut rows = vec![ReportRow::check("conformality", x.conformality_residual(), TOL_CONF)];
    // extract unconditionally; the conformality row carries the verdict
    let psi = extract_spinors_with(x, f64::INFINITY)?;
    let fc = frame_and_curvature(x)?;
    let p = fc.potential();
    let lam = psi.lambda();
    let lam_scale = ch.active_max(fc.lambda.iter().copied());
    let lam_err = ch.active_max(lam.iter().zip(&fc.lambda).map(|(a, b)| a - b)) / lam_scale;
    rows.push(ReportRow::check("lambda_consistency", lam_err, 1e-5));
    rows.push(ReportRow::check("dirac", dirac_residual(&psi, &p)?, TOL_CLOSED));
    let closed = check_closed(&psi)?;
    rows.push(ReportRow::check("closedness_plus", closed.r_plus, TOL_CLOSED));
    rows.push(ReportRow::check("closedness_3", closed.r_3, TOL_CLOSED));
    let (e1, e3) = structure_residuals(x, &fc)?;
    rows.push(ReportRow::check("structure_laplace", e1, TOL_STRUCTURE));
    rows.push(ReportRow::check("structure_hopf", e3, TOL_STRUCTURE));
    let (h1, h2) = hopf_residuals(&psi, &fc)?;
    rows.push(ReportRow::check("hopf_psi1", h1, TOL_STRUCTURE));
    rows.push(ReportRow::check("hopf_psi2", h2, TOL_STRUCTURE));
    let centre = ch.n / 2;
    let base = centre * ch.n + centre;
    let induced = induce_surface_with(&psi, (centre, centre), f64::INFINITY)?;
    rows.push(ReportRow::check("path_independence", induced.path_residual, 10.0 * TOL_CLOSED));
    rows.push(ReportRow::check(
        "round_trip",
        induced.immersion.max_distance(&x.translated(base)),
        1e-5,
    ));
    let wg = willmore_geometric(&fc);
    let wp = willmore_from_p(&ch, &p);
    rows.push(ReportRow::info("willmore_geometric", wg));
    rows.push(ReportRow::info("willmore_2int_p2", wp));
    let scale = wg.abs().max(wp.abs());
    let forms = if scale == 0.0 { 0.0 } else { (wg - wp).abs() / scale };
    rows.push(ReportRow::check("willmore_forms_rel", forms, TOL_WILLMORE_FORMS));
    if let Some(exact) = willmore_exact {
        rows.push(ReportRow::info("willmore_exact", exact));
        let d = if exact == 0.0 { wg.abs() } else { (wg - exact).abs() / exact.abs() };
        rows.push(ReportRow::check("willmore_exact_rel", d, TOL_WILLMORE_EXACT));
    }
    if let Some(per) = induced.periods {
        for (axis, v) in [("x", per.along_x), ("y", per.along_y)] {
            for (c, val) in v.iter().enumerate() {
                rows.push(ReportRow::info(&format!("period_{axis}_{}", c + 1), *val));
            }
        }
    }
    Ok((rows, induced.immersion))
}

pub fn run_induce(cli: &Cli, args: &InduceArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let (x, exact) = match (&args.builtin, &args.input) {
        (Some(name), _) => match builtin(name) {
            Ok(b) => (b.immersion, b.willmore_exact),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_ERROR;
            }
        },
        (None, Some(dir)) => match read_immersion(dir) {
            Ok(x) => (x, None),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_ERROR;
            }
        },
        (None, None) => unreachable!("clap requires a source"),
    };
    let (rows, induced) = match induce_report(&x, exact) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAIL;
        }
    };
    let csv = report_csv(&rows);
    let _ = out.write_all(csv.as_bytes());
    if let Some(path) = &args.report {
        if let Err(e) = fs::write(path, &csv) {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return EXIT_ERROR;
        }
    }
    if let Some(path) = &cli.out {
        if let Err(e) = export_obj(path, &induced) {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    }
    if rows.iter().all(ReportRow::passed) {
        EXIT_OK
    } else {
        let failed: Vec<&str> = rows.iter().filter(|r| !r.passed()).map(|r| r.quantity.as_str()).collect();
        let _ = writeln!(err, "residuals over tolerance: {}", failed.join(", "));
        EXIT_FAIL
    }
}

/// Relative error bound of the d-bar self-check.
pub const TOL_DBAR: f64 = 1e-13;

pub fn run_dbar_test(out: &mut dyn Write) -> u8 {
    let grid = Grid::standard(32).expect("valid grid");
    let mut worst = 0.0f64;
    for (mx, my) in [(1i64, 0i64), (0, 1), (3, -2), (-5, 7), (10, 10)] {
        let f = ComplexField::from_fn(grid, |x, y| Complex64::from_polar(1.0, mx as f64 * x + my as f64 * y));
        let sigma = symbol(Wirtinger::Dzbar, mx as f64, my as f64);
        let expect = f.scale(1.0 / sigma);
        let u = dbar_inverse(&f).expect("mean-free mode");
        let e = u.rel_diff(&expect);
        let back = wirtinger(&u, Wirtinger::Dzbar, 1).expect("order 1").rel_diff(&f);
        worst = worst.max(e).max(back);
        let _ = writeln!(out, "mode ({mx:>3},{my:>3}): inverse {e:.2e}, residual {back:.2e}");
    }
    let gauge = dbar_inverse(&ComplexField::constant(grid, Complex64::new(1.0, 0.0)));
    let obstruction = matches!(&gauge, Err(e) if e.to_string().starts_with("gauge obstruction"));
    let _ = writeln!(
        out,
        "constant input: {}",
        if obstruction { "gauge obstruction raised" } else { "NOT rejected" }
    );
    if worst <= TOL_DBAR && obstruction {
        let _ = writeln!(out, "dbar-test PASS (max relative error {worst:.2e})");
        EXIT_OK
    } else {
        let _ = writeln!(out, "dbar-test FAIL (max relative error {worst:.2e})");
        EXIT_FAIL
    }
}
