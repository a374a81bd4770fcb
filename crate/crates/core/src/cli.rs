//! Run configuration, reports and the subcommands of the `plevel` binary.
//!
//! The configuration is a TOML file; every key is optional:
//!
//! ```toml
//! p_list = [1.2, 1.5, 1.8]
//!
//! [grids]
//! r_max = 1e6          # outer radius of the sampled model
//! n_points = 4096
//! s_max = 1e4          # warped profiles extend to s_max * (mass or radius)
//! warp_points = 2048
//! flow_points = 3001
//!
//! [tolerances]
//! ode_rel = 1e-10
//! quad_rel = 1e-10
//! accept_rel = 1e-6
//! slope_slack = 1e-8
//!
//! [outputs]
//! csv_dir = "out"
//! report_path = "out/report.json"
//!
//! [[families]]
//! kind = "schwarzschild"
//! mass = 2.0
//!
//! [[families]]
//! kind = "bumped"
//! mass = 1.0
//! eps = 0.1
//! bump = { start = 1.0, end = 4.0 }
//!
//! [[families]]
//! kind = "euclidean"
//! radius = 1.0
//! ```
//!
//! Every CSV starts with a `# plevel <version>` line followed by a header row;
//! numbers use the shortest decimal that round-trips.
//!
//! | file | columns |
//! |------|---------|
//! | `model_p{p}.csv` | `r,u,du,t,W,dWdt` |
//! | `model_constants.csv` | `p,Cs,Kp,c_fit,c_quoted,c_tilde,W0` |
//! | `coeffs_{decaying,growing}_p{p}.csv` | `r,t,f,g,h` |
//! | `coeff_constants.csv` | `p,flavor,f0,g0,h0,Q_model` |
//! | `flow_p{p}_{i}_{tag}.csv` | `s,t,phi,u,W,dWdt,H,R,hawking` |
//! | `q_{decaying,growing}_p{p}_{i}_{tag}.csv` | `t,Q` |
//! | `sweep.csv` | `p,tag,params,Cp,Kp,adm,margin,min_slope_dec,min_slope_grow,equality,status` |
//!
//! `{i}` is the index of the family in the configuration. The JSON report
//! holds one [`VerificationReport`] per `(p, family)` cell.
//!
//! Exit codes: 0 when every check passes, 1 when a check or computation
//! fails, 2 for configuration and I/O errors.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{solve_decaying, solve_growing, DEFAULT_EPSILON};
use crate::numerics::{csv_row, fmt_real, SampledCurve};
use crate::schwarzschild::{c_constants, model_profile};
use crate::verify::{verify_cell, CellOutcome, Grids, ModelBundle, VerificationReport};
use crate::warped::Family;
use crate::{check_p, Error, Result, Tolerances, VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub csv_dir: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub p_list: Vec<f64>,
    pub families: Vec<Family>,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub outputs: Outputs,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p_list: vec![1.2, 1.5, 1.8],
            families: vec![
                Family::Schwarzschild { mass: 2.0 },
                Family::bumped(1.0, 0.05),
                Family::bumped(1.0, 0.1),
            ],
            grids: Grids::default(),
            tolerances: Tolerances::default(),
            outputs: Outputs::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let config = |e: Error| Error::Config(e.to_string());
        if self.p_list.is_empty() {
            return Err(Error::Config("p_list is empty".into()));
        }
        for &p in &self.p_list {
            check_p(p).map_err(config)?;
        }
        if self.families.is_empty() {
            return Err(Error::Config("families is empty".into()));
        }
        for f in &self.families {
            let (scale, name) = match *f {
                Family::Schwarzschild { mass } | Family::Bumped { mass, .. } => (mass, "mass"),
                Family::Euclidean { radius } => (radius, "radius"),
            };
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::Config(format!(
                    "{} family needs {name} > 0",
                    f.tag()
                )));
            }
        }
        let g = &self.grids;
        if !(g.r_max >= 1e4 && g.r_max.is_finite()) {
            return Err(Error::Config(format!(
                "grids.r_max = {} must be >= 1e4",
                g.r_max
            )));
        }
        if g.n_points < 64 || g.warp_points < 64 || g.flow_points < 64 {
            return Err(Error::Config("grids need at least 64 points".into()));
        }
        if !(g.s_max >= 10.0 && g.s_max.is_finite()) {
            return Err(Error::Config(format!(
                "grids.s_max = {} must be >= 10",
                g.s_max
            )));
        }
        self.tolerances.validate().map_err(config)
    }
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub tag: String,
    pub params: String,
    pub cp: Option<f64>,
    pub kp: f64,
    pub adm: Option<f64>,
    pub margin: Option<f64>,
    pub min_slope_dec: Option<f64>,
    pub min_slope_grow: Option<f64>,
    pub equality: bool,
    pub status: String,
}

pub const SWEEP_HEADER: &str =
    "p,tag,params,Cp,Kp,adm,margin,min_slope_dec,min_slope_grow,equality,status";

/// `key=value` pairs separated by spaces, so the field needs no quoting.
pub fn family_params(f: &Family) -> String {
    match *f {
        Family::Schwarzschild { mass } => format!("mass={mass}"),
        Family::Bumped { mass, eps, bump } => {
            format!(
                "mass={mass} eps={eps} start={} end={}",
                bump.start, bump.end
            )
        }
        Family::Euclidean { radius } => format!("radius={radius}"),
    }
}

impl SweepRow {
    pub fn from_report(r: &VerificationReport) -> Self {
        let status = match r.checks.iter().find(|c| !c.passed) {
            None => "pass".to_string(),
            Some(c) => format!("fail:{}", c.name),
        };
        Self {
            p: r.p,
            tag: r.family.clone(),
            params: family_params(&r.params),
            cp: r.cp,
            kp: r.kp,
            adm: r.adm,
            margin: r.margin,
            min_slope_dec: r.min_slope_qstar,
            min_slope_grow: r.min_slope_qgrow,
            equality: r.equality,
            status,
        }
    }

    pub fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_real(self.p),
            self.tag,
            self.params,
            opt(self.cp),
            fmt_real(self.kp),
            opt(self.adm),
            opt(self.margin),
            opt(self.min_slope_dec),
            opt(self.min_slope_grow),
            self.equality,
            self.status
        )
    }
}

/// JSON report written by `verify`, `sweep` and `suite`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub passed: bool,
    pub cells: Vec<VerificationReport>,
}

/// Cells in `(p, family index)` order, whatever the scheduling.
pub fn run_cells(cfg: &RunConfig) -> Result<Vec<CellOutcome>> {
    let bundles: Vec<ModelBundle> = cfg
        .p_list
        .par_iter()
        .map(|&p| ModelBundle::new(p, &cfg.grids, &cfg.tolerances))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..bundles.len())
        .flat_map(|i| (0..cfg.families.len()).map(move |j| (i, j)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(i, j)| verify_cell(&bundles[i], cfg.families[j], &cfg.grids, &cfg.tolerances))
        .collect())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    fs::create_dir_all(dir)?;
    let mut out = BufWriter::new(fs::File::create(dir.join(name))?);
    writeln!(out, "# {VERSION}")?;
    Ok(out)
}

fn csv_dir(cfg: &RunConfig) -> PathBuf {
    cfg.outputs
        .csv_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Model curves and constants for every `p`.
pub fn cmd_model(cfg: &RunConfig) -> Result<()> {
    let dir = csv_dir(cfg);
    let models: Vec<_> = cfg
        .p_list
        .par_iter()
        .map(|&p| {
            let m = model_profile(p, cfg.grids.r_max, cfg.grids.n_points)?;
            let c = c_constants(&m)?;
            Ok((m, c))
        })
        .collect::<Result<_>>()?;
    let mut consts = create(&dir, "model_constants.csv")?;
    writeln!(consts, "p,Cs,Kp,c_fit,c_quoted,c_tilde,W0")?;
    for (m, c) in &models {
        m.write_csv(create(&dir, &format!("model_p{}.csv", m.p))?)?;
        let row = [
            m.p,
            m.functions.flux_constant,
            m.kp,
            c.c_fit,
            c.c_quoted,
            m.c_tilde,
            m.functions.point(1.0).w,
        ];
        writeln!(consts, "{}", csv_row(&row))?;
    }
    consts.flush()?;
    Ok(())
}

/// Both coefficient triples for every `p`.
pub fn cmd_coeffs(cfg: &RunConfig) -> Result<()> {
    let dir = csv_dir(cfg);
    let sols: Vec<_> = cfg
        .p_list
        .par_iter()
        .map(|&p| {
            let m = model_profile(p, cfg.grids.r_max, cfg.grids.n_points)?;
            Ok((
                p,
                solve_decaying(&m, &cfg.tolerances)?,
                solve_growing(&m, DEFAULT_EPSILON)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut consts = create(&dir, "coeff_constants.csv")?;
    writeln!(consts, "p,flavor,f0,g0,h0,Q_model")?;
    for (p, dec, gro) in &sols {
        for (name, s) in [("decaying", dec), ("growing", gro)] {
            s.write_csv(create(&dir, &format!("coeffs_{name}_p{p}.csv"))?)?;
            let at = |c: &SampledCurve| c.values()[0];
            let row = csv_row(&[at(&s.f_curve), at(&s.g_curve), at(&s.h_curve), s.model_q()]);
            writeln!(consts, "{},{name},{row}", fmt_real(*p))?;
        }
    }
    consts.flush()?;
    Ok(())
}

fn write_report(cfg: &RunConfig, reports: &[VerificationReport]) -> Result<SuiteReport> {
    let report = SuiteReport {
        version: VERSION.into(),
        passed: reports.iter().all(|r| r.passed()),
        cells: reports.to_vec(),
    };
    if let Some(path) = &cfg.outputs.report_path {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(path, text + "\n")?;
    }
    Ok(report)
}

fn write_cell_curves(cfg: &RunConfig, cells: &[CellOutcome]) -> Result<()> {
    let dir = csv_dir(cfg);
    let nf = cfg.families.len();
    for (k, cell) in cells.iter().enumerate() {
        let r = &cell.report;
        let stem = format!("p{}_{}_{}", r.p, k % nf, r.family);
        if let Some(f) = &cell.flow {
            f.write_csv(create(&dir, &format!("flow_{stem}.csv"))?)?;
        }
        if let Some(q) = &cell.q_star {
            q.write_csv(create(&dir, &format!("q_decaying_{stem}.csv"))?)?;
        }
        if let Some(q) = &cell.q_grow {
            q.write_csv(create(&dir, &format!("q_growing_{stem}.csv"))?)?;
        }
    }
    Ok(())
}

/// Full pipeline per cell, curves and the JSON report.
pub fn cmd_verify(cfg: &RunConfig) -> Result<SuiteReport> {
    let cells = run_cells(cfg)?;
    write_cell_curves(cfg, &cells)?;
    let reports: Vec<_> = cells.into_iter().map(|c| c.report).collect();
    write_report(cfg, &reports)
}

/// One `sweep.csv` row per cell, plus the JSON report when configured.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(SuiteReport, Vec<SweepRow>)> {
    let reports: Vec<_> = run_cells(cfg)?.into_iter().map(|c| c.report).collect();
    let rows: Vec<SweepRow> = reports.iter().map(SweepRow::from_report).collect();
    let mut out = create(&csv_dir(cfg), "sweep.csv")?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in &rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    out.flush()?;
    Ok((write_report(cfg, &reports)?, rows))
}

/// Everything: model, coefficients, curves, sweep table and report.
pub fn cmd_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    cmd_model(cfg)?;
    cmd_coeffs(cfg)?;
    let cells = run_cells(cfg)?;
    write_cell_curves(cfg, &cells)?;
    let reports: Vec<_> = cells.into_iter().map(|c| c.report).collect();
    let mut out = create(&csv_dir(cfg), "sweep.csv")?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in &reports {
        writeln!(out, "{}", SweepRow::from_report(r).csv_line())?;
    }
    out.flush()?;
    write_report(cfg, &reports)
}

#[derive(Debug, Parser)]
#[command(
    name = "plevel",
    version,
    about = "Monotone level-set quantities and the p-Penrose inequality"
)]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// override p_list (repeatable or comma-separated)
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// output directory for CSV files and report.json
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// override tolerances.accept_rel
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// model curves and constants
    Model,
    /// decaying and growing coefficient triples
    Coeffs,
    /// full verification report
    Verify,
    /// one CSV row per (p, family)
    Sweep,
    /// model, coeffs, verify and sweep
    Suite,
}

impl Cli {
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.p.is_empty() {
            cfg.p_list = self.p.clone();
        }
        if let Some(dir) = &self.out {
            cfg.outputs.csv_dir = Some(dir.clone());
            cfg.outputs.report_path = Some(dir.join("report.json"));
        }
        if let Some(t) = self.tol {
            cfg.tolerances.accept_rel = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summarize(report: &SuiteReport) {
    for r in &report.cells {
        let failed: Vec<&str> = r
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        let margin = r
            .margin
            .map(|m| format!("{m:.3e}"))
            .unwrap_or_else(|| "-".into());
        if failed.is_empty() {
            println!(
                "PASS p={} {} {} margin={margin} equality={}",
                r.p,
                r.family,
                family_params(&r.params),
                r.equality
            );
        } else {
            println!(
                "FAIL p={} {} {} [{}]",
                r.p,
                r.family,
                family_params(&r.params),
                failed.join(", ")
            );
        }
    }
}

/// Runs one invocation and maps the outcome to the exit-code contract.
pub fn run(cli: &Cli) -> ExitCode {
    let cfg = match cli.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("plevel: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Model => cmd_model(&cfg).map(|_| true),
        Command::Coeffs => cmd_coeffs(&cfg).map(|_| true),
        Command::Verify => cmd_verify(&cfg).map(|r| {
            summarize(&r);
            r.passed
        }),
        Command::Sweep => cmd_sweep(&cfg).map(|(r, _)| {
            summarize(&r);
            r.passed
        }),
        Command::Suite => cmd_suite(&cfg).map(|r| {
            summarize(&r);
            r.passed
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Config(_) | Error::Io(_))) => {
            eprintln!("plevel: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("plevel: {e}");
            ExitCode::from(1)
        }
    }
}
