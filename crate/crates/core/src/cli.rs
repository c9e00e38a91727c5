//! Command-line driver.
//!
//! Settings resolve as built-in defaults, then `--config` file (plain
//! `key=value` lines, keys named like the long flags), then flags. Each run
//! writes `<outdir>/<subcommand>-<timestamp>.{csv,md,json}`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::dofs::DofMap;
use crate::error::{Error, Result};
use crate::experiments::bench::{run_precond_bench, BenchCase, BenchOptions, BenchPoint, BenchTable, TableId};
use crate::experiments::cantilever::{run_cantilever, CantileverRun};
use crate::experiments::cases::{CantileverCase, ManufacturedCase};
use crate::experiments::convergence::{run_convergence, ConvergenceTable};
use crate::experiments::output::{bench_csv, bench_markdown, convergence_csv, convergence_markdown, markdown_table};
use crate::krylov::GmresOptions;
use crate::mesh::Mesh;
use crate::par::Exec;
use crate::params::PhysicalParams;
use crate::precond::{InnerSolve, PrecondConfig, PrecondKind};
use crate::system::{assemble_full, schur_discrepancy, step, LinearSolver, Scheme, State};

#[derive(Parser, Debug)]
#[command(name = "hybrid-biot", version, about = "Stabilized hybrid mixed FEM for Biot poroelasticity")]
pub struct Cli {
    /// Plain `key=value` settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Manufactured-solution error table.
    Convergence(#[command(flatten)] Overrides),
    /// Cantilever bracket pressure and oscillation index.
    Cantilever(#[command(flatten)] Overrides),
    /// Preconditioner iteration counts.
    PrecondBench {
        /// One of the reference sweeps: 3, 3b, 4, 5. Without it the sweep is
        /// the product of the K, nu, tau and N lists.
        #[arg(long)]
        table: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// One time step of the manufactured problem.
    SingleSolve {
        /// Compare the condensed solve with the direct full solve.
        #[arg(long)]
        check_schur: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct Overrides {
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long = "K", value_delimiter = ',')]
    pub k: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    #[arg(long = "E")]
    pub young: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "M")]
    pub biot_modulus: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// `direct`, or preconditioner labels such as `D,U,L,D^,U^,L^`.
    #[arg(long, value_delimiter = ',')]
    pub precond: Option<Vec<String>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub inner_max_iter: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub outdir: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("bad value '{v}' for '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| parse(key, s)).collect()
}

impl Overrides {
    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "N" => self.n = Some(parse_list(key, v)?),
            "K" => self.k = Some(parse_list(key, v)?),
            "nu" => self.nu = Some(parse_list(key, v)?),
            "E" => self.young = Some(parse(key, v)?),
            "lambda" => self.lambda = Some(parse(key, v)?),
            "mu" => self.mu = Some(parse(key, v)?),
            "alpha" => self.alpha = Some(parse(key, v)?),
            "M" => self.biot_modulus = Some(parse(key, v)?),
            "tau" => self.tau = Some(parse_list(key, v)?),
            "steps" => self.steps = Some(parse(key, v)?),
            "scheme" => self.scheme = Some(v.trim().parse()?),
            "precond" => self.precond = Some(v.split(',').map(|s| s.trim().to_string()).collect()),
            "tol" => self.tol = Some(parse(key, v)?),
            "max-iter" | "max_iter" => self.max_iter = Some(parse(key, v)?),
            "inner-tol" | "inner_tol" => self.inner_tol = Some(parse(key, v)?),
            "inner-max-iter" | "inner_max_iter" => self.inner_max_iter = Some(parse(key, v)?),
            "reps" => self.reps = Some(parse(key, v)?),
            "seed" => self.seed = Some(parse(key, v)?),
            "case" => self.case = Some(v.trim().to_string()),
            "outdir" => self.outdir = Some(PathBuf::from(v.trim())),
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn from_config_text(text: &str) -> Result<Overrides> {
        let mut o = Overrides::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {} is not key=value: '{line}'", i + 1)))?;
            o.set(k.trim(), v)?;
        }
        Ok(o)
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            n, k, nu, young, lambda, mu, alpha, biot_modulus, tau, steps, scheme, precond, tol, max_iter, inner_tol,
            inner_max_iter, reps, seed, case, outdir
        )
    }

    fn single<T: Copy>(name: &str, v: &Option<Vec<T>>, default: T) -> Result<T> {
        match v.as_deref() {
            None => Ok(default),
            Some([x]) => Ok(*x),
            Some(_) => Err(Error::Config(format!("'{name}' takes a single value here"))),
        }
    }

    fn check_nu(&self) -> Result<()> {
        for &nu in self.nu.iter().flatten() {
            if !(0.0..0.5).contains(&nu) {
                return Err(Error::Config(format!("Poisson ratio {nu} outside [0, 0.5)")));
            }
        }
        Ok(())
    }

    fn gmres(&self) -> GmresOptions {
        let d = GmresOptions::default();
        GmresOptions { tol: self.tol.unwrap_or(d.tol), max_iter: self.max_iter.unwrap_or(d.max_iter), restart: d.restart }
    }

    fn precond_configs(&self, default: &[&str]) -> Result<Vec<PrecondConfig>> {
        let labels: Vec<String> = match &self.precond {
            Some(v) => v.clone(),
            None => default.iter().map(|s| s.to_string()).collect(),
        };
        let d = PrecondConfig::new(PrecondKind::Diag, InnerSolve::Exact);
        labels
            .iter()
            .map(|l| {
                let (kind, inner) = match l.strip_suffix('^') {
                    Some(k) => (k, InnerSolve::Inexact),
                    None => (l.as_str(), InnerSolve::Exact),
                };
                let c = PrecondConfig {
                    inner_tol: self.inner_tol.unwrap_or(d.inner_tol),
                    inner_max_iter: self.inner_max_iter.unwrap_or(d.inner_max_iter),
                    ..PrecondConfig::new(kind.parse()?, inner)
                };
                c.validate()?;
                Ok(c)
            })
            .collect()
    }

    /// `None` for a direct solve.
    fn linear_solver(&self) -> Result<LinearSolver> {
        match self.precond.as_deref() {
            None => Ok(LinearSolver::Direct),
            Some([d]) if d == "direct" => Ok(LinearSolver::Direct),
            Some([_]) => {
                let precond = self.precond_configs(&[])?.remove(0);
                Ok(LinearSolver::Krylov { precond, gmres: self.gmres() })
            }
            Some(_) => Err(Error::Config("a single preconditioner is expected here".into())),
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(report) => {
            println!("{report}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

struct Outcome {
    csv: Vec<u8>,
    markdown: String,
    summary: serde_json::Value,
    failed: Option<String>,
}

fn execute(cli: Cli) -> Result<String> {
    let file = match &cli.config {
        Some(p) => Overrides::from_config_text(&std::fs::read_to_string(p)?)?,
        None => Overrides::default(),
    };
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let (name, flags, table, check_schur) = match cli.command {
        Command::Convergence(o) => ("convergence", o, None, false),
        Command::Cantilever(o) => ("cantilever", o, None, false),
        Command::PrecondBench { table, overrides } => ("precond-bench", overrides, table, false),
        Command::SingleSolve { check_schur, overrides } => ("single-solve", overrides, None, check_schur),
    };
    let o = flags.over(file);
    o.check_nu()?;
    let started = chrono::Utc::now();
    let (resolved, outcome) = match name {
        "convergence" => convergence(&o, exec)?,
        "cantilever" => cantilever(&o, exec)?,
        "precond-bench" => precond_bench(&o, table.as_deref(), exec)?,
        _ => single_solve(&o, check_schur, exec)?,
    };
    let outdir = o.outdir.clone().unwrap_or_else(|| PathBuf::from("results"));
    let stamp = started.format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let paths = write_outputs(&outdir, name, &stamp, &resolved, &outcome, exec)?;
    let mut report = outcome.markdown.clone();
    for p in &paths {
        report.push_str(&format!("wrote {}\n", p.display()));
    }
    match outcome.failed {
        Some(msg) => Err(Error::NotConvergedSweep(msg)),
        None => Ok(report),
    }
}

fn write_outputs(
    outdir: &Path,
    name: &str,
    stamp: &str,
    resolved: &serde_json::Value,
    outcome: &Outcome,
    exec: Exec,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(outdir)?;
    let base = outdir.join(format!("{name}-{stamp}"));
    let csv = base.with_extension("csv");
    let md = base.with_extension("md");
    let js = base.with_extension("json");
    std::fs::write(&csv, &outcome.csv)?;
    std::fs::write(&md, format!("<!-- config: {resolved} -->\n\n{}", outcome.markdown))?;
    let meta = json!({
        "subcommand": name,
        "timestamp": stamp,
        "config": resolved,
        "exec": exec,
        "versions": {
            "hybrid-biot": env!("CARGO_PKG_VERSION"),
            "parallel_feature": cfg!(feature = "parallel"),
        },
        "summary": outcome.summary,
        "failure": outcome.failed,
    });
    serde_json::to_writer_pretty(BufWriter::new(File::create(&js)?), &meta)?;
    Ok(vec![csv, md, js])
}

fn manufactured_case(o: &Overrides) -> Result<ManufacturedCase> {
    let d = ManufacturedCase::default();
    let c = ManufacturedCase {
        lambda: o.lambda.unwrap_or(d.lambda),
        mu: o.mu.unwrap_or(d.mu),
        alpha: o.alpha.unwrap_or(d.alpha),
        biot_modulus: o.biot_modulus.unwrap_or(d.biot_modulus),
        tau: Overrides::single("tau", &o.tau, d.tau)?,
        t_max: d.t_max,
    };
    if let Some(s) = o.steps {
        return Ok(ManufacturedCase { t_max: c.tau * s as f64, ..c });
    }
    Ok(c)
}

fn convergence(o: &Overrides, exec: Exec) -> Result<(serde_json::Value, Outcome)> {
    let case = manufactured_case(o)?;
    case.params(1.0)?;
    let scheme = o.scheme.unwrap_or(Scheme::Stabilized);
    let ks = o.k.clone().unwrap_or_else(|| vec![1e-4, 1e-6, 1e-8, 1e-10]);
    let ns = o.n.clone().unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
    for &k in &ks {
        case.params(k)?;
    }
    let resolved = json!({
        "case": case, "scheme": scheme, "K": ks, "N": ns, "steps": case.steps(),
        "energy_norm": "a(u - u_h, u - u_h) with the bubble part of u_h",
    });
    let t: ConvergenceTable = run_convergence(&case, scheme, &ks, &ns, exec);
    let mut csv = Vec::new();
    convergence_csv(&t, &resolved, &mut csv)?;
    let failed = t.cells.iter().find_map(|c| c.failure.clone());
    Ok((resolved, Outcome { csv, markdown: convergence_markdown(&t), summary: serde_json::to_value(&t)?, failed }))
}

fn cantilever(o: &Overrides, exec: Exec) -> Result<(serde_json::Value, Outcome)> {
    let d = CantileverCase::default();
    let case = CantileverCase {
        young: o.young.unwrap_or(d.young),
        poisson: Overrides::single("nu", &o.nu, d.poisson)?,
        permeability: Overrides::single("K", &o.k, d.permeability)?,
        alpha: o.alpha.unwrap_or(d.alpha),
        biot_modulus: o.biot_modulus.unwrap_or(d.biot_modulus),
        tau: Overrides::single("tau", &o.tau, d.tau)?,
        steps: o.steps.unwrap_or(d.steps),
        traction: d.traction,
    };
    case.params()?;
    let n = Overrides::single("N", &o.n, DEFAULT_CANTILEVER_N)?;
    let solver = o.linear_solver()?;
    let schemes = match o.scheme {
        Some(s) => vec![s],
        None => vec![Scheme::Stabilized, Scheme::Unstabilized],
    };
    let resolved = json!({
        "case": case, "N": n, "schemes": schemes,
        "solver": o.precond.clone().unwrap_or_else(|| vec!["direct".into()]),
        "gmres": o.gmres(),
    });
    let runs: Vec<CantileverRun> = schemes.iter().map(|&s| run_cantilever(&case, s, n, &solver, exec)).collect::<Result<_>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "triangle", "x", "y", "pressure"])?;
    for r in &runs {
        for (t, (c, p)) in r.centroids.iter().zip(&r.pressure).enumerate() {
            w.write_record([r.scheme.to_string(), t.to_string(), format!("{:.6}", c[0]), format!("{:.6}", c[1]), format!("{p:e}")])?;
        }
    }
    let mut csv = format!("# config: {resolved}\n").into_bytes();
    csv.extend(w.into_inner().map_err(|e| Error::Io(e.into_error()))?);
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|r| {
            let (lo, hi) = r.pressure.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| (a.min(p), b.max(p)));
            vec![r.scheme.to_string(), format!("{:.4}", r.oscillation), format!("{lo:.4e}"), format!("{hi:.4e}")]
        })
        .collect();
    let headers: Vec<String> = ["scheme", "oscillation index", "min p", "max p"].map(String::from).to_vec();
    let mut markdown = format!("Cantilever at t = {}, N = {n}\n\n", case.final_time());
    markdown.push_str(&markdown_table(&headers, &rows));
    let summary = json!(runs
        .iter()
        .map(|r| json!({"scheme": r.scheme, "oscillation": r.oscillation, "iterations": r.iterations}))
        .collect::<Vec<_>>());
    Ok((resolved, Outcome { csv, markdown, summary, failed: None }))
}

/// Mesh used for the cantilever pressure snapshots.
pub const DEFAULT_CANTILEVER_N: usize = 64;

fn custom_points(o: &Overrides) -> Result<Vec<BenchPoint>> {
    let case = match o.case.as_deref().unwrap_or("manufactured") {
        "manufactured" => BenchCase::Manufactured,
        "cantilever" => BenchCase::Cantilever,
        other => return Err(Error::Config(format!("unknown case '{other}'"))),
    };
    let ns = o.n.clone().unwrap_or_else(|| vec![64]);
    let taus = o.tau.clone().unwrap_or_else(|| vec![1.0]);
    let mut points = Vec::new();
    let (mc, cc) = (ManufacturedCase::default(), CantileverCase::default());
    let ks = o.k.clone().unwrap_or_else(|| vec![if case == BenchCase::Cantilever { cc.permeability } else { 1e-6 }]);
    for &k in &ks {
        for &tau in &taus {
            for &n in &ns {
                let mut make = |params: PhysicalParams, nu: Option<f64>| {
                    let row = nu.map_or_else(|| format!("K={k:e}"), |nu| format!("K={k:e} nu={nu}"));
                    points.push(BenchPoint { case, params, n, row, column: format!("tau={tau} h=1/{n}") });
                };
                match (&o.nu, case) {
                    (Some(nus), _) => {
                        for &nu in nus {
                            let e = o.young.unwrap_or(if case == BenchCase::Cantilever { cc.young } else { 1.0 });
                            let (a, m) = match case {
                                BenchCase::Cantilever => (o.alpha.unwrap_or(cc.alpha), o.biot_modulus.unwrap_or(cc.biot_modulus)),
                                BenchCase::Manufactured => (o.alpha.unwrap_or(mc.alpha), o.biot_modulus.unwrap_or(mc.biot_modulus)),
                            };
                            make(PhysicalParams::from_young(e, nu, a, m, k, tau)?, Some(nu));
                        }
                    }
                    (None, BenchCase::Manufactured) => make(
                        PhysicalParams::new(
                            o.lambda.unwrap_or(mc.lambda),
                            o.mu.unwrap_or(mc.mu),
                            o.alpha.unwrap_or(mc.alpha),
                            o.biot_modulus.unwrap_or(mc.biot_modulus),
                            k,
                            tau,
                        )?,
                        None,
                    ),
                    (None, BenchCase::Cantilever) => make(
                        PhysicalParams::from_young(
                            o.young.unwrap_or(cc.young),
                            cc.poisson,
                            o.alpha.unwrap_or(cc.alpha),
                            o.biot_modulus.unwrap_or(cc.biot_modulus),
                            k,
                            tau,
                        )?,
                        None,
                    ),
                }
            }
        }
    }
    Ok(points)
}

fn precond_bench(o: &Overrides, table: Option<&str>, exec: Exec) -> Result<(serde_json::Value, Outcome)> {
    let d = BenchOptions::default();
    let opts = BenchOptions {
        repetitions: o.reps.unwrap_or(d.repetitions),
        seed: o.seed.unwrap_or(d.seed),
        gmres: o.gmres(),
        inner_tol: o.inner_tol.unwrap_or(d.inner_tol),
        inner_max_iter: o.inner_max_iter.unwrap_or(d.inner_max_iter),
    };
    let variants = o.precond_configs(&["D", "U", "L", "D^", "U^", "L^"])?;
    let table: Option<TableId> = table.map(str::parse).transpose()?;
    let points = match table {
        Some(t) => t.points(),
        None => custom_points(o)?,
    };
    let resolved = json!({ "table": table.map(|t| t.name()), "options": opts, "variants": variants, "points": points });
    let mut t: BenchTable = run_precond_bench(&points, &variants, &opts, exec);
    t.table = table;
    let mut csv = Vec::new();
    bench_csv(&t, &resolved, &mut csv)?;
    let failed = t
        .cells
        .iter()
        .find(|c| !c.converged)
        .map(|c| format!("{} at {} {}", c.variant, t.points[c.point].row, t.points[c.point].column));
    let summary = serde_json::to_value(&t.cells)?;
    Ok((resolved, Outcome { csv, markdown: bench_markdown(&t), summary, failed }))
}

fn single_solve(o: &Overrides, check_schur: bool, exec: Exec) -> Result<(serde_json::Value, Outcome)> {
    let case = manufactured_case(o)?;
    let k = Overrides::single("K", &o.k, 1e-6)?;
    let n = Overrides::single("N", &o.n, 8)?;
    let scheme = o.scheme.unwrap_or(Scheme::Stabilized);
    let params = case.params(k)?;
    let solver = o.linear_solver()?;
    let resolved = json!({
        "case": case, "K": k, "N": n, "scheme": scheme, "check_schur": check_schur,
        "solver": o.precond.clone().unwrap_or_else(|| vec!["direct".into()]), "gmres": o.gmres(),
    });
    let mesh = Mesh::uniform(n)?;
    let bc = case.boundary();
    let dofs = DofMap::build(&mesh, &bc, scheme.has_bubbles())?;
    let forcing = case.forcing();
    let prev = State::with_pressure(&dofs, ManufacturedCase::pressure([0.0, 0.0]));
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut summary = BTreeMap::new();
    let (_, report) = step(&prev, &mesh, &dofs, &params, &bc, &forcing, scheme, &solver, exec)?;
    rows.push(vec!["iterations".into(), report.iterations.to_string()]);
    rows.push(vec!["final relative residual".into(), format!("{:.3e}", report.final_residual())]);
    summary.insert("iterations".to_string(), json!(report.iterations));
    summary.insert("final_residual".to_string(), json!(report.final_residual()));
    let mut failed = None;
    if check_schur {
        let sys = assemble_full(&mesh, &dofs, &params, &bc, &forcing, &prev, scheme, exec)?;
        let diffs = schur_discrepancy(&sys, &dofs)?;
        let names = ["bubble", "linear", "pressure", "multiplier", "velocity"];
        for (name, d) in names.iter().zip(diffs) {
            rows.push(vec![format!("full vs condensed: {name}"), format!("{d:.3e}")]);
        }
        let worst = diffs.iter().copied().fold(0.0, f64::max);
        rows.push(vec!["full vs condensed: max".into(), format!("{worst:.3e}")]);
        summary.insert("schur_discrepancy".to_string(), json!(diffs));
        if !(worst <= 1e-9) {
            failed = Some(format!("condensed solve differs from full solve by {worst:e}"));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "value"])?;
    for r in &rows {
        w.write_record(r)?;
    }
    let mut csv = format!("# config: {resolved}\n").into_bytes();
    csv.extend(w.into_inner().map_err(|e| Error::Io(e.into_error()))?);
    let markdown = markdown_table(&["quantity".to_string(), "value".to_string()], &rows);
    Ok((resolved, Outcome { csv, markdown, summary: json!(summary), failed }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_precedence() {
        let file = Overrides::from_config_text("# comment\nK = 1e-8\nN=4,8\nnu=0.3\n").unwrap();
        let flags = Overrides { n: Some(vec![16]), ..Overrides::default() };
        let o = flags.over(file);
        assert_eq!(o.n, Some(vec![16]));
        assert_eq!(o.k, Some(vec![1e-8]));
        assert_eq!(o.nu, Some(vec![0.3]));
        assert!(Overrides::from_config_text("bogus=1").is_err());
        assert!(Overrides::from_config_text("no equals sign").is_err());
    }

    #[test]
    fn rejects_incompressible_limit() {
        let o = Overrides { nu: Some(vec![0.5]), ..Overrides::default() };
        assert!(o.check_nu().is_err());
        assert_eq!(run(["hybrid-biot", "cantilever", "--nu", "0.5", "--N", "2"]), 1);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["hybrid-biot", "convergence", "--bogus"]), 2);
    }

    #[test]
    fn precond_labels() {
        let o = Overrides { precond: Some(vec!["L^".into(), "D".into()]), ..Overrides::default() };
        let c = o.precond_configs(&[]).unwrap();
        assert_eq!((c[0].kind, c[0].inner), (PrecondKind::Lower, InnerSolve::Inexact));
        assert_eq!((c[1].kind, c[1].inner), (PrecondKind::Diag, InnerSolve::Exact));
        assert!(matches!(o.linear_solver(), Err(Error::Config(_))));
    }
}
