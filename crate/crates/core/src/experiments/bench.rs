//! Iteration-count sweeps for the block preconditioners on the condensed system.
//!
//! Every cell solves `A x = 0` from seeded random initial guesses, so the
//! counts measure how fast FGMRES drives the error to zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dofs::{BoundarySpec, DofMap};
use crate::error::{Error, Result};
use crate::experiments::cases::{CantileverCase, ManufacturedCase};
use crate::krylov::{fgmres, GmresOptions};
use crate::mesh::Mesh;
use crate::par::{self, Exec};
use crate::params::PhysicalParams;
use crate::precond::{BlockPreconditioner, InnerSolve, InnerStatsSnapshot, PrecondConfig, PrecondKind};
use crate::system::{assemble_full, condense, CondensedSystem, Forcing, Scheme, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchCase {
    Manufactured,
    Cantilever,
}

impl BenchCase {
    pub fn boundary(self) -> BoundarySpec {
        match self {
            BenchCase::Manufactured => ManufacturedCase::default().boundary(),
            BenchCase::Cantilever => CantileverCase::default().boundary(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchPoint {
    pub case: BenchCase,
    pub params: PhysicalParams,
    pub n: usize,
    /// Row and column headers for the markdown layout.
    pub row: String,
    pub column: String,
}

/// The four reference sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TableId {
    /// Manufactured case, `E = 1`, `h = 1/64`, `tau = 1`: K sweep at `nu = 0`
    /// then nu sweep at `K = 1e-6`.
    KNu,
    /// Manufactured case, `lambda = 2`, `mu = 1`, `K = 1e-6`: tau rows, h columns.
    HTau,
    /// Cantilever, `h = 1/64`, `tau = 1`: K sweep at `nu = 0.45` then nu sweep
    /// at `K = 1e-7`.
    CantileverKNu,
    /// Cantilever, `nu = 0.45`, `K = 1e-7`: tau rows, h columns.
    CantileverHTau,
}

pub const K_SWEEP: [f64; 6] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12];
pub const NU_SWEEP: [f64; 6] = [0.0, 0.1, 0.2, 0.4, 0.45, 0.49];
pub const TAU_SWEEP: [f64; 5] = [1.0, 0.1, 0.01, 0.001, 0.0001];
pub const N_SWEEP: [usize; 5] = [4, 8, 16, 32, 64];

impl TableId {
    pub const ALL: [TableId; 4] = [TableId::KNu, TableId::HTau, TableId::CantileverKNu, TableId::CantileverHTau];

    pub fn name(self) -> &'static str {
        match self {
            TableId::KNu => "3",
            TableId::HTau => "3b",
            TableId::CantileverKNu => "4",
            TableId::CantileverHTau => "5",
        }
    }

    /// Point ranges that form a K sweep at fixed h and tau.
    pub fn k_rows(self) -> Vec<std::ops::Range<usize>> {
        match self {
            TableId::KNu | TableId::CantileverKNu => vec![0..6],
            TableId::HTau | TableId::CantileverHTau => vec![],
        }
    }

    pub fn points(self) -> Vec<BenchPoint> {
        let manufactured = |lambda: f64, mu: f64, k: f64, tau: f64| {
            let c = ManufacturedCase::default();
            PhysicalParams::new(lambda, mu, c.alpha, c.biot_modulus, k, tau)
        };
        let manufactured_e = |nu: f64, k: f64| {
            let c = ManufacturedCase::default();
            PhysicalParams::from_young(1.0, nu, c.alpha, c.biot_modulus, k, 1.0)
        };
        let cantilever = |nu: f64, k: f64, tau: f64| {
            let c = CantileverCase::default();
            PhysicalParams::from_young(c.young, nu, c.alpha, c.biot_modulus, k, tau)
        };
        let mut out = Vec::new();
        let mut push = |case, params: Result<PhysicalParams>, n, row: String, column: String| {
            out.push(BenchPoint { case, params: params.expect("sweep parameters are valid"), n, row, column });
        };
        match self {
            TableId::KNu | TableId::CantileverKNu => {
                let cant = self == TableId::CantileverKNu;
                let (case, nu0, k0) =
                    if cant { (BenchCase::Cantilever, 0.45, 1e-7) } else { (BenchCase::Manufactured, 0.0, 1e-6) };
                for k in K_SWEEP {
                    let p = if cant { cantilever(nu0, k, 1.0) } else { manufactured_e(nu0, k) };
                    push(case, p, 64, format!("nu={nu0}"), format!("K={k:e}"));
                }
                for nu in NU_SWEEP {
                    let p = if cant { cantilever(nu, k0, 1.0) } else { manufactured_e(nu, k0) };
                    push(case, p, 64, format!("K={k0:e}"), format!("nu={nu}"));
                }
            }
            TableId::HTau | TableId::CantileverHTau => {
                for tau in TAU_SWEEP {
                    for n in N_SWEEP {
                        let (case, p) = if self == TableId::HTau {
                            (BenchCase::Manufactured, manufactured(2.0, 1.0, 1e-6, tau))
                        } else {
                            (BenchCase::Cantilever, cantilever(0.45, 1e-7, tau))
                        };
                        push(case, p, n, format!("tau={tau}"), format!("h=1/{n}"));
                    }
                }
            }
        }
        out
    }
}

impl std::str::FromStr for TableId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown table '{s}' (expected 3, 3b, 4 or 5)")))
    }
}

impl std::fmt::Display for TableId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub fn variant_label(config: &PrecondConfig) -> String {
    match config.inner {
        InnerSolve::Exact => config.kind.label().to_string(),
        InnerSolve::Inexact => format!("{}^", config.kind.label()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchOptions {
    pub repetitions: usize,
    pub seed: u64,
    pub gmres: GmresOptions,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { repetitions: 5, seed: 0, gmres: GmresOptions::default(), inner_tol: 1e-3, inner_max_iter: 200 }
    }
}

impl BenchOptions {
    /// `D, U, L` exact then the same three with AMG-PCG inner solves.
    pub fn variants(&self) -> Vec<PrecondConfig> {
        let kinds = [PrecondKind::Diag, PrecondKind::Upper, PrecondKind::Lower];
        [InnerSolve::Exact, InnerSolve::Inexact]
            .into_iter()
            .flat_map(|inner| kinds.into_iter().map(move |k| (k, inner)))
            .map(|(k, inner)| PrecondConfig {
                inner_tol: self.inner_tol,
                inner_max_iter: self.inner_max_iter,
                ..PrecondConfig::new(k, inner)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchCell {
    pub point: usize,
    pub variant: String,
    pub iterations: Vec<usize>,
    pub converged: bool,
    /// Rounded mean over repetitions; `None` if any repetition failed.
    pub mean: Option<usize>,
    pub inner: Option<InnerStatsSnapshot>,
    pub failure: Option<String>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchTable {
    pub table: Option<TableId>,
    pub points: Vec<BenchPoint>,
    pub variants: Vec<String>,
    /// Point-major.
    pub cells: Vec<BenchCell>,
}

impl BenchTable {
    pub fn cell(&self, point: usize, variant: &str) -> Option<&BenchCell> {
        let v = self.variants.iter().position(|l| l == variant)?;
        self.cells.get(point * self.variants.len() + v)
    }
}

/// Condensed stabilized system of one sweep point with zero data.
pub fn bench_system(point: &BenchPoint) -> Result<CondensedSystem> {
    let mesh = Mesh::uniform(point.n)?;
    let bc = point.case.boundary();
    let dofs = DofMap::new(&mesh, &bc)?;
    let sys = assemble_full(
        &mesh,
        &dofs,
        &point.params,
        &bc,
        &Forcing::zero(),
        &State::zeros(&dofs),
        Scheme::Stabilized,
        Exec::Sequential,
    )?;
    condense(&sys)
}

/// Initial guess for repetition `rep`, uniform on `[0, 1)`.
pub fn initial_guess(seed: u64, rep: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep as u64));
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn run_cell(cond: &CondensedSystem, point: &BenchPoint, index: usize, config: &PrecondConfig, opts: &BenchOptions) -> BenchCell {
    let started = std::time::Instant::now();
    let mut cell = BenchCell {
        point: index,
        variant: variant_label(config),
        iterations: Vec::new(),
        converged: false,
        mean: None,
        inner: None,
        failure: None,
        wall_time: 0.0,
    };
    let pre = match BlockPreconditioner::new(cond, &point.params, config) {
        Ok(p) => p,
        Err(e) => {
            cell.failure = Some(e.to_string());
            return cell;
        }
    };
    let b = vec![0.0; cond.size()];
    let mut all = true;
    for rep in 0..opts.repetitions {
        let x0 = initial_guess(opts.seed, rep, b.len());
        let (_, report) = fgmres(|v: &[f64]| cond.matrix.matvec(v), |r: &[f64]| pre.apply(r), &b, &x0, &opts.gmres);
        all &= report.converged;
        cell.iterations.push(report.iterations);
    }
    cell.converged = all && opts.repetitions > 0;
    if cell.converged {
        let mean = cell.iterations.iter().sum::<usize>() as f64 / cell.iterations.len() as f64;
        cell.mean = Some(mean.round() as usize);
    } else {
        cell.failure = Some("FGMRES did not reach the tolerance".into());
    }
    if config.inner == InnerSolve::Inexact {
        cell.inner = Some(pre.stats());
    }
    cell.wall_time = started.elapsed().as_secs_f64();
    cell
}

/// Points run in parallel under `exec`; variants and repetitions of a point
/// run in order on one thread.
pub fn run_precond_bench(points: &[BenchPoint], variants: &[PrecondConfig], opts: &BenchOptions, exec: Exec) -> BenchTable {
    let indexed: Vec<(usize, &BenchPoint)> = points.iter().enumerate().collect();
    let per_point = par::map_slice(exec, &indexed, |&(i, point)| match bench_system(point) {
        Ok(cond) => variants.iter().map(|v| run_cell(&cond, point, i, v, opts)).collect::<Vec<_>>(),
        Err(e) => variants
            .iter()
            .map(|v| BenchCell {
                point: i,
                variant: variant_label(v),
                iterations: Vec::new(),
                converged: false,
                mean: None,
                inner: None,
                failure: Some(e.to_string()),
                wall_time: 0.0,
            })
            .collect(),
    });
    BenchTable {
        table: None,
        points: points.to_vec(),
        variants: variants.iter().map(variant_label).collect(),
        cells: per_point.into_iter().flatten().collect(),
    }
}

pub fn run_table(table: TableId, opts: &BenchOptions, exec: Exec) -> BenchTable {
    let mut t = run_precond_bench(&table.points(), &opts.variants(), opts, exec);
    t.table = Some(table);
    t
}
