//! Block preconditioners for the condensed system and dense field-of-values
//! probes.
//!
//! With `A_pb = B_pb + (alpha^2 / zeta^2) M_p` (pressure block only):
//!
//! * diag:  `blockdiag(A_u, A_pb)^-1`
//! * lower: `[[A_u, 0], [-alpha B_u, A_pb]]^-1`
//! * upper: `[[A_u, alpha B_u^T], [0, A_pb]]^-1`
//!
//! Block inverses are either sparse Cholesky solves or AMG-preconditioned CG
//! to a relative tolerance.

use std::sync::atomic::{AtomicUsize, Ordering};

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::Serialize;

use crate::amg::{AmgConfig, AmgHierarchy};
use crate::direct::{dense_cholesky, dense_from_csr, lower_solve_in_place, singular_values, symmetric_eigenvalues, SpdFactor};
use crate::error::{Error, Result};
use crate::krylov::pcg;
use crate::params::PhysicalParams;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::system::CondensedSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondKind {
    Diag,
    Lower,
    Upper,
}

impl PrecondKind {
    pub const ALL: [PrecondKind; 3] = [PrecondKind::Diag, PrecondKind::Lower, PrecondKind::Upper];

    pub fn label(self) -> &'static str {
        match self {
            PrecondKind::Diag => "D",
            PrecondKind::Lower => "L",
            PrecondKind::Upper => "U",
        }
    }
}

impl std::str::FromStr for PrecondKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diag" | "d" | "D" => Ok(PrecondKind::Diag),
            "lower" | "l" | "L" => Ok(PrecondKind::Lower),
            "upper" | "u" | "U" => Ok(PrecondKind::Upper),
            _ => Err(Error::Config(format!("unknown preconditioner '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolve {
    Exact,
    Inexact,
}

impl std::str::FromStr for InnerSolve {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(InnerSolve::Exact),
            "inexact" => Ok(InnerSolve::Inexact),
            _ => Err(Error::Config(format!("unknown inner solve '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrecondConfig {
    pub kind: PrecondKind,
    pub inner: InnerSolve,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub amg: AmgConfig,
}

impl PrecondConfig {
    pub fn new(kind: PrecondKind, inner: InnerSolve) -> Self {
        PrecondConfig { kind, inner, inner_tol: 1e-3, inner_max_iter: 200, amg: AmgConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.inner == InnerSolve::Inexact && !(self.inner_tol > 0.0 && self.inner_tol < 1.0) {
            return Err(Error::Config(format!("inner tolerance {} must lie in (0, 1)", self.inner_tol)));
        }
        Ok(())
    }
}

/// `A_pb`: `B_pb` with `(alpha^2 / zeta^2) M_p` added to the pressure block.
pub fn augmented_pbeta(cond: &CondensedSystem, params: &PhysicalParams) -> Result<CsrMatrix> {
    let n = cond.b_pbeta.nrows;
    let mut b = TripletBuilder::new(n, n);
    let c = params.alpha * params.alpha / params.zeta_sq();
    for (i, m) in cond.m_p.iter().enumerate() {
        b.push(i, i, c * m);
    }
    Ok(cond.b_pbeta.add(1.0, &b.build(), 1.0)?.with_symmetric(true))
}

enum BlockSolver {
    Exact(SpdFactor),
    Inexact { matrix: CsrMatrix, amg: AmgHierarchy, tol: f64, max_iter: usize },
}

/// Counters of inner iterative solves.
#[derive(Debug, Default)]
pub struct InnerStats {
    pub solves: AtomicUsize,
    pub iterations: AtomicUsize,
    pub cap_hits: AtomicUsize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InnerStatsSnapshot {
    pub solves: usize,
    pub iterations: usize,
    pub cap_hits: usize,
}

impl InnerStats {
    pub fn snapshot(&self) -> InnerStatsSnapshot {
        InnerStatsSnapshot {
            solves: self.solves.load(Ordering::Relaxed),
            iterations: self.iterations.load(Ordering::Relaxed),
            cap_hits: self.cap_hits.load(Ordering::Relaxed),
        }
    }
}

impl BlockSolver {
    fn new(a: &CsrMatrix, config: &PrecondConfig) -> Result<BlockSolver> {
        match config.inner {
            InnerSolve::Exact => Ok(BlockSolver::Exact(SpdFactor::new(a)?)),
            InnerSolve::Inexact => Ok(BlockSolver::Inexact {
                matrix: a.clone(),
                amg: AmgHierarchy::new(a, config.amg)?,
                tol: config.inner_tol,
                max_iter: config.inner_max_iter,
            }),
        }
    }

    fn solve(&self, r: &[f64], stats: &InnerStats) -> Vec<f64> {
        match self {
            BlockSolver::Exact(f) => f.solve(r),
            BlockSolver::Inexact { matrix, amg, tol, max_iter } => {
                stats.solves.fetch_add(1, Ordering::Relaxed);
                match pcg(|x: &[f64]| matrix.matvec(x), |v: &[f64]| amg.vcycle(v), r, *tol, *max_iter) {
                    Ok((x, rep)) => {
                        stats.iterations.fetch_add(rep.iterations, Ordering::Relaxed);
                        if !rep.converged {
                            stats.cap_hits.fetch_add(1, Ordering::Relaxed);
                        }
                        x
                    }
                    Err(_) => {
                        // loss of definiteness; fall back to one V-cycle and flag it
                        stats.cap_hits.fetch_add(1, Ordering::Relaxed);
                        amg.vcycle(r)
                    }
                }
            }
        }
    }
}

pub struct BlockPreconditioner {
    pub kind: PrecondKind,
    alpha: f64,
    b_u: CsrMatrix,
    n_u: usize,
    n_p: usize,
    u_solver: BlockSolver,
    pb_solver: BlockSolver,
    stats: InnerStats,
}

impl BlockPreconditioner {
    pub fn new(cond: &CondensedSystem, params: &PhysicalParams, config: &PrecondConfig) -> Result<Self> {
        config.validate()?;
        let a_pb = augmented_pbeta(cond, params)?;
        let u_solver = BlockSolver::new(&cond.a_u, config)
            .map_err(|e| Error::Factorization(format!("displacement block: {e}")))?;
        let pb_solver =
            BlockSolver::new(&a_pb, config).map_err(|e| Error::Factorization(format!("pressure block: {e}")))?;
        Ok(BlockPreconditioner {
            kind: config.kind,
            alpha: cond.alpha,
            b_u: cond.b_u.clone(),
            n_u: cond.a_u.nrows,
            n_p: cond.b_p.nrows,
            u_solver,
            pb_solver,
            stats: InnerStats::default(),
        })
    }

    pub fn stats(&self) -> InnerStatsSnapshot {
        self.stats.snapshot()
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let (ru, rpb) = r.split_at(self.n_u);
        let mut out = Vec::with_capacity(r.len());
        match self.kind {
            PrecondKind::Diag => {
                out.extend(self.u_solver.solve(ru, &self.stats));
                out.extend(self.pb_solver.solve(rpb, &self.stats));
            }
            PrecondKind::Lower => {
                let xu = self.u_solver.solve(ru, &self.stats);
                let mut rhs = rpb.to_vec();
                self.b_u.matvec_add(self.alpha, &xu, &mut rhs[..self.n_p]);
                out.extend(xu);
                out.extend(self.pb_solver.solve(&rhs, &self.stats));
            }
            PrecondKind::Upper => {
                let xpb = self.pb_solver.solve(rpb, &self.stats);
                let mut rhs = ru.to_vec();
                self.b_u.matvec_transpose_add(-self.alpha, &xpb[..self.n_p], &mut rhs);
                out.extend(self.u_solver.solve(&rhs, &self.stats));
                out.extend(xpb);
            }
        }
        out
    }
}

pub const DENSE_PROBE_CAP: usize = 1500;

/// Dense spectral estimates of a preconditioned condensed operator in the
/// norm induced by `blockdiag(A_u, A_pb)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FovEstimate {
    pub kind: PrecondKind,
    /// diag: smallest singular value; lower/upper: smallest eigenvalue of the
    /// symmetric part.
    pub lower: f64,
    /// Spectral norm.
    pub upper: f64,
    /// `upper / lower` for diag.
    pub condition: Option<f64>,
}

/// With `D = blockdiag(A_u, A_pb) = L L^T`:
/// diag examines `L^-1 A L^-T`, lower `L^T B_L A L^-T`, upper `L^-1 A B_U L`.
pub fn fov_probe(cond: &CondensedSystem, params: &PhysicalParams, kind: PrecondKind) -> Result<FovEstimate> {
    let n = cond.size();
    if n > DENSE_PROBE_CAP {
        return Err(Error::TooLarge { size: n, cap: DENSE_PROBE_CAP });
    }
    let nu = cond.a_u.nrows;
    let np = cond.b_p.nrows;
    let a_pb = augmented_pbeta(cond, params)?;
    let mut d = Mat::<f64>::zeros(n, n);
    let du = dense_from_csr(&cond.a_u);
    let dpb = dense_from_csr(&a_pb);
    for i in 0..nu {
        for j in 0..nu {
            d[(i, j)] = du[(i, j)];
        }
    }
    for i in 0..n - nu {
        for j in 0..n - nu {
            d[(nu + i, nu + j)] = dpb[(i, j)];
        }
    }
    let l = dense_cholesky(&d)?;
    let a = dense_from_csr(&cond.matrix);
    let alpha = cond.alpha;
    let bu = dense_from_csr(&cond.b_u);

    // X -> L^-1 X and X -> X L^-T
    let left_inv = |x: &Mat<f64>| {
        let mut y = x.clone();
        lower_solve_in_place(&l, &mut y);
        y
    };
    let right_inv_t = |x: &Mat<f64>| {
        let mut y = x.transpose().to_owned();
        lower_solve_in_place(&l, &mut y);
        y.transpose().to_owned()
    };

    match kind {
        PrecondKind::Diag => {
            let m = right_inv_t(&left_inv(&a));
            let sv = singular_values(&m)?;
            let (hi, lo) = (sv[0], *sv.last().unwrap());
            Ok(FovEstimate { kind, lower: lo, upper: hi, condition: Some(hi / lo) })
        }
        PrecondKind::Lower => {
            let mut p = d.clone();
            for i in 0..np {
                for j in 0..nu {
                    p[(nu + i, j)] = -alpha * bu[(i, j)];
                }
            }
            let ba = p.partial_piv_lu().solve(&a);
            let m = l.transpose().to_owned() * right_inv_t(&ba);
            estimate(kind, &m)
        }
        PrecondKind::Upper => {
            let mut p = d.clone();
            for i in 0..np {
                for j in 0..nu {
                    p[(j, nu + i)] = alpha * bu[(i, j)];
                }
            }
            // A B_U = (B_U^T A^T)^T
            let ab = p.transpose().to_owned().partial_piv_lu().solve(&a.transpose().to_owned()).transpose().to_owned();
            let m = left_inv(&ab) * &l;
            estimate(kind, &m)
        }
    }
}

fn estimate(kind: PrecondKind, m: &Mat<f64>) -> Result<FovEstimate> {
    let ev = symmetric_eigenvalues(m)?;
    let sv = singular_values(m)?;
    Ok(FovEstimate { kind, lower: ev[0], upper: sv[0], condition: None })
}
