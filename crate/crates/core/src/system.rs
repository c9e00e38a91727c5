//! Global block system, static condensation, back-substitution and backward
//! Euler stepping.
//!
//! The full system has unknowns ordered bubble, linear displacement,
//! pressure, multiplier, velocity:
//!
//! ```text
//! [ D_bb    A_bl    aB_b^T    0        0      ]
//! [ A_bl^T  A_ll    aB_l^T    0        0      ]
//! [ -aB_b   -aB_l   M_p/M     0      -tB_w    ]
//! [ 0       0       0         0      -tB_be   ]
//! [ 0       0       tB_w^T    tB_be^T  tM_w   ]
//! ```
//!
//! with `a = alpha`, `t = tau`. Eliminating bubbles and velocities gives the
//! condensed system in the unknowns (linear displacement, pressure, multiplier).

use std::time::Instant;

use serde::Serialize;

use crate::direct::LuFactor;
use crate::dofs::{BoundarySpec, DofMap};
use crate::error::{Error, Result};
use crate::krylov::{fgmres, GmresOptions, SolverReport};
use crate::local::{
    local_bubble_blocks, local_bubble_full, local_div_p1, local_elasticity_p1, local_load, local_rt0, BubbleBlocks,
    LoadData, LocalLoads, LocalPrev, Mat6, Rt0Blocks,
};
use crate::mesh::{Mesh, Point};
use crate::par::{self, Exec};
use crate::params::PhysicalParams;
use crate::precond::{BlockPreconditioner, PrecondConfig};
use crate::quadrature::{triangle_rule, TriangleRule};
use crate::sparse::{axpy, norm2, BlockDiag, CsrMatrix, TripletBuilder};

pub const LOAD_QUADRATURE_DEGREE: usize = 10;

const DIRECT_REFINEMENT_STEPS: usize = 2;

/// Displacement discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Bubble-enriched P1 with the diagonal bubble block.
    Stabilized,
    /// Plain P1 displacement.
    Unstabilized,
    /// Bubble-enriched P1 with the exact bubble block (solved without condensation).
    Enriched,
}

impl Scheme {
    pub fn has_bubbles(self) -> bool {
        self != Scheme::Unstabilized
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stabilized" => Ok(Scheme::Stabilized),
            "unstabilized" => Ok(Scheme::Unstabilized),
            "enriched" => Ok(Scheme::Enriched),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Stabilized => "stabilized",
            Scheme::Unstabilized => "unstabilized",
            Scheme::Enriched => "enriched",
        })
    }
}

/// Body force and fluid source; both constant in time.
pub struct Forcing {
    pub body_force: Box<dyn Fn(Point) -> [f64; 2] + Send + Sync>,
    pub source: Box<dyn Fn(Point) -> f64 + Send + Sync>,
}

impl Forcing {
    pub fn zero() -> Forcing {
        Forcing { body_force: Box::new(|_| [0.0, 0.0]), source: Box::new(|_| 0.0) }
    }
}

/// Coefficients of every unknown family at one time level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct State {
    pub u_bub: Vec<f64>,
    pub u_lin: Vec<f64>,
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
    pub w: Vec<f64>,
}

impl State {
    pub fn zeros(d: &DofMap) -> State {
        State {
            u_bub: vec![0.0; d.n_bub],
            u_lin: vec![0.0; d.n_ulin],
            p: vec![0.0; d.n_p],
            beta: vec![0.0; d.n_beta],
            w: vec![0.0; d.n_w],
        }
    }

    /// Zero displacement and velocity, constant pressure.
    pub fn with_pressure(d: &DofMap, p: f64) -> State {
        State { p: vec![p; d.n_p], ..State::zeros(d) }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [&self.u_bub, &self.u_lin, &self.p, &self.beta, &self.w].iter().flat_map(|v| v.iter().copied()).collect()
    }

    pub fn from_vec(d: &DofMap, x: &[f64]) -> Result<State> {
        let off = d.offsets();
        if x.len() != off[5] {
            return Err(Error::DimensionMismatch(format!("state vector length {} != {}", x.len(), off[5])));
        }
        Ok(State {
            u_bub: x[off[0]..off[1]].to_vec(),
            u_lin: x[off[1]..off[2]].to_vec(),
            p: x[off[2]..off[3]].to_vec(),
            beta: x[off[3]..off[4]].to_vec(),
            w: x[off[4]..off[5]].to_vec(),
        })
    }

    fn check(&self, d: &DofMap) -> Result<()> {
        let got = [self.u_bub.len(), self.u_lin.len(), self.p.len(), self.beta.len(), self.w.len()];
        let want = [d.n_bub, d.n_ulin, d.n_p, d.n_beta, d.n_w];
        if got != want {
            return Err(Error::DimensionMismatch(format!("state sizes {got:?} do not match dof counts {want:?}")));
        }
        Ok(())
    }
}

/// Right-hand side segments in block order.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRhs {
    pub b_b: Vec<f64>,
    pub b_l: Vec<f64>,
    pub b_p: Vec<f64>,
    pub b_beta: Vec<f64>,
    pub b_w: Vec<f64>,
}

impl BlockRhs {
    pub fn to_vec(&self) -> Vec<f64> {
        [&self.b_b, &self.b_l, &self.b_p, &self.b_beta, &self.b_w].iter().flat_map(|v| v.iter().copied()).collect()
    }

    pub fn from_vec(d: &DofMap, x: &[f64]) -> BlockRhs {
        let s = State::from_vec(d, x).expect("length checked by caller");
        BlockRhs { b_b: s.u_bub, b_l: s.u_lin, b_p: s.p, b_beta: s.beta, b_w: s.w }
    }
}

#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub scheme: Scheme,
    /// Diagonal bubble block `d_b`.
    pub d_bb: Vec<f64>,
    /// Exact bubble block `a(Phi_e, Phi_f)`.
    pub a_bb: CsrMatrix,
    pub a_bl: CsrMatrix,
    pub a_ll: CsrMatrix,
    pub b_b: CsrMatrix,
    pub b_l: CsrMatrix,
    pub m_p: Vec<f64>,
    pub b_w: CsrMatrix,
    pub b_beta: CsrMatrix,
    pub m_w: BlockDiag,
    pub alpha: f64,
    pub inv_m: f64,
    pub tau: f64,
    pub permeability: f64,
    pub rhs: BlockRhs,
}

struct ElementContribution {
    ulin: [Option<usize>; 6],
    bub: [Option<usize>; 3],
    beta: [Option<usize>; 3],
    vel: [Option<usize>; 3],
    a_ll: Mat6,
    bubble: BubbleBlocks,
    bubble_full: [[f64; 3]; 3],
    rt0: Rt0Blocks,
    div_l: [f64; 6],
    area: f64,
    loads: LocalLoads,
}

fn gather<const K: usize>(idx: &[Option<usize>; K], v: &[f64]) -> [f64; K] {
    let mut out = [0.0; K];
    for (o, i) in out.iter_mut().zip(idx) {
        if let Some(i) = i {
            *o = v[*i];
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn element_contribution(
    mesh: &Mesh,
    dofs: &DofMap,
    params: &PhysicalParams,
    bc: &BoundarySpec,
    forcing: &Forcing,
    prev: &State,
    rule: &TriangleRule,
    t: usize,
) -> Result<ElementContribution> {
    let g = mesh.element_geometry(t)?;
    let ulin = dofs.element_ulin(mesh, t);
    let bub = dofs.element_bubbles(mesh, t);
    let mut traction = [None; 3];
    for (k, tr) in traction.iter_mut().enumerate() {
        let tag = mesh.boundary_tag[g.edges[k]];
        if tag.is_boundary() {
            *tr = bc.traction_on(tag);
        }
    }
    let local_prev = LocalPrev { u_lin: gather(&ulin, &prev.u_lin), u_bub: gather(&bub, &prev.u_bub), p: prev.p[t] };
    let data = LoadData { body_force: &*forcing.body_force, source: &*forcing.source, traction, prev: local_prev };
    Ok(ElementContribution {
        ulin,
        bub,
        beta: dofs.element_betas(mesh, t),
        vel: dofs.velocity[t],
        a_ll: local_elasticity_p1(&g, params.lambda, params.mu),
        bubble: local_bubble_blocks(&g, params.lambda, params.mu),
        bubble_full: local_bubble_full(&g, params.lambda, params.mu),
        rt0: local_rt0(&g, params.permeability)?,
        div_l: local_div_p1(&g),
        area: g.area,
        loads: local_load(&g, rule, &data, params),
    })
}

/// Assembles the full block system for one backward Euler step from `prev`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_full(
    mesh: &Mesh,
    dofs: &DofMap,
    params: &PhysicalParams,
    bc: &BoundarySpec,
    forcing: &Forcing,
    prev: &State,
    scheme: Scheme,
    exec: Exec,
) -> Result<BlockSystem> {
    params.validate()?;
    prev.check(dofs)?;
    if dofs.n_p != mesh.num_triangles() {
        return Err(Error::DimensionMismatch("dof map does not belong to this mesh".into()));
    }
    if scheme.has_bubbles() != (dofs.n_bub > 0 || crate::dofs::bubble_edge_set(mesh, bc).is_empty()) {
        return Err(Error::DimensionMismatch(format!("dof map bubble count {} does not fit scheme {scheme}", dofs.n_bub)));
    }
    let rule = triangle_rule(LOAD_QUADRATURE_DEGREE)?;
    let contributions: Vec<Result<ElementContribution>> = par::map_indexed(exec, mesh.num_triangles(), |t| {
        element_contribution(mesh, dofs, params, bc, forcing, prev, &rule, t)
    });

    let nt = mesh.num_triangles();
    let mut a_ll = TripletBuilder::with_capacity(dofs.n_ulin, dofs.n_ulin, 36 * nt);
    let mut a_bl = TripletBuilder::with_capacity(dofs.n_bub, dofs.n_ulin, 18 * nt);
    let mut a_bb = TripletBuilder::with_capacity(dofs.n_bub, dofs.n_bub, 9 * nt);
    let mut b_b = TripletBuilder::with_capacity(dofs.n_p, dofs.n_bub, 3 * nt);
    let mut b_l = TripletBuilder::with_capacity(dofs.n_p, dofs.n_ulin, 6 * nt);
    let mut b_w = TripletBuilder::with_capacity(dofs.n_p, dofs.n_w, 3 * nt);
    let mut b_beta = TripletBuilder::with_capacity(dofs.n_beta, dofs.n_w, 3 * nt);
    let mut d_bb = vec![0.0; dofs.n_bub];
    let mut m_p = vec![0.0; dofs.n_p];
    let mut m_w_blocks = Vec::with_capacity(nt);
    let mut rhs = BlockRhs {
        b_b: vec![0.0; dofs.n_bub],
        b_l: vec![0.0; dofs.n_ulin],
        b_p: vec![0.0; dofs.n_p],
        b_beta: vec![0.0; dofs.n_beta],
        b_w: vec![0.0; dofs.n_w],
    };

    for (t, c) in contributions.into_iter().enumerate() {
        let c = c?;
        for i in 0..6 {
            let Some(gi) = c.ulin[i] else { continue };
            rhs.b_l[gi] += c.loads.linear[i];
            b_l.push(t, gi, c.div_l[i]);
            for j in 0..6 {
                if let Some(gj) = c.ulin[j] {
                    a_ll.push(gi, gj, c.a_ll[i][j]);
                }
            }
        }
        for e in 0..3 {
            let Some(ge) = c.bub[e] else { continue };
            d_bb[ge] += c.bubble.diag[e];
            rhs.b_b[ge] += c.loads.bubble[e];
            b_b.push(t, ge, c.bubble.div[e]);
            for j in 0..6 {
                if let Some(gj) = c.ulin[j] {
                    a_bl.push(ge, gj, c.bubble.coupling[e][j]);
                }
            }
            for f in 0..3 {
                if let Some(gf) = c.bub[f] {
                    a_bb.push(ge, gf, c.bubble_full[e][f]);
                }
            }
        }
        m_p[t] = c.area;
        rhs.b_p[t] += c.loads.pressure;

        let free: Vec<usize> = (0..3).filter(|&k| c.vel[k].is_some()).collect();
        let idx: Vec<usize> = free.iter().map(|&k| c.vel[k].unwrap()).collect();
        let mut block = Vec::with_capacity(free.len() * free.len());
        for &a in &free {
            for &b in &free {
                block.push(c.rt0.mass[a][b]);
            }
        }
        for &k in &free {
            let gw = c.vel[k].unwrap();
            b_w.push(t, gw, c.rt0.div[k]);
            if let Some(gb) = c.beta[k] {
                b_beta.push(gb, gw, c.rt0.trace[k]);
            }
        }
        if !idx.is_empty() {
            m_w_blocks.push((idx, block));
        }
    }

    Ok(BlockSystem {
        scheme,
        d_bb,
        a_bb: a_bb.build().with_symmetric(true),
        a_bl: a_bl.build(),
        a_ll: a_ll.build().with_symmetric(true),
        b_b: b_b.build(),
        b_l: b_l.build(),
        m_p,
        b_w: b_w.build(),
        b_beta: b_beta.build(),
        m_w: BlockDiag { n: dofs.n_w, blocks: m_w_blocks },
        alpha: params.alpha,
        inv_m: 1.0 / params.biot_modulus,
        tau: params.tau,
        permeability: params.permeability,
        rhs,
    })
}

impl BlockSystem {
    pub fn sizes(&self) -> [usize; 5] {
        [self.d_bb.len(), self.a_ll.nrows, self.m_p.len(), self.b_beta.nrows, self.m_w.n]
    }

    /// Bubble block used by the scheme.
    pub fn bubble_block(&self) -> CsrMatrix {
        match self.scheme {
            Scheme::Enriched => self.a_bb.clone(),
            _ => CsrMatrix::from_diagonal(&self.d_bb),
        }
    }

    /// The assembled full matrix.
    pub fn full_matrix(&self) -> Result<CsrMatrix> {
        let (a, t) = (self.alpha, self.tau);
        let bbt = self.b_b.transpose().scale(a);
        let blt = self.b_l.transpose().scale(a);
        let alt = self.a_bl.transpose();
        let nbb = self.b_b.scale(-a);
        let nbl = self.b_l.scale(-a);
        let mp = CsrMatrix::from_diagonal(&self.m_p.iter().map(|m| m * self.inv_m).collect::<Vec<_>>());
        let nbw = self.b_w.scale(-t);
        let nbbeta = self.b_beta.scale(-t);
        let bwt = self.b_w.transpose().scale(t);
        let bbetat = self.b_beta.transpose().scale(t);
        let mw = self.m_w.to_csr().scale(t);
        let bubble = self.bubble_block();
        let blocks = vec![
            vec![Some(&bubble), Some(&self.a_bl), Some(&bbt), None, None],
            vec![Some(&alt), Some(&self.a_ll), Some(&blt), None, None],
            vec![Some(&nbb), Some(&nbl), Some(&mp), None, Some(&nbw)],
            vec![None, None, None, None, Some(&nbbeta)],
            vec![None, None, Some(&bwt), Some(&bbetat), Some(&mw)],
        ];
        let s = self.sizes();
        CsrMatrix::from_blocks(&blocks, &s, &s)
    }

    /// Perturbed (`a^D`) and exact (`a`) elasticity operators on the combined
    /// bubble + linear displacement space, in that block order.
    pub fn displacement_forms(&self) -> Result<(CsrMatrix, CsrMatrix)> {
        let s = [self.d_bb.len(), self.a_ll.nrows];
        let alt = self.a_bl.transpose();
        let d = CsrMatrix::from_diagonal(&self.d_bb);
        let pert = CsrMatrix::from_blocks(&[vec![Some(&d), Some(&self.a_bl)], vec![Some(&alt), Some(&self.a_ll)]], &s, &s)?;
        let exact =
            CsrMatrix::from_blocks(&[vec![Some(&self.a_bb), Some(&self.a_bl)], vec![Some(&alt), Some(&self.a_ll)]], &s, &s)?;
        Ok((pert.with_symmetric(true), exact.with_symmetric(true)))
    }
}

/// The condensed system in (linear displacement, pressure, multiplier).
#[derive(Clone, Debug)]
pub struct CondensedSystem {
    pub a_u: CsrMatrix,
    /// `B_u^E`, pressure rows by displacement columns.
    pub b_u: CsrMatrix,
    pub b_p: CsrMatrix,
    pub c_pbeta: CsrMatrix,
    pub c_betabeta: CsrMatrix,
    /// `[[B_p, C_pb], [C_pb^T, C_bb]]`.
    pub b_pbeta: CsrMatrix,
    /// The whole condensed matrix.
    pub matrix: CsrMatrix,
    pub alpha: f64,
    pub rhs_l: Vec<f64>,
    pub rhs_p: Vec<f64>,
    pub rhs_beta: Vec<f64>,
    pub d_inv: Vec<f64>,
    pub m_w_inv: BlockDiag,
    /// Pressure mass diagonal (element areas).
    pub m_p: Vec<f64>,
}

impl CondensedSystem {
    pub fn sizes(&self) -> [usize; 3] {
        [self.a_u.nrows, self.b_p.nrows, self.c_betabeta.nrows]
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows
    }

    pub fn rhs(&self) -> Vec<f64> {
        [&self.rhs_l, &self.rhs_p, &self.rhs_beta].iter().flat_map(|v| v.iter().copied()).collect()
    }
}

pub fn condense(sys: &BlockSystem) -> Result<CondensedSystem> {
    if sys.scheme == Scheme::Enriched {
        return Err(Error::Config("the enriched scheme has a non-diagonal bubble block and is not condensed".into()));
    }
    let (alpha, tau) = (sys.alpha, sys.tau);
    if let Some(i) = sys.d_bb.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Factorization(format!("bubble diagonal entry {i} is not positive")));
    }
    let d_inv: Vec<f64> = sys.d_bb.iter().map(|d| 1.0 / d).collect();
    let m_w_inv = sys.m_w.inverse()?;
    let mwi = m_w_inv.to_csr();

    // D^-1 A_bl and D^-1 B_b^T
    let dinv_abl = sys.a_bl.scale_rows(&d_inv);
    let bbt = sys.b_b.transpose();
    let dinv_bbt = bbt.scale_rows(&d_inv);

    let a_u = sys.a_ll.add(1.0, &sys.a_bl.transpose().matmul(&dinv_abl)?, -1.0)?.with_symmetric(true);
    let b_u = sys.b_l.add(1.0, &sys.b_b.matmul(&dinv_abl)?, -1.0)?;
    let mp = CsrMatrix::from_diagonal(&sys.m_p.iter().map(|m| m * sys.inv_m).collect::<Vec<_>>());
    let b_p = mp
        .add(1.0, &sys.b_b.matmul(&dinv_bbt)?, alpha * alpha)?
        .add(1.0, &sys.b_w.triple_product(&mwi)?, tau)?
        .with_symmetric(true);
    let bw_mwi = sys.b_w.matmul(&mwi)?;
    let c_pbeta = bw_mwi.matmul(&sys.b_beta.transpose())?.scale(tau);
    let c_betabeta = sys.b_beta.triple_product(&mwi)?.scale(tau).with_symmetric(true);

    let [nu, np, nb] = [a_u.nrows, b_p.nrows, c_betabeta.nrows];
    let cpbt = c_pbeta.transpose();
    let b_pbeta =
        CsrMatrix::from_blocks(&[vec![Some(&b_p), Some(&c_pbeta)], vec![Some(&cpbt), Some(&c_betabeta)]], &[np, nb], &[np, nb])?
            .with_symmetric(true);
    let abut = b_u.transpose().scale(alpha);
    let nabu = b_u.scale(-alpha);
    let matrix = CsrMatrix::from_blocks(
        &[
            vec![Some(&a_u), Some(&abut), None],
            vec![Some(&nabu), Some(&b_p), Some(&c_pbeta)],
            vec![None, Some(&cpbt), Some(&c_betabeta)],
        ],
        &[nu, np, nb],
        &[nu, np, nb],
    )?;

    let r = &sys.rhs;
    let db: Vec<f64> = r.b_b.iter().zip(&d_inv).map(|(b, d)| b * d).collect();
    let mut rhs_l = r.b_l.clone();
    sys.a_bl.matvec_transpose_add(-1.0, &db, &mut rhs_l);
    let mut rhs_p = r.b_p.clone();
    sys.b_b.matvec_add(alpha, &db, &mut rhs_p);
    let mw_bw = m_w_inv.matvec(&r.b_w);
    sys.b_w.matvec_add(1.0, &mw_bw, &mut rhs_p);
    let mut rhs_beta = r.b_beta.clone();
    sys.b_beta.matvec_add(1.0, &mw_bw, &mut rhs_beta);

    Ok(CondensedSystem {
        a_u,
        b_u,
        b_p,
        c_pbeta,
        c_betabeta,
        b_pbeta,
        matrix,
        alpha,
        rhs_l,
        rhs_p,
        rhs_beta,
        d_inv,
        m_w_inv,
        m_p: sys.m_p.clone(),
    })
}

/// Recovers bubbles and velocities from a condensed solution `(U_l, P, B)`.
pub fn back_substitute(sys: &BlockSystem, cond: &CondensedSystem, x: &[f64]) -> Result<State> {
    let [nu, np, nb] = cond.sizes();
    if x.len() != nu + np + nb {
        return Err(Error::DimensionMismatch(format!("condensed solution length {} != {}", x.len(), nu + np + nb)));
    }
    let (u_lin, rest) = x.split_at(nu);
    let (p, beta) = rest.split_at(np);

    let mut rb = sys.rhs.b_b.clone();
    sys.a_bl.matvec_add(-1.0, u_lin, &mut rb);
    sys.b_b.matvec_transpose_add(-sys.alpha, p, &mut rb);
    let u_bub: Vec<f64> = rb.iter().zip(&cond.d_inv).map(|(r, d)| r * d).collect();

    let mut rw: Vec<f64> = sys.rhs.b_w.iter().map(|b| b / sys.tau).collect();
    sys.b_w.matvec_transpose_add(-1.0, p, &mut rw);
    sys.b_beta.matvec_transpose_add(-1.0, beta, &mut rw);
    let w = cond.m_w_inv.matvec(&rw);

    Ok(State { u_bub, u_lin: u_lin.to_vec(), p: p.to_vec(), beta: beta.to_vec(), w })
}

/// `||b - A x|| / ||b||` of the full system for a state.
pub fn full_residual(sys: &BlockSystem, state: &State) -> Result<f64> {
    let a = sys.full_matrix()?;
    let b = sys.rhs.to_vec();
    let ax = a.matvec(&state.to_vec());
    let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let bn = norm2(&b);
    Ok(if bn > 0.0 { norm2(&r) / bn } else { norm2(&r) })
}

/// Direct solve of the full (uncondensed) system.
pub fn solve_full_direct(sys: &BlockSystem, dofs: &DofMap) -> Result<State> {
    let a = sys.full_matrix()?;
    let lu = LuFactor::new(&a)?;
    State::from_vec(dofs, &lu.solve(&sys.rhs.to_vec()))
}

/// Relative distance between the direct full solve and the condensed direct
/// solve plus back-substitution, per family in the order bubble, linear,
/// pressure, multiplier, velocity. Empty or zero families report the
/// absolute distance.
pub fn schur_discrepancy(sys: &BlockSystem, dofs: &DofMap) -> Result<[f64; 5]> {
    let full = solve_full_direct(sys, dofs)?;
    let cond = condense(sys)?;
    let lu = LuFactor::new(&cond.matrix)?;
    let red = back_substitute(sys, &cond, &lu.solve(&cond.rhs()))?;
    let pairs = [
        (&full.u_bub, &red.u_bub),
        (&full.u_lin, &red.u_lin),
        (&full.p, &red.p),
        (&full.beta, &red.beta),
        (&full.w, &red.w),
    ];
    Ok(pairs.map(|(a, b)| {
        let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
        let n = norm2(a);
        if n > 0.0 {
            norm2(&d) / n
        } else {
            norm2(&d)
        }
    }))
}

#[derive(Clone, Debug)]
pub enum LinearSolver {
    /// Sparse LU of the condensed system (or of the full system for the
    /// enriched scheme).
    Direct,
    /// Preconditioned FGMRES on the condensed system.
    Krylov { precond: PrecondConfig, gmres: GmresOptions },
}

/// Solves the condensed system, returning the condensed solution and a report.
pub fn solve_condensed(
    cond: &CondensedSystem,
    params: &PhysicalParams,
    solver: &LinearSolver,
    x0: Option<&[f64]>,
) -> Result<(Vec<f64>, SolverReport)> {
    let started = Instant::now();
    let b = cond.rhs();
    match solver {
        LinearSolver::Direct => {
            let lu = LuFactor::new(&cond.matrix)?;
            let mut x = lu.solve(&b);
            let residual = |x: &[f64]| -> Vec<f64> { cond.matrix.matvec(x).iter().zip(&b).map(|(p, q)| q - p).collect() };
            // Two rounds of refinement keep the small-scale multiplier rows
            // (flux continuity) accurate.
            for _ in 0..DIRECT_REFINEMENT_STEPS {
                let d = lu.solve(&residual(&x));
                axpy(1.0, &d, &mut x);
            }
            let r = residual(&x);
            let bn = norm2(&b);
            let rel = if bn > 0.0 { norm2(&r) / bn } else { 0.0 };
            Ok((x, SolverReport::direct(rel, started)))
        }
        LinearSolver::Krylov { precond, gmres } => {
            let pre = BlockPreconditioner::new(cond, params, precond)?;
            let zero = vec![0.0; b.len()];
            let x0 = x0.unwrap_or(&zero);
            let (x, mut report) = fgmres(|v: &[f64]| cond.matrix.matvec(v), |r: &[f64]| pre.apply(r), &b, x0, gmres);
            report.wall_time = started.elapsed().as_secs_f64();
            Ok((x, report))
        }
    }
}

/// One backward Euler step from `prev`.
#[allow(clippy::too_many_arguments)]
pub fn step(
    prev: &State,
    mesh: &Mesh,
    dofs: &DofMap,
    params: &PhysicalParams,
    bc: &BoundarySpec,
    forcing: &Forcing,
    scheme: Scheme,
    solver: &LinearSolver,
    exec: Exec,
) -> Result<(State, SolverReport)> {
    let sys = assemble_full(mesh, dofs, params, bc, forcing, prev, scheme, exec)?;
    if scheme == Scheme::Enriched {
        let started = Instant::now();
        let state = solve_full_direct(&sys, dofs)?;
        let res = full_residual(&sys, &state)?;
        return Ok((state, SolverReport::direct(res, started)));
    }
    let cond = condense(&sys)?;
    let (x, report) = solve_condensed(&cond, params, solver, None)?;
    report.ok()?;
    let state = back_substitute(&sys, &cond, &x)?;
    Ok((state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::SpdFactor;

    fn setup(n: usize, scheme: Scheme) -> (Mesh, DofMap, BoundarySpec) {
        let mesh = Mesh::uniform(n).unwrap();
        let bc = BoundarySpec::clamped_no_flow();
        let dofs = DofMap::build(&mesh, &bc, scheme.has_bubbles()).unwrap();
        (mesh, dofs, bc)
    }

    fn params() -> PhysicalParams {
        PhysicalParams::new(2.0, 1.0, 1.0, 1e6, 1e-6, 1.0).unwrap()
    }

    #[test]
    fn full_size_and_mass_diagonal() {
        let (mesh, dofs, bc) = setup(4, Scheme::Stabilized);
        let sys = assemble_full(&mesh, &dofs, &params(), &bc, &Forcing::zero(), &State::zeros(&dofs), Scheme::Stabilized, Exec::Sequential)
            .unwrap();
        assert_eq!(sys.full_matrix().unwrap().nrows, 210);
        assert!(sys.m_p.iter().all(|&m| (m - 0.25 * 0.25 / 2.0).abs() < 1e-15));
        assert!(sys.rhs.to_vec().iter().all(|&v| v == 0.0));
        assert!(sys.d_bb.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn zero_forcing_keeps_zero_state() {
        let (mesh, dofs, bc) = setup(4, Scheme::Stabilized);
        let (s, _) = step(
            &State::zeros(&dofs),
            &mesh,
            &dofs,
            &params(),
            &bc,
            &Forcing::zero(),
            Scheme::Stabilized,
            &LinearSolver::Direct,
            Exec::Sequential,
        )
        .unwrap();
        assert!(s.to_vec().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_coupling_leaves_a_ll() {
        let (mesh, dofs, bc) = setup(3, Scheme::Stabilized);
        let mut sys =
            assemble_full(&mesh, &dofs, &params(), &bc, &Forcing::zero(), &State::zeros(&dofs), Scheme::Stabilized, Exec::Sequential)
                .unwrap();
        sys.a_bl = CsrMatrix::zeros(sys.a_bl.nrows, sys.a_bl.ncols);
        let cond = condense(&sys).unwrap();
        assert_eq!(cond.a_u.to_dense(), sys.a_ll.to_dense());
    }

    #[test]
    fn parallel_and_sequential_assembly_identical() {
        let (mesh, dofs, bc) = setup(6, Scheme::Stabilized);
        let f = Forcing { body_force: Box::new(|x| [x[0].sin(), x[1] * x[0]]), source: Box::new(|x| x[0]) };
        let prev = State::with_pressure(&dofs, 0.3);
        let a = assemble_full(&mesh, &dofs, &params(), &bc, &f, &prev, Scheme::Stabilized, Exec::Sequential).unwrap();
        let b = assemble_full(&mesh, &dofs, &params(), &bc, &f, &prev, Scheme::Stabilized, Exec::Parallel).unwrap();
        assert_eq!(a.full_matrix().unwrap(), b.full_matrix().unwrap());
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn condensed_blocks_spd() {
        let (mesh, dofs, bc) = setup(4, Scheme::Stabilized);
        let sys =
            assemble_full(&mesh, &dofs, &params(), &bc, &Forcing::zero(), &State::zeros(&dofs), Scheme::Stabilized, Exec::Sequential)
                .unwrap();
        let cond = condense(&sys).unwrap();
        assert!(cond.a_u.asymmetry() < 1e-13);
        assert!(cond.b_pbeta.asymmetry() < 1e-13);
        SpdFactor::new(&cond.a_u).unwrap();
        SpdFactor::new(&cond.b_pbeta).unwrap();
        assert_eq!(cond.size(), dofs.condensed_size());
    }

    #[test]
    fn unstabilized_has_no_bubbles() {
        let (mesh, dofs, bc) = setup(4, Scheme::Unstabilized);
        let sys = assemble_full(
            &mesh,
            &dofs,
            &params(),
            &bc,
            &Forcing::zero(),
            &State::zeros(&dofs),
            Scheme::Unstabilized,
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!(sys.sizes()[0], 0);
        let cond = condense(&sys).unwrap();
        assert_eq!(cond.a_u, sys.a_ll);
    }

    #[test]
    fn scheme_dofmap_mismatch_rejected() {
        let (mesh, dofs, bc) = setup(4, Scheme::Unstabilized);
        let r = assemble_full(&mesh, &dofs, &params(), &bc, &Forcing::zero(), &State::zeros(&dofs), Scheme::Stabilized, Exec::Sequential);
        assert!(r.is_err());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("stabilized".parse::<Scheme>().unwrap(), Scheme::Stabilized);
        assert!("other".parse::<Scheme>().is_err());
        assert_eq!(Scheme::Enriched.to_string(), "enriched");
    }
}
