//! Element matrices and load vectors.
//!
//! Local displacement dofs are ordered `(vertex l, component k) -> 2 l + k`.
//! The bubble of local edge `k` (endpoints `a`, `b`) is `lambda_a lambda_b n_e`
//! with the global edge normal `n_e`. The RT0 basis function of local edge `k`
//! is `sigma_k |e_k| / (2 |T|) (x - x_k)`, so its normal component on edge `k`
//! in the direction `n_e` equals one and its coefficient is the normal velocity.
//!
//! Every bilinear form here has a piecewise-polynomial integrand of degree at
//! most two and is evaluated in closed form with
//! `int_T lambda_p lambda_q = |T| (1 + delta_pq) / 12`.

use crate::error::{Error, Result};
use crate::mesh::{ElementGeometry, Point};
use crate::params::{PhysicalParams, DIM};
use crate::quadrature::TriangleRule;

pub type Mat6 = [[f64; 6]; 6];

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn unit(k: usize) -> Point {
    if k == 0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

/// `int_T lambda_p lambda_q`.
#[inline]
fn bary_mass(area: f64, p: usize, q: usize) -> f64 {
    if p == q {
        area / 6.0
    } else {
        area / 12.0
    }
}

/// Gradient of the edge bubble `lambda_a lambda_b` as a sum of
/// `lambda_p * g` terms.
fn bubble_grad_terms(g: &ElementGeometry, k: usize) -> [(usize, Point); 2] {
    let (a, b) = ElementGeometry::edge_vertices(k);
    [(b, g.grads[a]), (a, g.grads[b])]
}

/// `2 mu sym(a (x) b) : sym(c (x) d) + lambda (a . b)(c . d)`.
#[inline]
fn elastic_pair(lambda: f64, mu: f64, a: Point, b: Point, c: Point, d: Point) -> f64 {
    mu * (dot(a, c) * dot(b, d) + dot(a, d) * dot(b, c)) + lambda * dot(a, b) * dot(c, d)
}

/// P1 elasticity stiffness `a_T(psi_i, psi_j)`.
pub fn local_elasticity_p1(g: &ElementGeometry, lambda: f64, mu: f64) -> Mat6 {
    let mut m = [[0.0; 6]; 6];
    for l in 0..3 {
        for k in 0..2 {
            for n in 0..3 {
                for j in 0..2 {
                    m[2 * l + k][2 * n + j] =
                        g.area * elastic_pair(lambda, mu, unit(k), g.grads[l], unit(j), g.grads[n]);
                }
            }
        }
    }
    m
}

/// Bubble-related element blocks of the perturbed form.
#[derive(Clone, Debug, PartialEq)]
pub struct BubbleBlocks {
    /// `a_T(Phi_e, psi_j)`, one row per local edge.
    pub coupling: [[f64; 6]; 3],
    /// `(d + 1) a_T(Phi_e, Phi_e)`.
    pub diag: [f64; 3],
    /// `-int_T div Phi_e`.
    pub div: [f64; 3],
}

pub fn local_bubble_blocks(g: &ElementGeometry, lambda: f64, mu: f64) -> BubbleBlocks {
    let mut coupling = [[0.0; 6]; 3];
    let mut diag = [0.0; 3];
    let mut div = [0.0; 3];
    let full = local_bubble_full(g, lambda, mu);
    for e in 0..3 {
        let ne = g.global_normal(e);
        let terms = bubble_grad_terms(g, e);
        // int_T grad phi_e = |T|/3 (g_a + g_b)
        let mean_grad = terms.iter().fold([0.0; 2], |acc, &(_, u)| {
            [acc[0] + g.area / 3.0 * u[0], acc[1] + g.area / 3.0 * u[1]]
        });
        for n in 0..3 {
            for j in 0..2 {
                coupling[e][2 * n + j] = elastic_pair(lambda, mu, ne, mean_grad, unit(j), g.grads[n]);
            }
        }
        diag[e] = (DIM + 1) as f64 * full[e][e];
        div[e] = -g.signs[e] * g.edge_len[e] / 6.0;
    }
    BubbleBlocks { coupling, diag, div }
}

/// Unperturbed bubble-bubble block `a_T(Phi_e, Phi_f)`.
pub fn local_bubble_full(g: &ElementGeometry, lambda: f64, mu: f64) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for e in 0..3 {
        let ne = g.global_normal(e);
        let te = bubble_grad_terms(g, e);
        for f in 0..3 {
            let nf = g.global_normal(f);
            let tf = bubble_grad_terms(g, f);
            let mut s = 0.0;
            for &(p, u) in &te {
                for &(q, v) in &tf {
                    s += bary_mass(g.area, p, q) * elastic_pair(lambda, mu, ne, u, nf, v);
                }
            }
            m[e][f] = s;
        }
    }
    m
}

/// Broken RT0 element blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Rt0Blocks {
    /// `K^-1 int_T psi_e . psi_f`.
    pub mass: [[f64; 3]; 3],
    /// `-int_T div psi_e`.
    pub div: [f64; 3],
    /// `-int_e psi_e . n_{e,T}` (the pairing is diagonal in the local edge).
    pub trace: [f64; 3],
}

pub fn rt0_scale(g: &ElementGeometry, k: usize) -> f64 {
    g.signs[k] * g.edge_len[k] / (2.0 * g.area)
}

pub fn local_rt0(g: &ElementGeometry, permeability: f64) -> Result<Rt0Blocks> {
    if !(permeability > 0.0) {
        return Err(Error::InvalidParameter(format!("permeability {permeability} must be positive")));
    }
    let v = &g.vertices;
    let mut mass = [[0.0; 3]; 3];
    for e in 0..3 {
        for f in 0..3 {
            // int_T (x - x_e).(x - x_f) with x = sum_i lambda_i x_i
            let mut s = 0.0;
            for i in 0..3 {
                let di = [v[i][0] - v[e][0], v[i][1] - v[e][1]];
                for j in 0..3 {
                    let dj = [v[j][0] - v[f][0], v[j][1] - v[f][1]];
                    s += bary_mass(g.area, i, j) * dot(di, dj);
                }
            }
            mass[e][f] = rt0_scale(g, e) * rt0_scale(g, f) * s / permeability;
        }
    }
    let mut div = [0.0; 3];
    let mut trace = [0.0; 3];
    for e in 0..3 {
        div[e] = -g.signs[e] * g.edge_len[e];
        trace[e] = -g.signs[e] * g.edge_len[e];
    }
    Ok(Rt0Blocks { mass, div, trace })
}

/// `-int_T div psi_j` for the six linear displacement basis functions.
pub fn local_div_p1(g: &ElementGeometry) -> [f64; 6] {
    let mut out = [0.0; 6];
    for l in 0..3 {
        for k in 0..2 {
            out[2 * l + k] = -g.area * g.grads[l][k];
        }
    }
    out
}

/// Previous-step coefficients restricted to one element (constrained dofs
/// carry zero).
#[derive(Clone, Copy, Debug, Default)]
pub struct LocalPrev {
    pub u_lin: [f64; 6],
    pub u_bub: [f64; 3],
    pub p: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalLoads {
    pub linear: [f64; 6],
    pub bubble: [f64; 3],
    /// `tau (g, 1)_T + (1/M)(p_prev, 1)_T + alpha (div u_prev, 1)_T`.
    pub pressure: f64,
}

/// Data defining the right-hand side of one time step on one element.
pub struct LoadData<'a> {
    pub body_force: &'a (dyn Fn(Point) -> [f64; 2] + Sync),
    pub source: &'a (dyn Fn(Point) -> f64 + Sync),
    /// Traction per local edge (only on traction boundary edges).
    pub traction: [Option<[f64; 2]>; 3],
    pub prev: LocalPrev,
}

pub fn local_load(g: &ElementGeometry, rule: &TriangleRule, data: &LoadData<'_>, params: &PhysicalParams) -> LocalLoads {
    let mut out = LocalLoads::default();
    let jac = 2.0 * g.area;
    let normals = [g.global_normal(0), g.global_normal(1), g.global_normal(2)];
    let mut source_int = 0.0;
    for (pt, &w) in rule.points.iter().zip(&rule.weights) {
        let lam = ElementGeometry::barycentric_reference(pt[0], pt[1]);
        let x = g.map_reference(pt[0], pt[1]);
        let f = (data.body_force)(x);
        let wj = w * jac;
        for l in 0..3 {
            out.linear[2 * l] += wj * f[0] * lam[l];
            out.linear[2 * l + 1] += wj * f[1] * lam[l];
        }
        for e in 0..3 {
            let (a, b) = ElementGeometry::edge_vertices(e);
            out.bubble[e] += wj * dot(f, normals[e]) * lam[a] * lam[b];
        }
        source_int += wj * (data.source)(x);
    }

    for e in 0..3 {
        if let Some(t) = data.traction[e] {
            let (a, b) = ElementGeometry::edge_vertices(e);
            let half = 0.5 * g.edge_len[e];
            for l in [a, b] {
                out.linear[2 * l] += t[0] * half;
                out.linear[2 * l + 1] += t[1] * half;
            }
            out.bubble[e] += dot(t, normals[e]) * g.edge_len[e] / 6.0;
        }
    }

    let bl = local_div_p1(g);
    let bb = local_bubble_blocks_div(g);
    let neg_div_prev: f64 = bl.iter().zip(&data.prev.u_lin).map(|(b, u)| b * u).sum::<f64>()
        + bb.iter().zip(&data.prev.u_bub).map(|(b, u)| b * u).sum::<f64>();
    out.pressure =
        params.tau * source_int + data.prev.p * g.area / params.biot_modulus - params.alpha * neg_div_prev;
    out
}

fn local_bubble_blocks_div(g: &ElementGeometry) -> [f64; 3] {
    [0, 1, 2].map(|e| -g.signs[e] * g.edge_len[e] / 6.0)
}

/// Gradient (row `i` = gradient of component `i`) of the discrete displacement
/// at a point with barycentric coordinates `lam`.
pub fn displacement_gradient(g: &ElementGeometry, u_lin: &[f64; 6], u_bub: &[f64; 3], lam: [f64; 3]) -> [[f64; 2]; 2] {
    let mut grad = [[0.0; 2]; 2];
    for l in 0..3 {
        for k in 0..2 {
            let c = u_lin[2 * l + k];
            grad[k][0] += c * g.grads[l][0];
            grad[k][1] += c * g.grads[l][1];
        }
    }
    for e in 0..3 {
        if u_bub[e] == 0.0 {
            continue;
        }
        let n = g.global_normal(e);
        let (a, b) = ElementGeometry::edge_vertices(e);
        let gp = [
            lam[b] * g.grads[a][0] + lam[a] * g.grads[b][0],
            lam[b] * g.grads[a][1] + lam[a] * g.grads[b][1],
        ];
        for i in 0..2 {
            grad[i][0] += u_bub[e] * n[i] * gp[0];
            grad[i][1] += u_bub[e] * n[i] * gp[1];
        }
    }
    grad
}

/// Elastic energy density `2 mu eps:eps + lambda (div)^2` of a displacement gradient.
pub fn energy_density(grad: [[f64; 2]; 2], lambda: f64, mu: f64) -> f64 {
    let exy = 0.5 * (grad[0][1] + grad[1][0]);
    let div = grad[0][0] + grad[1][1];
    2.0 * mu * (grad[0][0] * grad[0][0] + grad[1][1] * grad[1][1] + 2.0 * exy * exy) + lambda * div * div
}
