//! Error norms and the pressure oscillation index.

use serde::Serialize;

use crate::dofs::DofMap;
use crate::error::Result;
use crate::local::{displacement_gradient, energy_density};
use crate::mesh::{ElementGeometry, Mesh, Point};
use crate::par::{self, Exec};
use crate::quadrature::triangle_rule;
use crate::system::State;

pub const NORM_QUADRATURE_DEGREE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorNorms {
    /// `sqrt(a(u - u_h, u - u_h))`, bubble part of `u_h` included.
    pub energy: f64,
    /// `L2` distance of the piecewise-constant pressure to the exact one.
    pub pressure: f64,
}

/// Exact solution used by [`error_norms`].
pub struct ExactSolution<'a> {
    pub displacement_gradient: &'a (dyn Fn(Point) -> [[f64; 2]; 2] + Sync),
    pub pressure: &'a (dyn Fn(Point) -> f64 + Sync),
}

fn element_coeffs(mesh: &Mesh, dofs: &DofMap, state: &State, t: usize) -> ([f64; 6], [f64; 3]) {
    let mut ul = [0.0; 6];
    for (k, d) in dofs.element_ulin(mesh, t).iter().enumerate() {
        if let Some(i) = d {
            ul[k] = state.u_lin[*i];
        }
    }
    let mut ub = [0.0; 3];
    for (k, d) in dofs.element_bubbles(mesh, t).iter().enumerate() {
        if let Some(i) = d {
            ub[k] = state.u_bub[*i];
        }
    }
    (ul, ub)
}

pub fn error_norms(
    mesh: &Mesh,
    dofs: &DofMap,
    state: &State,
    exact: &ExactSolution<'_>,
    lambda: f64,
    mu: f64,
    exec: Exec,
) -> Result<ErrorNorms> {
    let rule = triangle_rule(NORM_QUADRATURE_DEGREE)?;
    let parts: Vec<Result<(f64, f64)>> = par::map_indexed(exec, mesh.num_triangles(), |t| {
        let g = mesh.element_geometry(t)?;
        let (ul, ub) = element_coeffs(mesh, dofs, state, t);
        let (mut e, mut p) = (0.0, 0.0);
        for (pt, w) in rule.points.iter().zip(&rule.weights) {
            let x = g.map_reference(pt[0], pt[1]);
            let lam = ElementGeometry::barycentric_reference(pt[0], pt[1]);
            let gh = displacement_gradient(&g, &ul, &ub, lam);
            let ge = (exact.displacement_gradient)(x);
            let diff = [[ge[0][0] - gh[0][0], ge[0][1] - gh[0][1]], [ge[1][0] - gh[1][0], ge[1][1] - gh[1][1]]];
            let wj = w * 2.0 * g.area;
            e += wj * energy_density(diff, lambda, mu);
            let dp = (exact.pressure)(x) - state.p[t];
            p += wj * dp * dp;
        }
        Ok((e, p))
    });
    let (mut e, mut p) = (0.0, 0.0);
    for part in parts {
        let (a, b) = part?;
        e += a;
        p += b;
    }
    Ok(ErrorNorms { energy: e.sqrt(), pressure: p.sqrt() })
}

/// Sum of absolute pressure jumps over interior edges divided by the range
/// of the field; zero for a constant field.
pub fn oscillation_index(p: &[f64], mesh: &Mesh) -> f64 {
    let (lo, hi) = p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return 0.0;
    }
    let jumps: f64 = mesh
        .edge_to_tri
        .iter()
        .filter_map(|&(a, b)| b.map(|b| (p[a] - p[b]).abs()))
        .sum();
    jumps / range
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dofs::BoundarySpec;
    use crate::experiments::cases::ManufacturedCase;

    #[test]
    fn oscillation_examples() {
        let m = Mesh::uniform(4).unwrap();
        assert_eq!(oscillation_index(&vec![3.0; m.num_triangles()], &m), 0.0);
        // triangles alternate lower/upper within each cell and every neighbour
        // of a lower triangle is an upper one
        let checker: Vec<f64> = (0..m.num_triangles()).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        for &(a, b) in &m.edge_to_tri {
            if let Some(b) = b {
                assert_ne!(checker[a], checker[b]);
            }
        }
        assert_eq!(oscillation_index(&checker, &m), 40.0);
    }

    #[test]
    fn zero_discrete_solution_gives_solution_norm() {
        let m = Mesh::uniform(4).unwrap();
        let d = DofMap::new(&m, &BoundarySpec::clamped_no_flow()).unwrap();
        let s = State::with_pressure(&d, 1.0);
        let exact = ExactSolution {
            displacement_gradient: &ManufacturedCase::displacement_gradient,
            pressure: &ManufacturedCase::pressure,
        };
        let e = error_norms(&m, &d, &s, &exact, 2.0, 1.0, Exec::Sequential).unwrap();
        assert_eq!(e.pressure, 0.0);
        // ||u||_a^2 = mu ||grad u||^2 for divergence-free u vanishing on the boundary
        let e2 = error_norms(&m, &d, &s, &exact, 0.0, 1.0, Exec::Sequential).unwrap();
        assert!((e.energy - e2.energy).abs() < 1e-12);
        assert!(e.energy > 0.05 && e.energy < 0.06, "{}", e.energy);
    }

    #[test]
    fn interpolant_errors() {
        let exact = ExactSolution {
            displacement_gradient: &ManufacturedCase::displacement_gradient,
            pressure: &ManufacturedCase::pressure,
        };
        let energy = |n: usize| {
            let m = Mesh::uniform(n).unwrap();
            let d = DofMap::new(&m, &BoundarySpec::clamped_no_flow()).unwrap();
            let mut s = State::with_pressure(&d, 1.0);
            for (v, ids) in d.ulin.iter().enumerate() {
                let u = ManufacturedCase::displacement(m.vertices[v]);
                for k in 0..2 {
                    if let Some(i) = ids[k] {
                        s.u_lin[i] = u[k];
                    }
                }
            }
            let e = error_norms(&m, &d, &s, &exact, 2.0, 1.0, Exec::Sequential).unwrap();
            assert!(e.pressure < 1e-14);
            e.energy
        };
        let (e8, e16) = (energy(8), energy(16));
        let rate = (e8 / e16).log2();
        assert!((0.9..1.1).contains(&rate), "{rate}");
    }
}
