//! Manufactured-solution error sweeps.

use serde::Serialize;

use crate::dofs::DofMap;
use crate::error::Result;
use crate::experiments::cases::ManufacturedCase;
use crate::experiments::norms::{error_norms, ErrorNorms, ExactSolution};
use crate::mesh::Mesh;
use crate::par::{self, Exec};
use crate::system::{step, LinearSolver, Scheme, State};

/// Final state of the manufactured problem on an `n x n` mesh.
pub fn solve_manufactured(case: &ManufacturedCase, scheme: Scheme, permeability: f64, n: usize, exec: Exec) -> Result<(Mesh, DofMap, State)> {
    let params = case.params(permeability)?;
    let mesh = Mesh::uniform(n)?;
    let bc = case.boundary();
    let dofs = DofMap::build(&mesh, &bc, scheme.has_bubbles())?;
    let forcing = case.forcing();
    let mut state = State::with_pressure(&dofs, ManufacturedCase::pressure([0.0, 0.0]));
    for _ in 0..case.steps() {
        state = step(&state, &mesh, &dofs, &params, &bc, &forcing, scheme, &LinearSolver::Direct, exec)?.0;
    }
    Ok((mesh, dofs, state))
}

pub fn manufactured_errors(case: &ManufacturedCase, scheme: Scheme, permeability: f64, n: usize, exec: Exec) -> Result<ErrorNorms> {
    let (mesh, dofs, state) = solve_manufactured(case, scheme, permeability, n, exec)?;
    let exact = ExactSolution {
        displacement_gradient: &ManufacturedCase::displacement_gradient,
        pressure: &ManufacturedCase::pressure,
    };
    error_norms(&mesh, &dofs, &state, &exact, case.lambda, case.mu, exec)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceCell {
    pub permeability: f64,
    pub n: usize,
    /// `None` when the solve failed; the message is kept in `failure`.
    pub errors: Option<ErrorNorms>,
    pub failure: Option<String>,
    /// `log2(e(N_prev) / e(N))`, against the previous `N` of the row.
    pub energy_rate: Option<f64>,
    pub pressure_rate: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub scheme: Scheme,
    pub permeabilities: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Row-major, one row per permeability.
    pub cells: Vec<ConvergenceCell>,
}

impl ConvergenceTable {
    pub fn cell(&self, permeability_index: usize, size_index: usize) -> &ConvergenceCell {
        &self.cells[permeability_index * self.sizes.len() + size_index]
    }
}

fn rate(prev: f64, cur: f64, n_prev: usize, n: usize) -> Option<f64> {
    (prev > 0.0 && cur > 0.0).then(|| (prev / cur).ln() / (n as f64 / n_prev as f64).ln())
}

/// Cells run in parallel; each one solves sequentially inside.
pub fn run_convergence(case: &ManufacturedCase, scheme: Scheme, ks: &[f64], ns: &[usize], exec: Exec) -> ConvergenceTable {
    let points: Vec<(f64, usize)> = ks.iter().flat_map(|&k| ns.iter().map(move |&n| (k, n))).collect();
    let results = par::map_slice(exec, &points, |&(k, n)| manufactured_errors(case, scheme, k, n, Exec::Sequential));
    let mut cells: Vec<ConvergenceCell> = points
        .iter()
        .zip(results)
        .map(|(&(k, n), r)| {
            let (errors, failure) = match r {
                Ok(e) => (Some(e), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ConvergenceCell { permeability: k, n, errors, failure, energy_rate: None, pressure_rate: None }
        })
        .collect();
    for row in cells.chunks_mut(ns.len()) {
        for j in 1..row.len() {
            if let (Some(a), Some(b)) = (row[j - 1].errors, row[j].errors) {
                let (n0, n1) = (row[j - 1].n, row[j].n);
                row[j].energy_rate = rate(a.energy, b.energy, n0, n1);
                row[j].pressure_rate = rate(a.pressure, b.pressure, n0, n1);
            }
        }
    }
    ConvergenceTable { scheme, permeabilities: ks.to_vec(), sizes: ns.to_vec(), cells }
}
