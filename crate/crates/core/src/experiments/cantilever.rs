//! Time stepping of the cantilever bracket and its pressure oscillation.

use serde::Serialize;

use crate::dofs::DofMap;
use crate::error::Result;
use crate::experiments::cases::CantileverCase;
use crate::experiments::norms::oscillation_index;
use crate::mesh::Mesh;
use crate::par::Exec;
use crate::system::{step, Forcing, LinearSolver, Scheme, State};

#[derive(Clone, Debug, Serialize)]
pub struct CantileverRun {
    pub scheme: Scheme,
    pub n: usize,
    pub final_time: f64,
    /// Pressure per triangle at the final time.
    pub pressure: Vec<f64>,
    pub centroids: Vec<[f64; 2]>,
    pub oscillation: f64,
    /// Outer iterations per step (zero for direct solves).
    pub iterations: Vec<usize>,
}

pub fn run_cantilever(case: &CantileverCase, scheme: Scheme, n: usize, solver: &LinearSolver, exec: Exec) -> Result<CantileverRun> {
    let params = case.params()?;
    let mesh = Mesh::uniform(n)?;
    let bc = case.boundary();
    let dofs = DofMap::build(&mesh, &bc, scheme.has_bubbles())?;
    let forcing = Forcing::zero();
    let mut state = State::zeros(&dofs);
    let mut iterations = Vec::with_capacity(case.steps);
    for _ in 0..case.steps {
        let (s, report) = step(&state, &mesh, &dofs, &params, &bc, &forcing, scheme, solver, exec)?;
        iterations.push(report.iterations);
        state = s;
    }
    Ok(CantileverRun {
        scheme,
        n,
        final_time: case.final_time(),
        oscillation: oscillation_index(&state.p, &mesh),
        centroids: (0..mesh.num_triangles()).map(|t| mesh.centroid(t)).collect(),
        pressure: state.p,
        iterations,
    })
}
