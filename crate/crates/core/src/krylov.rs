//! Flexible GMRES and preconditioned conjugate gradients.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::{axpy, dot, norm2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    Breakdown,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Relative residual after each iteration, starting with the initial one.
    pub relative_residuals: Vec<f64>,
    pub converged: bool,
    pub status: SolverStatus,
    /// Seconds.
    pub wall_time: f64,
}

impl SolverReport {
    pub fn final_residual(&self) -> f64 {
        self.relative_residuals.last().copied().unwrap_or(0.0)
    }

    /// Converts a non-converged report into an error.
    pub fn ok(&self) -> Result<()> {
        match self.status {
            SolverStatus::Converged => Ok(()),
            SolverStatus::MaxIterations => {
                Err(Error::NotConverged { iterations: self.iterations, residual: self.final_residual() })
            }
            SolverStatus::Breakdown => Err(Error::Breakdown(self.iterations)),
        }
    }

    pub(crate) fn direct(residual: f64, started: Instant) -> SolverReport {
        SolverReport {
            iterations: 0,
            relative_residuals: vec![residual],
            converged: true,
            status: SolverStatus::Converged,
            wall_time: started.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GmresOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Krylov subspace dimension before restarting; `None` means no restart.
    pub restart: Option<usize>,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { tol: 1e-8, max_iter: 500, restart: None }
    }
}

/// Right-preconditioned flexible GMRES (modified Gram-Schmidt, Givens
/// rotations). The preconditioner may change from one application to the
/// next. Relative residuals are measured against `||b||`, or against the
/// initial residual when `b = 0`. Convergence is confirmed on the true
/// residual at the end of each cycle.
pub fn fgmres<A, P>(apply_a: A, mut apply_p: P, b: &[f64], x0: &[f64], opts: &GmresOptions) -> (Vec<f64>, SolverReport)
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: FnMut(&[f64]) -> Vec<f64>,
{
    let started = Instant::now();
    let n = b.len();
    assert_eq!(x0.len(), n, "initial guess has wrong length");
    let mut x = x0.to_vec();
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = apply_a(x);
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
    };
    let mut r = residual(&x);
    let bnorm = norm2(b);
    let r0norm = norm2(&r);
    let base = if bnorm > 0.0 { bnorm } else { r0norm };
    let mut history = Vec::new();
    if base == 0.0 {
        history.push(0.0);
        return (
            x,
            SolverReport {
                iterations: 0,
                relative_residuals: history,
                converged: true,
                status: SolverStatus::Converged,
                wall_time: started.elapsed().as_secs_f64(),
            },
        );
    }
    history.push(r0norm / base);
    if r0norm / base <= opts.tol {
        return (x, finish(0, history, SolverStatus::Converged, started));
    }

    let m = opts.restart.unwrap_or(opts.max_iter).max(1);
    let mut iterations = 0;
    loop {
        let beta = norm2(&r);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut breakdown = false;
        let mut happy = false;

        while z.len() < m && iterations < opts.max_iter {
            let j = z.len();
            let zj = apply_p(&v[j]);
            let mut w = apply_a(&zj);
            z.push(zj);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                col[i] = dot(&w, vi);
                axpy(-col[i], vi, &mut w);
            }
            let wn = norm2(&w);
            col[j + 1] = wn;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let d = col[j].hypot(col[j + 1]);
            iterations += 1;
            if d == 0.0 {
                breakdown = true;
                h.push(col);
                break;
            }
            let (c, s) = (col[j] / d, col[j + 1] / d);
            col[j] = d;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(col);
            history.push(g[j + 1].abs() / base);
            let scale = h.iter().map(|c| c.iter().fold(0.0f64, |a, v| a.max(v.abs()))).fold(0.0f64, f64::max);
            if wn <= 1e-14 * scale {
                happy = true;
                break;
            }
            v.push(w.iter().map(|wi| wi / wn).collect());
            if g[j + 1].abs() / base <= opts.tol {
                break;
            }
        }

        let k = cs.len();
        // back substitution for y in H y = g
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= h[l][i] * y[l];
            }
            y[i] = s / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            axpy(*yi, zi, &mut x);
        }
        r = residual(&x);
        let true_rel = norm2(&r) / base;
        if let Some(last) = history.last_mut() {
            *last = true_rel;
        }
        if true_rel <= opts.tol {
            return (x, finish(iterations, history, SolverStatus::Converged, started));
        }
        if breakdown && !happy {
            return (x, finish(iterations, history, SolverStatus::Breakdown, started));
        }
        if iterations >= opts.max_iter {
            return (x, finish(iterations, history, SolverStatus::MaxIterations, started));
        }
    }
}

fn finish(iterations: usize, history: Vec<f64>, status: SolverStatus, started: Instant) -> SolverReport {
    SolverReport {
        iterations,
        relative_residuals: history,
        converged: status == SolverStatus::Converged,
        status,
        wall_time: started.elapsed().as_secs_f64(),
    }
}

/// Preconditioned conjugate gradients from a zero initial guess. Fails with
/// [`Error::Indefinite`] when a search direction has non-positive curvature.
pub fn pcg<A, P>(apply_a: A, apply_p: P, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolverReport)>
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let started = Instant::now();
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    let mut history = vec![if bnorm > 0.0 { 1.0 } else { 0.0 }];
    if bnorm == 0.0 {
        return Ok((x, finish(0, history, SolverStatus::Converged, started)));
    }
    let mut r = b.to_vec();
    let mut z = apply_p(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply_a(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Indefinite { iteration: it, curvature: pap });
        }
        let a = rz / pap;
        axpy(a, &p, &mut x);
        axpy(-a, &ap, &mut r);
        let rel = norm2(&r) / bnorm;
        history.push(rel);
        if rel <= tol {
            return Ok((x, finish(it, history, SolverStatus::Converged, started)));
        }
        z = apply_p(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok((x, finish(max_iter, history, SolverStatus::MaxIterations, started)))
}
