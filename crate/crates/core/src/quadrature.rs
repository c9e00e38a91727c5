//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)` and on `[0, 1]`.
//!
//! Degrees 1 and 2 use the centroid and the classical three-point interior rule.
//! Higher degrees use the collapsed (Duffy) product of Gauss-Legendre rules,
//! which is exact for every polynomial of the requested total degree.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 12;

#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule exact for polynomials of total degree `degree`; weights sum to 1/2.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    match degree {
        1 => Ok(TriangleRule { points: vec![[1.0 / 3.0, 1.0 / 3.0]], weights: vec![0.5] }),
        2 => Ok(TriangleRule {
            points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            weights: vec![1.0 / 6.0; 3],
        }),
        3..=MAX_DEGREE => Ok(collapsed_rule(degree)),
        _ => Err(Error::UnsupportedQuadrature(degree)),
    }
}

fn collapsed_rule(degree: usize) -> TriangleRule {
    // x = u (1 - v), y = v, dx dy = (1 - v) du dv. The integrand has degree
    // `degree` in u and `degree + 1` in v.
    let (gu, wu) = gauss_legendre((degree + 1).div_ceil(2));
    let (gv, wv) = gauss_legendre((degree + 2).div_ceil(2));
    let mut points = Vec::with_capacity(gu.len() * gv.len());
    let mut weights = Vec::with_capacity(gu.len() * gv.len());
    for (&v, &wvi) in gv.iter().zip(&wv) {
        for (&u, &wui) in gu.iter().zip(&wu) {
            points.push([u * (1.0 - v), v]);
            weights.push(wui * wvi * (1.0 - v));
        }
    }
    TriangleRule { points, weights }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}
