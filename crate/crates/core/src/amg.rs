//! Unsmoothed aggregation AMG with a symmetric Gauss-Seidel V-cycle.

use serde::Serialize;

use crate::direct::SpdFactor;
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// One greedy matching pass per level (aggregates of about two nodes).
    Pairwise,
    /// Two matching passes per level (aggregates of about four nodes).
    DoublePairwise,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmgConfig {
    pub strength: f64,
    pub max_coarse: usize,
    pub max_levels: usize,
    pub aggregation: Aggregation,
}

impl Default for AmgConfig {
    fn default() -> Self {
        AmgConfig { strength: 0.08, max_coarse: 64, max_levels: 25, aggregation: Aggregation::Pairwise }
    }
}

#[derive(Debug)]
pub struct Level {
    pub a: CsrMatrix,
    /// Aggregate of every fine node.
    pub aggregates: Vec<usize>,
    pub n_coarse: usize,
}

pub struct AmgHierarchy {
    pub levels: Vec<Level>,
    pub coarsest: CsrMatrix,
    coarse_solver: SpdFactor,
    pub config: AmgConfig,
}

/// Greedy pairwise matching on the strength graph. Nodes without a free
/// strong neighbour join the aggregate of their strongest neighbour, or stay
/// alone when they have no strong connection at all.
pub fn pairwise_aggregate(a: &CsrMatrix, strength: f64) -> (Vec<usize>, usize) {
    let n = a.nrows;
    let diag = a.diagonal();
    let strong = |i: usize, j: usize, v: f64| i != j && v.abs() >= strength * (diag[i] * diag[j]).abs().sqrt();
    let mut agg = vec![usize::MAX; n];
    let mut count = 0;
    let mut leftovers = Vec::new();
    for i in 0..n {
        if agg[i] != usize::MAX {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in a.row(i) {
            if agg[j] == usize::MAX && strong(i, j, v) && best.is_none_or(|(_, b)| v.abs() > b) {
                best = Some((j, v.abs()));
            }
        }
        match best {
            Some((j, _)) => {
                agg[i] = count;
                agg[j] = count;
                count += 1;
            }
            None => leftovers.push(i),
        }
    }
    for i in leftovers {
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in a.row(i) {
            if agg[j] != usize::MAX && strong(i, j, v) && best.is_none_or(|(_, b)| v.abs() > b) {
                best = Some((j, v.abs()));
            }
        }
        agg[i] = match best {
            Some((j, _)) => agg[j],
            None => {
                count += 1;
                count - 1
            }
        };
    }
    (agg, count)
}

/// `P^T A P` for the piecewise-constant prolongation of `agg`.
pub fn galerkin(a: &CsrMatrix, agg: &[usize], n_coarse: usize) -> CsrMatrix {
    let mut b = TripletBuilder::with_capacity(n_coarse, n_coarse, a.nnz());
    for i in 0..a.nrows {
        for (j, v) in a.row(i) {
            b.push(agg[i], agg[j], v);
        }
    }
    b.build().with_symmetric(a.symmetric)
}

/// Prolongation matrix of an aggregation.
pub fn prolongation(agg: &[usize], n_coarse: usize) -> CsrMatrix {
    let mut b = TripletBuilder::new(agg.len(), n_coarse);
    for (i, &c) in agg.iter().enumerate() {
        b.push(i, c, 1.0);
    }
    b.build()
}

impl AmgHierarchy {
    pub fn new(a: &CsrMatrix, config: AmgConfig) -> Result<AmgHierarchy> {
        if a.nrows != a.ncols || a.nrows == 0 {
            return Err(Error::DimensionMismatch(format!("AMG needs a non-empty square matrix, got {}x{}", a.nrows, a.ncols)));
        }
        let mut levels = Vec::new();
        let mut current = a.clone();
        while current.nrows > config.max_coarse && levels.len() + 1 < config.max_levels {
            let (mut agg, mut nc) = pairwise_aggregate(&current, config.strength);
            if config.aggregation == Aggregation::DoublePairwise && nc < current.nrows {
                let mid = galerkin(&current, &agg, nc);
                let (agg2, nc2) = pairwise_aggregate(&mid, config.strength);
                if nc2 < nc {
                    agg.iter_mut().for_each(|c| *c = agg2[*c]);
                    nc = nc2;
                }
            }
            if nc >= current.nrows {
                break;
            }
            let coarse = galerkin(&current, &agg, nc);
            levels.push(Level { a: current, aggregates: agg, n_coarse: nc });
            current = coarse;
        }
        let coarse_solver = SpdFactor::new(&current)?;
        Ok(AmgHierarchy { levels, coarsest: current, coarse_solver, config })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows).chain(std::iter::once(self.coarsest.nrows)).collect()
    }

    pub fn size(&self) -> usize {
        self.levels.first().map_or(self.coarsest.nrows, |l| l.a.nrows)
    }

    /// One V(1,1) cycle applied to `r` from a zero initial guess.
    pub fn vcycle(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.size(), "V-cycle residual has wrong length");
        self.cycle(0, r)
    }

    fn cycle(&self, l: usize, b: &[f64]) -> Vec<f64> {
        if l == self.levels.len() {
            return self.coarse_solver.solve(b);
        }
        let level = &self.levels[l];
        let a = &level.a;
        let mut x = vec![0.0; a.nrows];
        gauss_seidel(a, b, &mut x, false);
        let ax = a.matvec(&x);
        let mut rc = vec![0.0; level.n_coarse];
        for i in 0..a.nrows {
            rc[level.aggregates[i]] += b[i] - ax[i];
        }
        let ec = self.cycle(l + 1, &rc);
        for i in 0..a.nrows {
            x[i] += ec[level.aggregates[i]];
        }
        gauss_seidel(a, b, &mut x, true);
        x
    }
}

fn gauss_seidel(a: &CsrMatrix, b: &[f64], x: &mut [f64], backward: bool) {
    let sweep = |i: usize, x: &mut [f64]| {
        let mut s = b[i];
        let mut d = 0.0;
        for (j, v) in a.row(i) {
            if j == i {
                d += v;
            } else {
                s -= v * x[j];
            }
        }
        x[i] = s / d;
    };
    if backward {
        for i in (0..a.nrows).rev() {
            sweep(i, x);
        }
    } else {
        for i in 0..a.nrows {
            sweep(i, x);
        }
    }
}
