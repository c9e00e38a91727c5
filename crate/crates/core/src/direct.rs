//! Sparse direct factorizations and small dense helpers backed by faer.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatMut, Side};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

fn to_faer(a: &CsrMatrix) -> Result<SparseColMat<usize, f64>> {
    let mut t = Vec::with_capacity(a.nnz());
    for i in 0..a.nrows {
        for (j, v) in a.row(i) {
            t.push(Triplet::new(i, j, v));
        }
    }
    SparseColMat::try_new_from_triplets(a.nrows, a.ncols, &t)
        .map_err(|e| Error::Factorization(format!("sparse conversion: {e:?}")))
}

fn check_square(a: &CsrMatrix) -> Result<()> {
    if a.nrows != a.ncols || a.nrows == 0 {
        return Err(Error::DimensionMismatch(format!("expected a non-empty square matrix, got {}x{}", a.nrows, a.ncols)));
    }
    Ok(())
}

/// Sparse Cholesky factorization. Fails on matrices that are not SPD.
pub struct SpdFactor {
    n: usize,
    llt: Llt<usize, f64>,
}

impl SpdFactor {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        check_square(a)?;
        let llt = to_faer(a)?
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("Cholesky: {e:?}")))?;
        Ok(SpdFactor { n: a.nrows, llt })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        self.llt.solve_in_place(MatMut::from_column_major_slice_mut(x, self.n, 1));
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Sparse LU factorization with pivoting for general square matrices.
pub struct LuFactor {
    n: usize,
    lu: Lu<usize, f64>,
}

impl LuFactor {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        check_square(a)?;
        let lu = to_faer(a)?.sp_lu().map_err(|e| Error::Factorization(format!("LU: {e:?}")))?;
        Ok(LuFactor { n: a.nrows, lu })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        self.lu.solve_in_place(MatMut::from_column_major_slice_mut(&mut x, self.n, 1));
        x
    }
}

pub fn dense_from_csr(a: &CsrMatrix) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(a.nrows, a.ncols);
    for i in 0..a.nrows {
        for (j, v) in a.row(i) {
            m[(i, j)] += v;
        }
    }
    m
}

/// Eigenvalues of the symmetric part of a dense square matrix, ascending.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let s = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut ev = s
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Factorization(format!("eigenvalues: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Singular values, descending.
pub fn singular_values(a: &Mat<f64>) -> Result<Vec<f64>> {
    let mut sv = a.singular_values().map_err(|e| Error::Factorization(format!("SVD: {e:?}")))?;
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Dense lower Cholesky factor.
pub fn dense_cholesky(a: &Mat<f64>) -> Result<Mat<f64>> {
    let llt = a.llt(Side::Lower).map_err(|e| Error::Factorization(format!("dense Cholesky: {e:?}")))?;
    Ok(llt.L().to_owned())
}

/// Solves `L X = B` in place for lower-triangular `L`.
pub fn lower_solve_in_place(l: &Mat<f64>, b: &mut Mat<f64>) {
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l.as_ref(), b.as_mut(), faer::Par::Seq);
}
