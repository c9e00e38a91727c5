//! Compressed sparse row matrices.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
    /// Set when the matrix is known to be symmetric by construction.
    pub symmetric: bool,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols, "({i},{j}) outside {}x{}", self.nrows, self.ncols);
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values, symmetric: false }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: vec![], values: vec![], symmetric: nrows == ncols }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
            symmetric: true,
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut b = TripletBuilder::new(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn with_symmetric(mut self, flag: bool) -> Self {
        self.symmetric = flag;
        self
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec: x has wrong length");
        assert_eq!(y.len(), self.nrows, "matvec: y has wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `y += a * A x`.
    pub fn matvec_add(&self, a: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi += a * s;
        }
    }

    /// `y += a * A^T x`.
    pub fn matvec_transpose_add(&self, a: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += a * self.values[k] * xi;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let dst = next[j];
                col_idx[dst] = i;
                values[dst] = self.values[k];
                next[j] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values, symmetric: self.symmetric }
    }

    pub fn scale(&self, a: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= a);
        m
    }

    /// Scales row `i` by `d[i]`.
    pub fn scale_rows(&self, d: &[f64]) -> CsrMatrix {
        assert_eq!(d.len(), self.nrows);
        let mut m = self.clone();
        for i in 0..self.nrows {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[k] *= d[i];
            }
        }
        m.symmetric = false;
        m
    }

    /// `a A + b B`.
    pub fn add(&self, a: f64, other: &CsrMatrix, b: f64) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "add: {}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for i in 0..self.nrows {
            let (mut p, pe) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut q, qe) = (other.row_ptr[i], other.row_ptr[i + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { self.col_idx[p] } else { usize::MAX };
                let cq = if q < qe { other.col_idx[q] } else { usize::MAX };
                if cp == cq {
                    col_idx.push(cp);
                    values.push(a * self.values[p] + b * other.values[q]);
                    p += 1;
                    q += 1;
                } else if cp < cq {
                    col_idx.push(cp);
                    values.push(a * self.values[p]);
                    p += 1;
                } else {
                    col_idx.push(cq);
                    values.push(b * other.values[q]);
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: self.symmetric && other.symmetric,
        })
    }

    /// Sparse product `A B` (Gustavson).
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut cols: Vec<usize> = Vec::new();
        row_ptr.push(0);
        for i in 0..self.nrows {
            cols.clear();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (m, a) = (self.col_idx[k], self.values[k]);
                for l in other.row_ptr[m]..other.row_ptr[m + 1] {
                    let j = other.col_idx[l];
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        cols.push(j);
                    }
                    acc[j] += a * other.values[l];
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix { nrows: self.nrows, ncols: other.ncols, row_ptr, col_idx, values, symmetric: false })
    }

    /// `A B A^T`; the result is flagged symmetric when `B` is.
    pub fn triple_product(&self, b: &CsrMatrix) -> Result<CsrMatrix> {
        let ab = self.matmul(b)?;
        let mut out = ab.matmul(&self.transpose())?;
        out.symmetric = b.symmetric;
        Ok(out)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] += v;
            }
        }
        d
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let diff = self.add(1.0, &t, -1.0).expect("square matrix");
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let d = diff.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            0.0
        } else {
            d / scale
        }
    }

    /// Rows and columns `[r0, r1) x [c0, c1)`.
    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> CsrMatrix {
        let mut b = TripletBuilder::new(rows.len(), cols.len());
        for i in rows.clone() {
            for (j, v) in self.row(i) {
                if cols.contains(&j) {
                    b.push(i - rows.start, j - cols.start, v);
                }
            }
        }
        b.build()
    }

    /// Assemble a block matrix from a grid of optional blocks.
    pub fn from_blocks(blocks: &[Vec<Option<&CsrMatrix>>], row_sizes: &[usize], col_sizes: &[usize]) -> Result<CsrMatrix> {
        let nrows: usize = row_sizes.iter().sum();
        let ncols: usize = col_sizes.iter().sum();
        let mut b = TripletBuilder::new(nrows, ncols);
        let mut r0 = 0;
        for (bi, brow) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, blk) in brow.iter().enumerate() {
                if let Some(m) = blk {
                    if m.nrows != row_sizes[bi] || m.ncols != col_sizes[bj] {
                        return Err(Error::DimensionMismatch(format!(
                            "block ({bi},{bj}) is {}x{}, expected {}x{}",
                            m.nrows, m.ncols, row_sizes[bi], col_sizes[bj]
                        )));
                    }
                    for i in 0..m.nrows {
                        for (j, v) in m.row(i) {
                            b.push(r0 + i, c0 + j, v);
                        }
                    }
                }
                c0 += col_sizes[bj];
            }
            r0 += row_sizes[bi];
        }
        Ok(b.build())
    }

    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Block-diagonal matrix with dense 3x3 (or smaller) blocks on index sets.
#[derive(Clone, Debug)]
pub struct BlockDiag {
    pub n: usize,
    /// Global indices and dense row-major block of each element.
    pub blocks: Vec<(Vec<usize>, Vec<f64>)>,
}

impl BlockDiag {
    pub fn to_csr(&self) -> CsrMatrix {
        let mut b = TripletBuilder::new(self.n, self.n);
        for (idx, m) in &self.blocks {
            let k = idx.len();
            for (a, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    b.push(i, j, m[a * k + c]);
                }
            }
        }
        b.build().with_symmetric(true)
    }

    /// Inverts every block (SPD blocks expected).
    pub fn inverse(&self) -> Result<BlockDiag> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (e, (idx, m)) in self.blocks.iter().enumerate() {
            let inv = invert_small(m, idx.len()).ok_or(Error::SingularVelocityBlock(e))?;
            blocks.push((idx.clone(), inv));
        }
        Ok(BlockDiag { n: self.n, blocks })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (idx, m) in &self.blocks {
            let k = idx.len();
            for (a, &i) in idx.iter().enumerate() {
                y[i] += (0..k).map(|c| m[a * k + c] * x[idx[c]]).sum::<f64>();
            }
        }
        y
    }
}

/// Gauss-Jordan inverse of a small dense row-major matrix with partial pivoting.
pub fn invert_small(m: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..k {
        let piv = (col..k).max_by(|&r, &s| a[r * k + col].abs().total_cmp(&a[s * k + col].abs()))?;
        if !(a[piv * k + col].abs() > 1e-14 * scale) {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
                inv.swap(piv * k + c, col * k + c);
            }
        }
        let d = a[col * k + col];
        for c in 0..k {
            a[col * k + c] /= d;
            inv[col * k + c] /= d;
        }
        for r in 0..k {
            if r != col {
                let f = a[r * k + col];
                if f != 0.0 {
                    for c in 0..k {
                        a[r * k + c] -= f * a[col * k + c];
                        inv[r * k + c] -= f * inv[col * k + c];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Sparsity summary used in debug output.
pub fn row_length_histogram(m: &CsrMatrix) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for i in 0..m.nrows {
        *h.entry(m.row_ptr[i + 1] - m.row_ptr[i]).or_insert(0) += 1;
    }
    h
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let m = b[0].len();
        let k = b.len();
        (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
    }

    #[test]
    fn duplicates_summed_and_sorted() {
        let mut b = TripletBuilder::new(2, 3);
        b.push(1, 2, 1.0);
        b.push(0, 1, 2.0);
        b.push(1, 0, 3.0);
        b.push(1, 2, 4.0);
        let m = b.build();
        assert_eq!(m.row_ptr, vec![0, 1, 3]);
        assert_eq!(m.col_idx, vec![1, 0, 2]);
        assert_eq!(m.values, vec![2.0, 3.0, 5.0]);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn empty_rows_and_zero_matrix() {
        let z = CsrMatrix::zeros(3, 2);
        assert_eq!(z.matvec(&[1.0, 2.0]), vec![0.0; 3]);
        assert_eq!(z.transpose().nrows, 2);
    }

    #[test]
    fn small_inverse() {
        let m = [4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let inv = invert_small(&m, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(invert_small(&[1.0, 2.0, 2.0, 4.0], 2).is_none());
    }

    #[test]
    fn matrix_market_output() {
        let m = CsrMatrix::from_diagonal(&[1.0, 2.0]);
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 "));
    }

    fn arb_dense(r: usize, c: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(
            proptest::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], c),
            r,
        )
    }

    proptest! {
        #[test]
        fn products_match_dense(a in arb_dense(4, 5), b in arb_dense(5, 3), x in proptest::collection::vec(-1.0..1.0f64, 5)) {
            let sa = CsrMatrix::from_dense(&a);
            let sb = CsrMatrix::from_dense(&b);
            let prod = sa.matmul(&sb).unwrap().to_dense();
            let oracle = dense_mul(&a, &b);
            for i in 0..4 { for j in 0..3 { prop_assert!((prod[i][j] - oracle[i][j]).abs() < 1e-12); } }
            let y = sa.matvec(&x);
            for i in 0..4 {
                let o: f64 = (0..5).map(|j| a[i][j] * x[j]).sum();
                prop_assert!((y[i] - o).abs() < 1e-12);
            }
            let t = sa.transpose().to_dense();
            for i in 0..4 { for j in 0..5 { prop_assert_eq!(t[j][i], a[i][j]); } }
            let mut yt = vec![0.0; 5];
            sa.matvec_transpose_add(1.0, &y, &mut yt);
            let yt2 = sa.transpose().matvec(&y);
            for j in 0..5 { prop_assert!((yt[j] - yt2[j]).abs() < 1e-12); }
        }

        #[test]
        fn add_matches_dense(a in arb_dense(3, 4), b in arb_dense(3, 4)) {
            let s = CsrMatrix::from_dense(&a).add(2.0, &CsrMatrix::from_dense(&b), -0.5).unwrap().to_dense();
            for i in 0..3 { for j in 0..4 { prop_assert!((s[i][j] - (2.0 * a[i][j] - 0.5 * b[i][j])).abs() < 1e-12); } }
        }
    }

    #[test]
    fn dimension_errors() {
        let a = CsrMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        assert!(a.add(1.0, &CsrMatrix::zeros(3, 2), 1.0).is_err());
    }

    #[test]
    fn block_diag_inverse_and_symmetry() {
        let bd = BlockDiag { n: 4, blocks: vec![(vec![0, 2], vec![2.0, 1.0, 1.0, 2.0]), (vec![1, 3], vec![1.0, 0.0, 0.0, 4.0])] };
        let inv = bd.inverse().unwrap();
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = inv.matvec(&bd.matvec(&x));
        for i in 0..4 {
            assert!((y[i] - x[i]).abs() < 1e-14);
        }
        let c = bd.to_csr();
        assert!(c.symmetric);
        assert_eq!(c.asymmetry(), 0.0);
    }
}
