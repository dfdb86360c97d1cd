//! Sparse complex operators on a composite space.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::space::HilbertSpace;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Compressed sparse rows, no space attached. Used directly by the
/// integrators after restricting operators to an invariant support.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from unordered triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_cols = Vec::with_capacity(rows.len());
        let mut keep_vals = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                keep_rows.push(r);
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for &r in &keep_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols: keep_cols, vals: keep_vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[span.clone()].binary_search(&j) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, _)| i == j)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        if factor == ZERO {
            return Self::from_triplets(self.n, Vec::new());
        }
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.n, self.entries().map(|(i, j, v)| (j, i, v.conj())).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t: Vec<_> = self.entries().collect();
        t.extend(other.entries());
        Self::from_triplets(self.n, t)
    }

    /// Sparse product via a dense accumulator row.
    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut acc = vec![ZERO; n];
        let mut touched = vec![false; n];
        let mut marks = Vec::new();
        let mut triplets = Vec::new();
        for i in 0..n {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        marks.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &marks {
                triplets.push((i, j, acc[j]));
                acc[j] = ZERO;
                touched[j] = false;
            }
            marks.clear();
        }
        Self::from_triplets(n, triplets)
    }

    /// `out += factor * self * x`
    #[inline]
    pub fn apply_add(&self, factor: C64, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = ZERO;
            for (j, v) in self.row(i) {
                s += v * x[j];
            }
            *o += factor * s;
        }
    }

    /// `out += factor * self * m` for a row-major dense `n x n` matrix `m`.
    pub fn mul_dense_add(&self, factor: C64, m: &[C64], out: &mut [C64]) {
        let n = self.n;
        for (i, out_row) in out.chunks_exact_mut(n).enumerate() {
            for (k, v) in self.row(i) {
                let w = factor * v;
                let src = &m[k * n..(k + 1) * n];
                for (o, &s) in out_row.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    }

    /// Restriction to the rows and columns listed in `support`, reindexed
    /// in the order given.
    pub fn restrict(&self, support: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in support.iter().enumerate() {
            map[old] = new;
        }
        let triplets = self
            .entries()
            .filter(|&(i, j, _)| map[i] != usize::MAX && map[j] != usize::MAX)
            .map(|(i, j, v)| (map[i], map[j], v))
            .collect();
        Self::from_triplets(support.len(), triplets)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        m
    }
}

/// A complex sparse matrix acting on a [`HilbertSpace`].
#[derive(Clone, PartialEq)]
pub struct SparseOperator {
    space: Arc<HilbertSpace>,
    matrix: CsrMatrix,
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseOperator")
            .field("dim", &self.dim())
            .field("nnz", &self.nnz())
            .finish()
    }
}

impl SparseOperator {
    pub fn from_triplets(
        space: Arc<HilbertSpace>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let n = space.dim();
        let triplets: Vec<_> = triplets.into_iter().collect();
        if let Some(&(row, col, _)) = triplets.iter().find(|&&(r, c, _)| r >= n || c >= n) {
            return Err(Error::IndexOutOfRange { row, col, dim: n });
        }
        Ok(Self { matrix: CsrMatrix::from_triplets(n, triplets), space })
    }

    pub fn zero(space: Arc<HilbertSpace>) -> Self {
        let n = space.dim();
        Self { matrix: CsrMatrix::from_triplets(n, Vec::new()), space }
    }

    pub fn identity(space: Arc<HilbertSpace>) -> Self {
        let n = space.dim();
        Self { matrix: CsrMatrix::from_triplets(n, (0..n).map(|i| (i, i, ONE)).collect()), space }
    }

    /// `|row><col|`
    pub fn transition(space: Arc<HilbertSpace>, row: usize, col: usize) -> Result<Self> {
        Self::from_triplets(space, [(row, col, ONE)])
    }

    /// `|k><k|`
    pub fn projector(space: Arc<HilbertSpace>, k: usize) -> Result<Self> {
        Self::transition(space, k, k)
    }

    /// Truncated bosonic annihilation operator on a single mode space.
    pub fn annihilation(space: Arc<HilbertSpace>) -> Self {
        let n = space.dim();
        let triplets = (1..n).map(|k| (k - 1, k, C64::new((k as f64).sqrt(), 0.0))).collect();
        Self { matrix: CsrMatrix::from_triplets(n, triplets), space }
    }

    /// `|v><v|` for a (not necessarily normalized) vector.
    pub fn ket_bra(space: Arc<HilbertSpace>, ket: &[C64], bra: &[C64]) -> Result<Self> {
        let n = space.dim();
        if ket.len() != n || bra.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: ket.len().min(bra.len()) });
        }
        let support_k: Vec<_> = ket.iter().enumerate().filter(|(_, v)| **v != ZERO).collect();
        let support_b: Vec<_> = bra.iter().enumerate().filter(|(_, v)| **v != ZERO).collect();
        let mut triplets = Vec::with_capacity(support_k.len() * support_b.len());
        for &(i, a) in &support_k {
            for &(j, b) in &support_b {
                triplets.push((i, j, a * b.conj()));
            }
        }
        Ok(Self { matrix: CsrMatrix::from_triplets(n, triplets), space })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.matrix.entries()
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: impl Into<C64>) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.scaled(factor.into()) }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.add(&other.matrix) })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.matmul(&other.matrix) })
    }

    /// `XY - YX`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.try_mul(other)? - other.try_mul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    /// Frobenius norm of `X - X^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        (self.clone() - self.dagger()).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim()];
        self.matrix.apply_add(ONE, x, &mut out);
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        self.matrix.to_dense()
    }
}

/// Lifts an operator on a single subsystem to the full space, acting as the
/// identity on every other factor.
pub fn embed(local: &SparseOperator, target_label: &str, space: &Arc<HilbertSpace>) -> Result<SparseOperator> {
    let pos = space.position(target_label)?;
    let d = space.subsystems()[pos].dim;
    if local.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: local.dim() });
    }
    let stride = space.strides()[pos];
    let outer = space.dim() / (d * stride);
    let mut triplets = Vec::with_capacity(local.nnz() * outer * stride);
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * d * stride + inner;
            for (r, c, v) in local.entries() {
                triplets.push((base + r * stride, base + c * stride, v));
            }
        }
    }
    SparseOperator::from_triplets(space.clone(), triplets)
}

impl Add for SparseOperator {
    type Output = SparseOperator;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("operator spaces differ")
    }
}

impl Sub for SparseOperator {
    type Output = SparseOperator;
    fn sub(self, rhs: Self) -> Self {
        self.try_add(&rhs.scale(-1.0)).expect("operator spaces differ")
    }
}

impl Neg for SparseOperator {
    type Output = SparseOperator;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: Self) -> SparseOperator {
        self.try_mul(rhs).expect("operator spaces differ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceLayout, A1, B1, MODE1};

    fn protocol() -> Arc<HilbertSpace> {
        build_space(SpaceLayout::protocol(2)).unwrap()
    }

    #[test]
    fn embedding_nonzero_counts() {
        let space = protocol();
        let a = build_space(SpaceLayout::single("q", 5)).unwrap();
        let t = SparseOperator::transition(a, 3, 2).unwrap();
        assert_eq!(embed(&t, A1, &space).unwrap().nnz(), 180);

        let m = build_space(SpaceLayout::single("m", 2)).unwrap();
        let ann = SparseOperator::annihilation(m);
        assert_eq!(embed(&ann, MODE1, &space).unwrap().nnz(), 450);

        let b = build_space(SpaceLayout::single("b", 3)).unwrap();
        let id = embed(&SparseOperator::identity(b), B1, &space).unwrap();
        assert_eq!(id, SparseOperator::identity(space.clone()));
    }

    #[test]
    fn embedding_errors() {
        let space = protocol();
        let b = build_space(SpaceLayout::single("b", 3)).unwrap();
        let x = SparseOperator::identity(b);
        assert!(matches!(embed(&x, "zz", &space), Err(Error::UnknownLabel(_))));
        assert!(matches!(embed(&x, A1, &space), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn out_of_range_triplet() {
        let q = build_space(SpaceLayout::single("q", 2)).unwrap();
        assert!(SparseOperator::from_triplets(q, [(2, 0, ONE)]).is_err());
    }

    #[test]
    fn cancellation_drops_entries() {
        let q = build_space(SpaceLayout::single("q", 2)).unwrap();
        let x = SparseOperator::transition(q, 0, 1).unwrap();
        assert_eq!((x.clone() - x).nnz(), 0);
    }

    #[test]
    fn mismatched_spaces() {
        let p = build_space(SpaceLayout::single("q", 2)).unwrap();
        let q = build_space(SpaceLayout::single("q", 3)).unwrap();
        let x = SparseOperator::identity(p);
        let y = SparseOperator::identity(q);
        assert!(matches!(x.try_mul(&y), Err(Error::SpaceMismatch)));
    }
}
