//! Pure and mixed states on a composite space.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{SparseOperator, ONE, ZERO};
use crate::space::{HilbertSpace, SpaceLayout};

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    space: Arc<HilbertSpace>,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(space: Arc<HilbertSpace>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: amplitudes.len() });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn basis(space: Arc<HilbertSpace>, k: usize) -> Result<Self> {
        let n = space.dim();
        if k >= n {
            return Err(Error::IndexOutOfRange { row: k, col: 0, dim: n });
        }
        let mut amplitudes = vec![ZERO; n];
        amplitudes[k] = ONE;
        Ok(Self { space, amplitudes })
    }

    /// Superposition of basis states; the result is normalized.
    pub fn superposition(space: Arc<HilbertSpace>, terms: &[(usize, C64)]) -> Result<Self> {
        let n = space.dim();
        let mut amplitudes = vec![ZERO; n];
        for &(k, a) in terms {
            if k >= n {
                return Err(Error::IndexOutOfRange { row: k, col: 0, dim: n });
            }
            amplitudes[k] += a;
        }
        let mut s = Self { space, amplitudes };
        s.normalize()?;
        Ok(s)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero vector".into()));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(())
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.amplitudes[k].norm_sqr()
    }

    pub fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        if op.space().as_ref() != self.space.as_ref() {
            return Err(Error::SpaceMismatch);
        }
        let hv = op.apply(&self.amplitudes);
        Ok(self.amplitudes.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_density(&self) -> DensityState {
        let n = self.space.dim();
        let mut data = vec![ZERO; n * n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in self.amplitudes.iter().enumerate() {
                data[i * n + j] = a * b.conj();
            }
        }
        DensityState { space: self.space.clone(), data }
    }
}

/// Dense density matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    space: Arc<HilbertSpace>,
    data: Vec<C64>,
}

impl DensityState {
    pub fn new(space: Arc<HilbertSpace>, data: Vec<C64>) -> Result<Self> {
        let n = space.dim();
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(Self { space, data })
    }

    pub fn from_dense(space: Arc<HilbertSpace>, m: &DMatrix<C64>) -> Result<Self> {
        let n = space.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
        let data = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
        Ok(Self { space, data })
    }

    /// `identity / dim`
    pub fn maximally_mixed(space: Arc<HilbertSpace>) -> Self {
        let n = space.dim();
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = C64::new(1.0 / n as f64, 0.0);
        }
        Self { space, data }
    }

    /// Convex mixture `sum w_k rho_k`.
    pub fn mixture(parts: &[(f64, &DensityState)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?.1;
        let mut data = vec![ZERO; first.data.len()];
        for &(w, rho) in parts {
            if rho.space != first.space {
                return Err(Error::SpaceMismatch);
            }
            for (d, s) in data.iter_mut().zip(&rho.data) {
                *d += w * s;
            }
        }
        Ok(Self { space: first.space.clone(), data })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn trace(&self) -> C64 {
        let n = self.dim();
        (0..n).map(|i| self.data[i * n + i]).sum()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.get(k, k).re
    }

    /// Max-abs entry of `rho - rho^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn symmetrize(&mut self) {
        let n = self.dim();
        symmetrize_in_place(&mut self.data, n);
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.data[i * n + j])
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.to_dense();
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `<psi|rho|psi>`
    pub fn fidelity_with(&self, psi: &PureState) -> Result<f64> {
        if psi.space().as_ref() != self.space.as_ref() {
            return Err(Error::SpaceMismatch);
        }
        let n = self.dim();
        let a = psi.amplitudes();
        let support: Vec<usize> = (0..n).filter(|&i| a[i] != ZERO).collect();
        let mut f = ZERO;
        for &i in &support {
            for &j in &support {
                f += a[i].conj() * self.data[i * n + j] * a[j];
            }
        }
        Ok(f.re)
    }
}

pub(crate) fn symmetrize_in_place(data: &mut [C64], n: usize) {
    for i in 0..n {
        data[i * n + i].im = 0.0;
        for j in (i + 1)..n {
            let avg = (data[i * n + j] + data[j * n + i].conj()) * 0.5;
            data[i * n + j] = avg;
            data[j * n + i] = avg.conj();
        }
    }
}

/// `Tr(op rho)`
pub fn expectation(op: &SparseOperator, state: &DensityState) -> Result<C64> {
    if op.space().as_ref() != state.space.as_ref() {
        return Err(Error::SpaceMismatch);
    }
    let n = state.dim();
    Ok(op.entries().map(|(i, k, v)| v * state.data[k * n + i]).sum())
}

/// Reduced density matrix over `keep_labels`, in layout order.
pub fn partial_trace(state: &DensityState, keep_labels: &[&str]) -> Result<DensityState> {
    let space = state.space();
    if keep_labels.is_empty() {
        return Err(Error::InvalidParameter("partial trace must keep at least one subsystem".into()));
    }
    let mut keep = vec![false; space.subsystems().len()];
    for label in keep_labels {
        keep[space.position(label)?] = true;
    }
    let mut kept_layout = SpaceLayout::new();
    for (s, &k) in space.subsystems().iter().zip(&keep) {
        if k {
            kept_layout = kept_layout.with(s.label.clone(), s.dim);
        }
    }
    let kept_space = Arc::new(HilbertSpace::new(kept_layout)?);
    let kd = kept_space.dim();
    let rd = space.dim() / kd;

    // full index for every (kept, traced) pair
    let mut full = vec![0usize; kd * rd];
    let mut fill = vec![0usize; kd];
    for f in 0..space.dim() {
        let levels = space.levels(f);
        let mut k_idx = 0;
        for (pos, s) in space.subsystems().iter().enumerate() {
            if keep[pos] {
                k_idx = k_idx * s.dim + levels[pos];
            }
        }
        full[k_idx * rd + fill[k_idx]] = f;
        fill[k_idx] += 1;
    }

    let n = space.dim();
    let mut data = vec![ZERO; kd * kd];
    for a in 0..kd {
        for b in 0..kd {
            let mut s = ZERO;
            for t in 0..rd {
                s += state.data[full[a * rd + t] * n + full[b * rd + t]];
            }
            data[a * kd + b] = s;
        }
    }
    Ok(DensityState { space: kept_space, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, A1, B1, B2, MODE1, MODE2};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn expectation_of_identity_and_projectors() {
        let space = build_space(SpaceLayout::single("q", 4)).unwrap();
        let v = PureState::superposition(space.clone(), &[(0, ONE), (2, C64::new(0.0, 1.0))]).unwrap();
        let w = PureState::superposition(space.clone(), &[(0, ONE), (2, C64::new(0.0, -1.0))]).unwrap();
        let rho_v = v.to_density();
        let rho_w = w.to_density();
        let id = SparseOperator::identity(space.clone());
        assert!(close(expectation(&id, &rho_v).unwrap().re, 1.0, 1e-14));
        let p = SparseOperator::ket_bra(space.clone(), v.amplitudes(), v.amplitudes()).unwrap();
        assert!(close(expectation(&p, &rho_v).unwrap().re, 1.0, 1e-14));
        assert!(close(expectation(&p, &rho_w).unwrap().norm(), 0.0, 1e-14));
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let space = build_space(SpaceLayout::protocol(2)).unwrap();
        let rho = DensityState::maximally_mixed(space);
        let r = partial_trace(&rho, &[A1]).unwrap();
        assert_eq!(r.dim(), 5);
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 0.2 } else { 0.0 };
                assert!(close(r.get(i, j).re, expect, 1e-12) && r.get(i, j).im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_product_state_recovers_factor() {
        let space = build_space(SpaceLayout::protocol(2)).unwrap();
        // |1>A1 (|0>+|1>)B1 |2>B2, cavities in vacuum
        let k1 = space.index_of(&[(A1, 1), (B1, 0), (B2, 2)]).unwrap();
        let k2 = space.index_of(&[(A1, 1), (B1, 1), (B2, 2)]).unwrap();
        let psi = PureState::superposition(space, &[(k1, ONE), (k2, ONE)]).unwrap();
        let r = partial_trace(&psi.to_density(), &["A1", "A2", "B1", "B2"]).unwrap();
        let q = PureState::superposition(
            r.space().clone(),
            &[
                (r.space().index_of(&[(A1, 1), (B1, 0), (B2, 2)]).unwrap(), ONE),
                (r.space().index_of(&[(A1, 1), (B1, 1), (B2, 2)]).unwrap(), ONE),
            ],
        )
        .unwrap();
        assert!(close(r.fidelity_with(&q).unwrap(), 1.0, 1e-12));
        assert!(close(r.trace().re, 1.0, 1e-12));
        assert!(partial_trace(&psi.to_density(), &[MODE1, MODE2]).is_ok());
        assert!(partial_trace(&psi.to_density(), &["nope"]).is_err());
        assert!(partial_trace(&psi.to_density(), &[]).is_err());
    }

    #[test]
    fn bell_pair_reduces_to_half_identity_block() {
        // |Psi+> on two qutrits, trace out the second
        let space = build_space(SpaceLayout::new().with(B1, 3).with(B2, 3)).unwrap();
        let psi = PureState::superposition(space.clone(), &[(0, ONE), (4, ONE)]).unwrap();
        let r = partial_trace(&psi.to_density(), &[B1]).unwrap();
        let expected = [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((r.get(i, j) - C64::new(expected[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn min_eigenvalue_of_pure_state_is_zero() {
        let space = build_space(SpaceLayout::single("q", 6)).unwrap();
        let psi = PureState::superposition(space, &[(1, ONE), (4, C64::new(0.3, -0.2))]).unwrap();
        let ev = psi.to_density().eigenvalues();
        assert!(ev[0].abs() < 1e-12);
        assert!(close(*ev.last().unwrap(), 1.0, 1e-12));
    }
}
