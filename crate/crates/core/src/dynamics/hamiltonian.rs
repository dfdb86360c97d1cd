use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{CsrMatrix, SparseOperator};
use crate::space::HilbertSpace;

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct DriveTerm {
    pub label: String,
    pub operator: SparseOperator,
    pub coefficient: Coefficient,
}

impl fmt::Debug for DriveTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriveTerm").field("label", &self.label).field("operator", &self.operator).finish()
    }
}

/// `H(t) = H_static + sum_k c_k(t) H_k` with real coefficients and
/// Hermitian parts.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    static_part: SparseOperator,
    drives: Vec<DriveTerm>,
}

impl DrivenHamiltonian {
    pub fn new(static_part: SparseOperator) -> Self {
        Self { static_part, drives: Vec::new() }
    }

    pub fn zero(space: Arc<HilbertSpace>) -> Self {
        Self::new(SparseOperator::zero(space))
    }

    pub fn with_drive(
        mut self,
        label: impl Into<String>,
        operator: SparseOperator,
        coefficient: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        self.push_drive(label, operator, Arc::new(coefficient))?;
        Ok(self)
    }

    pub fn push_drive(&mut self, label: impl Into<String>, operator: SparseOperator, coefficient: Coefficient) -> Result<()> {
        if operator.space() != self.static_part.space() {
            return Err(Error::SpaceMismatch);
        }
        self.drives.push(DriveTerm { label: label.into(), operator, coefficient });
        Ok(())
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        self.static_part.space()
    }

    pub fn static_part(&self) -> &SparseOperator {
        &self.static_part
    }

    pub fn drives(&self) -> &[DriveTerm] {
        &self.drives
    }

    /// The assembled operator at time `t`.
    pub fn at(&self, t: f64) -> SparseOperator {
        self.drives.iter().fold(self.static_part.clone(), |h, d| {
            let c = (d.coefficient)(t);
            if c == 0.0 {
                h
            } else {
                h + d.operator.scale(c)
            }
        })
    }

    pub(crate) fn restricted(&self, support: &[usize]) -> RestrictedHamiltonian {
        RestrictedHamiltonian {
            static_part: self.static_part.csr().restrict(support),
            drives: self
                .drives
                .iter()
                .map(|d| (d.operator.csr().restrict(support), d.coefficient.clone()))
                .filter(|(m, _)| m.nnz() > 0)
                .collect(),
        }
    }
}

pub(crate) struct RestrictedHamiltonian {
    pub static_part: CsrMatrix,
    pub drives: Vec<(CsrMatrix, Coefficient)>,
}

impl RestrictedHamiltonian {
    /// Nonzero drive coefficients at `t`.
    pub fn active(&self, t: f64) -> impl Iterator<Item = (&CsrMatrix, f64)> {
        self.drives.iter().filter_map(move |(m, c)| {
            let v = c(t);
            (v != 0.0).then_some((m, v))
        })
    }

    /// `out += factor * H(t) x`
    pub fn apply_add(&self, t: f64, factor: C64, x: &[C64], out: &mut [C64]) {
        self.static_part.apply_add(factor, x, out);
        for (m, c) in self.active(t) {
            m.apply_add(factor * c, x, out);
        }
    }
}
