//! Orthonormal basis that grows block by block while keeping `AQ`, `QᵀAQ`
//! and `QᵀF` current, so projected matrices cost only the new columns.

use nalgebra::DMatrix;

use super::factor::{orthonormal_extend, orthonormalize};
use super::operator::LinearOperator;
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub(crate) struct GrowingBasis<T: Scalar> {
    /// Orthonormal columns.
    pub q: DMatrix<T>,
    /// `A Q`
    pub aq: DMatrix<T>,
    /// `Qᵀ A Q`
    pub proj: DMatrix<T>,
    /// `Qᵀ F` for the fixed right-hand side `F`.
    pub qf: DMatrix<T>,
    f: DMatrix<T>,
}

impl<T: Scalar> GrowingBasis<T> {
    pub fn new(n: usize, f: DMatrix<T>) -> Self {
        let m = f.ncols();
        Self {
            q: DMatrix::zeros(n, 0),
            aq: DMatrix::zeros(n, 0),
            proj: DMatrix::zeros(0, 0),
            qf: DMatrix::zeros(0, m),
            f,
        }
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    /// Appends the part of `block` not yet in the span. Returns the number of
    /// columns added.
    pub fn extend<O: LinearOperator<T> + ?Sized>(&mut self, a: &O, block: &DMatrix<T>) -> Result<usize> {
        let k = self.dim();
        let q = orthonormal_extend(&self.q, block)?;
        let added = q.ncols() - k;
        if added == 0 {
            return Ok(0);
        }
        let qn = q.columns(k, added).into_owned();
        let aqn = a.apply(&qn);
        let mut proj = DMatrix::zeros(k + added, k + added);
        proj.view_mut((0, 0), (k, k)).copy_from(&self.proj);
        proj.view_mut((0, k), (k, added)).copy_from(&self.q.tr_mul(&aqn));
        proj.view_mut((k, 0), (added, k)).copy_from(&qn.tr_mul(&self.aq));
        proj.view_mut((k, k), (added, added)).copy_from(&qn.tr_mul(&aqn));
        let mut qf = DMatrix::zeros(k + added, self.f.ncols());
        qf.rows_mut(0, k).copy_from(&self.qf);
        qf.rows_mut(k, added).copy_from(&qn.tr_mul(&self.f));
        let mut aq = DMatrix::zeros(q.nrows(), k + added);
        aq.columns_mut(0, k).copy_from(&self.aq);
        aq.columns_mut(k, added).copy_from(&aqn);
        self.q = q;
        self.aq = aq;
        self.proj = proj;
        self.qf = qf;
        Ok(added)
    }

    /// Restarts the basis from `block` alone.
    pub fn reset<O: LinearOperator<T> + ?Sized>(&mut self, a: &O, block: &DMatrix<T>) -> Result<()> {
        let n = self.q.nrows();
        *self = Self::new(n, std::mem::replace(&mut self.f, DMatrix::zeros(0, 0)));
        let q = orthonormalize(block)?;
        self.extend(a, &q)?;
        Ok(())
    }

    /// Replaces the basis by `Q X` for a `X` with orthonormal columns.
    pub fn rotate<O: LinearOperator<T> + ?Sized>(&mut self, a: &O, x: &DMatrix<T>) -> Result<()> {
        let q = &self.q * x;
        let n = self.q.nrows();
        *self = Self::new(n, std::mem::replace(&mut self.f, DMatrix::zeros(0, 0)));
        self.extend(a, &q)?;
        Ok(())
    }
}
