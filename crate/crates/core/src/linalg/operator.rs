//! Linear operators standing in for the state matrix `A`.
//!
//! Algorithms only ever need products with `A`/`Aᵀ` and solves with the
//! shifted matrices `A - sI` / `Aᵀ - sI`, so large structured models never
//! have to be densified.

use std::sync::{Arc, OnceLock};

use nalgebra::{ComplexField, DMatrix, Hessenberg};

use super::banded::{HessenbergLu, TridiagonalLu};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Scalar};

/// Abstract square operator `A` of dimension `n`.
pub trait LinearOperator<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// `A X`
    fn apply(&self, x: &DMatrix<T>) -> DMatrix<T>;

    /// `Aᵀ X`
    fn apply_transpose(&self, x: &DMatrix<T>) -> DMatrix<T>;

    /// Solves `(A - sI) X = R` for a complex shift.
    fn shifted_solve(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>>;

    /// Solves `(Aᵀ - sI) X = R` for a complex shift.
    fn shifted_solve_transpose(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>>;

    /// Solves `(A - sI) X = R` for a real shift, staying in real arithmetic.
    fn shifted_solve_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>>;

    /// Solves `(Aᵀ - sI) X = R` for a real shift.
    fn shifted_solve_transpose_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>>;

    /// Dense copy of the operator. Callers are responsible for size checks.
    fn to_dense(&self) -> DMatrix<T>;

    /// Exact structural symmetry (`A = Aᵀ` entrywise).
    fn is_symmetric(&self) -> bool;
}

fn shift_failure<T: Scalar>(s: Cx<T>) -> Error {
    Error::ShiftSolveFailure { shift_re: s.re.as_f64(), shift_im: s.im.as_f64() }
}

/// Dense state matrix. The Hessenberg reduction used for shifted solves is
/// computed on first use and shared between clones.
#[derive(Clone, Debug)]
pub struct DenseOperator<T: Scalar> {
    a: DMatrix<T>,
    hessenberg: Arc<OnceLock<(DMatrix<T>, DMatrix<T>)>>,
}

impl<T: Scalar> DenseOperator<T> {
    pub fn new(a: DMatrix<T>) -> Self {
        assert!(a.is_square(), "dense operator must be square");
        Self { a, hessenberg: Arc::new(OnceLock::new()) }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }

    /// `(Q, H)` with `A = Q H Qᵀ`.
    fn hess(&self) -> &(DMatrix<T>, DMatrix<T>) {
        self.hessenberg.get_or_init(|| {
            let hd = Hessenberg::new(self.a.clone());
            let (q, h) = hd.unpack();
            (q, h)
        })
    }

    fn solve_generic<N>(&self, s: N, rhs: &DMatrix<N>, transpose: bool) -> Option<DMatrix<N>>
    where
        N: ComplexField<RealField = T> + Copy,
    {
        let (q, h) = self.hess();
        let n = h.nrows();
        let mut shifted: DMatrix<N> = h.map(N::from_real);
        for i in 0..n {
            shifted[(i, i)] -= s;
        }
        let lu = HessenbergLu::new(shifted)?;
        let qn: DMatrix<N> = q.map(N::from_real);
        let mut y = qn.transpose() * rhs;
        for mut col in y.column_iter_mut() {
            let slice = col.as_mut_slice();
            if transpose {
                lu.solve_transpose_in_place(slice);
            } else {
                lu.solve_in_place(slice);
            }
        }
        Some(qn * y)
    }
}

impl<T: Scalar> LinearOperator<T> for DenseOperator<T> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, x: &DMatrix<T>) -> DMatrix<T> {
        &self.a * x
    }

    fn apply_transpose(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.a.tr_mul(x)
    }

    fn shifted_solve(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        self.solve_generic(s, rhs, false).ok_or_else(|| shift_failure(s))
    }

    fn shifted_solve_transpose(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        self.solve_generic(s, rhs, true).ok_or_else(|| shift_failure(s))
    }

    fn shifted_solve_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.solve_generic(s, rhs, false).ok_or_else(|| shift_failure(Cx::new(s, T::zero())))
    }

    fn shifted_solve_transpose_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.solve_generic(s, rhs, true).ok_or_else(|| shift_failure(Cx::new(s, T::zero())))
    }

    fn to_dense(&self) -> DMatrix<T> {
        self.a.clone()
    }

    fn is_symmetric(&self) -> bool {
        self.a == self.a.transpose()
    }
}

/// Tridiagonal state matrix stored by its three diagonals; O(n) products and
/// shifted solves.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalOperator<T: Scalar> {
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> TridiagonalOperator<T> {
    /// `lower[i] = A[i+1, i]`, `diag[i] = A[i, i]`, `upper[i] = A[i, i+1]`.
    pub fn new(lower: Vec<T>, diag: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::EmptyInput("tridiagonal operator needs n >= 1"));
        }
        if lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::DimensionMismatch(format!(
                "tridiagonal bands: lower {}, diag {}, upper {}",
                lower.len(),
                n,
                upper.len()
            )));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    fn product(&self, x: &DMatrix<T>, transpose: bool) -> DMatrix<T> {
        let n = self.diag.len();
        assert_eq!(x.nrows(), n, "operator/argument dimension mismatch");
        let (lo, up) = if transpose { (&self.upper, &self.lower) } else { (&self.lower, &self.upper) };
        let mut y = DMatrix::zeros(n, x.ncols());
        for (xc, mut yc) in x.column_iter().zip(y.column_iter_mut()) {
            for i in 0..n {
                let mut v = self.diag[i] * xc[i];
                if i > 0 {
                    v += lo[i - 1] * xc[i - 1];
                }
                if i + 1 < n {
                    v += up[i] * xc[i + 1];
                }
                yc[i] = v;
            }
        }
        y
    }

    fn solve_generic<N>(&self, s: N, rhs: &DMatrix<N>, transpose: bool) -> Option<DMatrix<N>>
    where
        N: ComplexField<RealField = T> + Copy,
    {
        let dl = self.lower.iter().map(|&v| N::from_real(v)).collect();
        let du = self.upper.iter().map(|&v| N::from_real(v)).collect();
        let d = self.diag.iter().map(|&v| N::from_real(v) - s).collect();
        let lu = TridiagonalLu::new(dl, d, du)?;
        let mut x = rhs.clone();
        for mut col in x.column_iter_mut() {
            let slice = col.as_mut_slice();
            if transpose {
                lu.solve_transpose_in_place(slice);
            } else {
                lu.solve_in_place(slice);
            }
        }
        Some(x)
    }
}

impl<T: Scalar> LinearOperator<T> for TridiagonalOperator<T> {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.product(x, false)
    }

    fn apply_transpose(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.product(x, true)
    }

    fn shifted_solve(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        self.solve_generic(s, rhs, false).ok_or_else(|| shift_failure(s))
    }

    fn shifted_solve_transpose(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        self.solve_generic(s, rhs, true).ok_or_else(|| shift_failure(s))
    }

    fn shifted_solve_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.solve_generic(s, rhs, false).ok_or_else(|| shift_failure(Cx::new(s, T::zero())))
    }

    fn shifted_solve_transpose_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.solve_generic(s, rhs, true).ok_or_else(|| shift_failure(Cx::new(s, T::zero())))
    }

    fn to_dense(&self) -> DMatrix<T> {
        let n = self.diag.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
            if i + 1 < n {
                a[(i + 1, i)] = self.lower[i];
                a[(i, i + 1)] = self.upper[i];
            }
        }
        a
    }

    fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }
}

/// State matrix of a model: dense or tridiagonal.
#[derive(Clone, Debug)]
pub enum Operator<T: Scalar> {
    Dense(DenseOperator<T>),
    Tridiagonal(TridiagonalOperator<T>),
}

impl<T: Scalar> Operator<T> {
    pub fn dense(a: DMatrix<T>) -> Self {
        Operator::Dense(DenseOperator::new(a))
    }

    fn inner(&self) -> &dyn LinearOperator<T> {
        match self {
            Operator::Dense(d) => d,
            Operator::Tridiagonal(t) => t,
        }
    }

    /// Dense copy of `Aᵀ` wrapped as an operator.
    pub fn transposed(&self) -> Operator<T> {
        match self {
            Operator::Dense(d) => Operator::dense(d.matrix().transpose()),
            Operator::Tridiagonal(t) => Operator::Tridiagonal(TridiagonalOperator {
                lower: t.upper.clone(),
                diag: t.diag.clone(),
                upper: t.lower.clone(),
            }),
        }
    }
}

impl<T: Scalar> From<DMatrix<T>> for Operator<T> {
    fn from(a: DMatrix<T>) -> Self {
        Operator::dense(a)
    }
}

impl<T: Scalar> From<TridiagonalOperator<T>> for Operator<T> {
    fn from(t: TridiagonalOperator<T>) -> Self {
        Operator::Tridiagonal(t)
    }
}

impl<T: Scalar> LinearOperator<T> for Operator<T> {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn apply(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.inner().apply(x)
    }
    fn apply_transpose(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.inner().apply_transpose(x)
    }
    fn shifted_solve(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        self.inner().shifted_solve(s, rhs)
    }
    fn shifted_solve_transpose(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        self.inner().shifted_solve_transpose(s, rhs)
    }
    fn shifted_solve_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.inner().shifted_solve_real(s, rhs)
    }
    fn shifted_solve_transpose_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.inner().shifted_solve_transpose_real(s, rhs)
    }
    fn to_dense(&self) -> DMatrix<T> {
        self.inner().to_dense()
    }
    fn is_symmetric(&self) -> bool {
        self.inner().is_symmetric()
    }
}

/// View of an operator as its transpose, without copying.
#[derive(Clone, Copy)]
pub struct Transposed<'a, O: ?Sized>(pub &'a O);

impl<'a, T: Scalar, O: LinearOperator<T> + ?Sized> LinearOperator<T> for Transposed<'a, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.0.apply_transpose(x)
    }
    fn apply_transpose(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.0.apply(x)
    }
    fn shifted_solve(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        self.0.shifted_solve_transpose(s, rhs)
    }
    fn shifted_solve_transpose(&self, s: Cx<T>, rhs: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        self.0.shifted_solve(s, rhs)
    }
    fn shifted_solve_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.0.shifted_solve_transpose_real(s, rhs)
    }
    fn shifted_solve_transpose_real(&self, s: T, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.0.shifted_solve_real(s, rhs)
    }
    fn to_dense(&self) -> DMatrix<T> {
        self.0.to_dense().transpose()
    }
    fn is_symmetric(&self) -> bool {
        self.0.is_symmetric()
    }
}
