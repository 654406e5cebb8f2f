//! Dense Lyapunov solver (Bartels–Stewart).

use nalgebra::{DMatrix, SymmetricEigen};

use super::schur::{flip, flip_blocks, solve_quasi_triangular_sylvester, RealSchur};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Decomposition of a Hurwitz matrix `A`, reusable for the controllability
/// (`AP + PAᵀ + G = 0`) and observability (`AᵀQ + QA + G = 0`) equations.
#[derive(Clone, Debug)]
pub enum LyapunovSolver<T: Scalar> {
    /// `A = U diag(λ) Uᵀ`
    Symmetric {
        u: DMatrix<T>,
        lambda: Vec<T>,
    },
    Schur(RealSchur<T>),
}

impl<T: Scalar> LyapunovSolver<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("Lyapunov operator {}x{}", a.nrows(), a.ncols())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        if *a == a.transpose() {
            let eig = SymmetricEigen::new(a.clone());
            let lambda: Vec<T> = eig.eigenvalues.iter().copied().collect();
            if let Some(&worst) = lambda.iter().max_by(|x, y| x.partial_cmp(y).unwrap()) {
                if worst >= T::zero() {
                    return Err(Error::NonHurwitz { re: worst.as_f64() });
                }
            }
            return Ok(LyapunovSolver::Symmetric { u: eig.eigenvectors, lambda });
        }
        let schur = RealSchur::new(a)?;
        if let Some(worst) = schur.eigenvalues().iter().map(|l| l.re).max_by(|x, y| x.partial_cmp(y).unwrap()) {
            if worst >= T::zero() {
                return Err(Error::NonHurwitz { re: worst.as_f64() });
            }
        }
        Ok(LyapunovSolver::Schur(schur))
    }

    pub fn dim(&self) -> usize {
        match self {
            LyapunovSolver::Symmetric { lambda, .. } => lambda.len(),
            LyapunovSolver::Schur(s) => s.t.nrows(),
        }
    }

    /// Solves `AP + PAᵀ + G = 0`.
    pub fn solve(&self, g: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.solve_impl(g, false)
    }

    /// Solves `AᵀQ + QA + G = 0`.
    pub fn solve_transposed(&self, g: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.solve_impl(g, true)
    }

    fn solve_impl(&self, g: &DMatrix<T>, transposed: bool) -> Result<DMatrix<T>> {
        let n = self.dim();
        if g.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("G is {}x{}, expected {n}x{n}", g.nrows(), g.ncols())));
        }
        let p = match self {
            LyapunovSolver::Symmetric { u, lambda } => {
                let mut y = u.tr_mul(g) * u;
                let scale = lambda.iter().fold(T::zero(), |m, l| m.max(l.abs()));
                for j in 0..n {
                    for i in 0..n {
                        let den = lambda[i] + lambda[j];
                        if den.abs() <= T::lit(1e-12) * scale {
                            return Err(Error::SingularSeparation { gap: den.as_f64() });
                        }
                        y[(i, j)] = -y[(i, j)] / den;
                    }
                }
                u * y * u.transpose()
            }
            LyapunovSolver::Schur(s) => {
                let ghat = s.q.tr_mul(g) * &s.q;
                if transposed {
                    let tf = flip(&s.t.transpose());
                    let bf = flip_blocks(&s.blocks, n);
                    let y = solve_quasi_triangular_sylvester(&tf, &bf, &tf, &bf, &flip(&ghat))?;
                    &s.q * flip(&y) * s.q.transpose()
                } else {
                    let y = solve_quasi_triangular_sylvester(&s.t, &s.blocks, &s.t, &s.blocks, &ghat)?;
                    &s.q * y * s.q.transpose()
                }
            }
        };
        Ok(symmetrize(&p))
    }
}

pub(crate) fn symmetrize<T: Scalar>(p: &DMatrix<T>) -> DMatrix<T> {
    (p + p.transpose()) * T::lit(0.5)
}

/// Solves `AP + PAᵀ + G = 0` for Hurwitz `A`.
pub fn solve_lyapunov_dense<T: Scalar>(a: &DMatrix<T>, g: &DMatrix<T>) -> Result<DMatrix<T>> {
    LyapunovSolver::new(a)?.solve(g)
}
