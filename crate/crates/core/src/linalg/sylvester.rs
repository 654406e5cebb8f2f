//! Skinny Sylvester equations `A X + X Mᵀ + F = 0` with large `A` (an operator)
//! and small dense `M`.
//!
//! `M` is brought to real Schur form `M = U T Uᵀ`; with `Y = X U` the equation
//! decouples into back substitution over the diagonal blocks of `T`, each
//! needing one shifted solve with `A`. Complex-pair blocks use a single
//! complex solve and the conjugate partner, so the result is real.

use nalgebra::DMatrix;

use super::operator::LinearOperator;
use super::schur::RealSchur;
use crate::error::{Error, Result};
use crate::scalar::{cx_re, Cx, Scalar};

fn overlap(e: Error) -> Error {
    match e {
        Error::ShiftSolveFailure { shift_re, shift_im } => Error::SpectrumOverlap { shift_re, shift_im },
        other => other,
    }
}

/// Solves `A X + X Mᵀ + F = 0` (`A`: n×n operator, `M`: r×r, `F`: n×r).
pub fn solve_sylvester_skinny<T: Scalar, O: LinearOperator<T> + ?Sized>(
    a: &O,
    m: &DMatrix<T>,
    f: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let (x, max_imag) = solve_with_imaginary_residue(a, m, f)?;
    if max_imag > T::lit(1e-8) * x.norm().max(T::lit(f64::MIN_POSITIVE)) {
        return Err(Error::NoConvergence("complex-pair Sylvester block left a non-real residue"));
    }
    Ok(x)
}

/// Solution together with the largest imaginary part discarded when the
/// complex-pair blocks were mapped back to real columns.
fn solve_with_imaginary_residue<T: Scalar, O: LinearOperator<T> + ?Sized>(
    a: &O,
    m: &DMatrix<T>,
    f: &DMatrix<T>,
) -> Result<(DMatrix<T>, T)> {
    let n = a.dim();
    let r = m.nrows();
    if !m.is_square() || f.nrows() != n || f.ncols() != r {
        return Err(Error::DimensionMismatch(format!(
            "skinny Sylvester: A {n}x{n}, M {}x{}, F {}x{}",
            m.nrows(),
            m.ncols(),
            f.nrows(),
            f.ncols()
        )));
    }
    if r == 0 {
        return Ok((DMatrix::zeros(n, 0), T::zero()));
    }
    let schur = RealSchur::new(m)?;
    let t = &schur.t;
    let g = f * &schur.q;
    let mut y = DMatrix::<T>::zeros(n, r);
    let mut max_imag = T::zero();
    for &(j0, q) in schur.blocks.iter().rev() {
        let tail = r - j0 - q;
        let mut rhs = -g.columns(j0, q).into_owned();
        if tail > 0 {
            rhs -= y.columns(j0 + q, tail) * t.view((j0, j0 + q), (q, tail)).transpose();
        }
        if q == 1 {
            // (A + t I) y = rhs
            let col = a.shifted_solve_real(-t[(j0, j0)], &rhs).map_err(overlap)?;
            y.set_column(j0, &col.column(0));
        } else {
            // A Y + Y N = rhs with N = T_JJᵀ; N e = λ e gives (A + λI)(Y e) = rhs e
            let (na, nb, nc, nd) = (t[(j0, j0)], t[(j0 + 1, j0)], t[(j0, j0 + 1)], t[(j0 + 1, j0 + 1)]);
            let (lambda, _) = super::schur::eig2(na, nb, nc, nd);
            // eigenvector of [[na, nb], [nc, nd]]: (nb, λ - na)
            let e0 = cx_re(nb);
            let e1 = lambda - cx_re(na);
            let rhs_c = rhs.map(cx_re);
            let mut v = DMatrix::<Cx<T>>::zeros(n, 1);
            for i in 0..n {
                v[(i, 0)] = rhs_c[(i, 0)] * e0 + rhs_c[(i, 1)] * e1;
            }
            let z = a.shifted_solve(-lambda, &v).map_err(overlap)?;
            // Y [e ē] = [z z̄]  =>  Y = [z z̄] [e ē]^{-1}
            let det = e0 * e1.conj() - e0.conj() * e1;
            let inv = [[e1.conj() / det, -e0.conj() / det], [-e1 / det, e0 / det]];
            for i in 0..n {
                let zi = z[(i, 0)];
                let zc = zi.conj();
                let c0 = zi * inv[0][0] + zc * inv[1][0];
                let c1 = zi * inv[0][1] + zc * inv[1][1];
                max_imag = max_imag.max(c0.im.abs()).max(c1.im.abs());
                y[(i, j0)] = c0.re;
                y[(i, j0 + 1)] = c1.re;
            }
        }
    }
    Ok((y * schur.q.transpose(), max_imag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::DenseOperator;

    #[test]
    fn scalar_case() {
        let a = DenseOperator::new(DMatrix::<f64>::from_element(1, 1, -2.0));
        let x =
            solve_sylvester_skinny(&a, &DMatrix::from_element(1, 1, -3.0), &DMatrix::from_element(1, 1, 10.0)).unwrap();
        assert!((x[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn decoupled_diagonal_case() {
        let ad: [f64; 3] = [-1.0, -2.5, -4.0];
        let md = [-0.5, -3.0];
        let a = DenseOperator::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&ad)));
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&md));
        let f = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let x = solve_sylvester_skinny(&a, &m, &f).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let expect = -f[(i, j)] / (ad[i] + md[j]);
                assert!((x[(i, j)] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn complex_pair_block() {
        let a = DenseOperator::new(DMatrix::from_row_slice(3, 3, &[-1.0, 0.2, 0.0, 0.1, -2.0, 0.3, 0.0, 0.4, -3.0]));
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 5.0, -5.0, -1.0]);
        let f = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x = solve_sylvester_skinny(&a, &m, &f).unwrap();
        let res = a.matrix() * &x + &x * m.transpose() + &f;
        assert!(res.norm() < 1e-13);
    }

    #[test]
    fn overlapping_spectra() {
        let a = DenseOperator::new(DMatrix::from_element(1, 1, -2.0));
        let err = solve_sylvester_skinny(&a, &DMatrix::from_element(1, 1, 2.0), &DMatrix::from_element(1, 1, 1.0));
        assert!(matches!(err, Err(Error::SpectrumOverlap { .. })));
    }

    #[test]
    fn complex_pairs_leave_no_imaginary_residue() {
        use crate::benchmarks::random_hurwitz;
        for seed in 0..20u64 {
            let (a, f, _) = random_hurwitz::<f64>(25, 6, 1, 100 + seed);
            let (m, _, _) = random_hurwitz::<f64>(6, 1, 1, 200 + seed);
            let op = DenseOperator::new(a);
            let (x, imag) = solve_with_imaginary_residue(&op, &m, &f).unwrap();
            assert!(imag <= 1e-12 * x.norm(), "seed {seed}: imaginary residue {imag:e}");
        }
    }
}
