//! LU factorizations for the structured shifted solves behind the operators:
//! upper Hessenberg (dense path) and tridiagonal, both with partial pivoting
//! and both supporting solves with the plain (non-conjugated) transpose.

use nalgebra::{ComplexField, DMatrix, RealField};

/// Partially pivoted LU of an upper Hessenberg matrix.
#[derive(Clone, Debug)]
pub(crate) struct HessenbergLu<N: ComplexField> {
    lu: DMatrix<N>,
    swapped: Vec<bool>,
}

impl<N: ComplexField + Copy> HessenbergLu<N> {
    /// Factors `h` in place. Returns `None` when a pivot is numerically zero.
    pub fn new(mut h: DMatrix<N>) -> Option<Self> {
        let n = h.nrows();
        let mut swapped = vec![false; n.saturating_sub(1)];
        let scale = h.iter().fold(nalgebra::zero::<N::RealField>(), |acc, v| acc.max(v.modulus()));
        for k in 0..n.saturating_sub(1) {
            if h[(k + 1, k)].modulus() > h[(k, k)].modulus() {
                for j in k..n {
                    h.swap((k, j), (k + 1, j));
                }
                swapped[k] = true;
            }
            let piv = h[(k, k)];
            if piv.is_zero() {
                continue;
            }
            let l = h[(k + 1, k)] / piv;
            h[(k + 1, k)] = l;
            for j in (k + 1)..n {
                let u = h[(k, j)];
                h[(k + 1, j)] -= l * u;
            }
        }
        let tiny = nalgebra::convert::<f64, N::RealField>(f64::EPSILON) * scale;
        if n == 0 || (0..n).any(|i| h[(i, i)].modulus() <= tiny) {
            return None;
        }
        Some(Self { lu: h, swapped })
    }

    pub fn solve_in_place(&self, b: &mut [N]) {
        let n = self.lu.nrows();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
            let l = self.lu[(k + 1, k)];
            let bk = b[k];
            b[k + 1] -= l * bk;
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for (j, bj) in b.iter().enumerate().skip(i + 1) {
                acc -= self.lu[(i, j)] * *bj;
            }
            b[i] = acc / self.lu[(i, i)];
        }
    }

    /// Solves `Hᵀ x = b` (transpose, not adjoint).
    pub fn solve_transpose_in_place(&self, b: &mut [N]) {
        let n = self.lu.nrows();
        for i in 0..n {
            let mut acc = b[i];
            for (j, bj) in b.iter().enumerate().take(i) {
                acc -= self.lu[(j, i)] * *bj;
            }
            b[i] = acc / self.lu[(i, i)];
        }
        for k in (0..n.saturating_sub(1)).rev() {
            let l = self.lu[(k + 1, k)];
            let next = b[k + 1];
            b[k] -= l * next;
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
        }
    }
}

/// Partially pivoted LU of a tridiagonal matrix (the `gttrf` layout).
#[derive(Clone, Debug)]
pub(crate) struct TridiagonalLu<N: ComplexField> {
    dl: Vec<N>,
    d: Vec<N>,
    du: Vec<N>,
    du2: Vec<N>,
    swapped: Vec<bool>,
}

impl<N: ComplexField + Copy> TridiagonalLu<N> {
    /// `dl`: sub-diagonal (n-1), `d`: diagonal (n), `du`: super-diagonal (n-1).
    pub fn new(mut dl: Vec<N>, mut d: Vec<N>, mut du: Vec<N>) -> Option<Self> {
        let n = d.len();
        if n == 0 {
            return None;
        }
        let scale = d
            .iter()
            .chain(dl.iter())
            .chain(du.iter())
            .fold(nalgebra::zero::<N::RealField>(), |acc, v| acc.max(v.modulus()));
        let mut du2 = vec![N::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if !d[i].is_zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let tiny = nalgebra::convert::<f64, N::RealField>(f64::EPSILON) * scale;
        if d.iter().any(|v| v.modulus() <= tiny) {
            return None;
        }
        Some(Self { dl, d, du, du2, swapped })
    }

    pub fn solve_in_place(&self, b: &mut [N]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                let bi = b[i];
                b[i + 1] -= self.dl[i] * bi;
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    /// Solves `Tᵀ x = b` (transpose, not adjoint).
    pub fn solve_transpose_in_place(&self, b: &mut [N]) {
        let n = self.d.len();
        b[0] /= self.d[0];
        if n > 1 {
            b[1] = (b[1] - self.du[0] * b[0]) / self.d[1];
        }
        for i in 2..n {
            b[i] = (b[i] - self.du[i - 1] * b[i - 1] - self.du2[i - 2] * b[i - 2]) / self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            if self.swapped[i] {
                let temp = b[i + 1];
                b[i + 1] = b[i] - self.dl[i] * temp;
                b[i] = temp;
            } else {
                let next = b[i + 1];
                b[i] -= self.dl[i] * next;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn dense_tri(dl: &[f64], d: &[f64], du: &[f64]) -> DMatrix<f64> {
        let n = d.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = d[i];
            if i + 1 < n {
                m[(i + 1, i)] = dl[i];
                m[(i, i + 1)] = du[i];
            }
        }
        m
    }

    #[test]
    fn tridiagonal_pivoting_matches_dense() {
        // small diagonal forces interchanges
        let dl = [3.0, -1.0, 4.0, 2.0];
        let d = [1e-3, 2.0, 0.1, -5.0, 1.0];
        let du = [1.0, 7.0, -2.0, 0.5];
        let a = dense_tri(&dl, &d, &du);
        let lu = TridiagonalLu::new(dl.to_vec(), d.to_vec(), du.to_vec()).unwrap();
        let b = [1.0, -2.0, 3.0, 0.5, 4.0];
        let mut x = b.to_vec();
        lu.solve_in_place(&mut x);
        let r = &a * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_row_slice(&b);
        assert!(r.norm() < 1e-12);
        let mut y = b.to_vec();
        lu.solve_transpose_in_place(&mut y);
        let r = a.transpose() * nalgebra::DVector::from_vec(y) - nalgebra::DVector::from_row_slice(&b);
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn hessenberg_complex_solves() {
        let n = 6;
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                h[(i, j)] = Complex64::new((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0 - 1.0);
            }
        }
        let lu = HessenbergLu::new(h.clone()).unwrap();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let r = &h * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(b.clone());
        assert!(r.norm() < 1e-10);
        let mut y = b.clone();
        lu.solve_transpose_in_place(&mut y);
        let r = h.transpose() * nalgebra::DVector::from_vec(y) - nalgebra::DVector::from_vec(b);
        assert!(r.norm() < 1e-10);
    }

    #[test]
    fn singular_tridiagonal_is_rejected() {
        assert!(TridiagonalLu::new(vec![1.0], vec![1.0, 1.0], vec![1.0]).is_none());
    }
}
