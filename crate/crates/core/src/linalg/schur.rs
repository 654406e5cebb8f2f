//! Real Schur decomposition with explicit block structure, plus the
//! quasi-triangular Sylvester kernel used by the dense Bartels–Stewart solver.

use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Result};
use crate::scalar::{cx, Cx, Scalar};

/// Diagonal block of a quasi-triangular matrix: `(start, size)` with size 1 or 2.
pub(crate) type Block = (usize, usize);

/// `A = Q T Qᵀ` with `T` upper quasi-triangular.
///
/// After construction every 2×2 diagonal block carries a genuinely complex
/// conjugate eigenvalue pair; blocks with real eigenvalues are split.
#[derive(Clone, Debug)]
pub struct RealSchur<T: Scalar> {
    pub q: DMatrix<T>,
    pub t: DMatrix<T>,
    pub(crate) blocks: Vec<Block>,
}

impl<T: Scalar> RealSchur<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::DimensionMismatch(format!("Schur of {}x{}", a.nrows(), a.ncols())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        let schur = Schur::try_new(a.clone(), T::default_epsilon(), 200 * n.max(10))
            .ok_or(Error::NoConvergence("real Schur decomposition"))?;
        let (q, t) = schur.unpack();
        let mut out = Self { q, t, blocks: Vec::new() };
        out.split_real_blocks();
        out.blocks = detect_blocks(&out.t);
        Ok(out)
    }

    /// Eigenvalues in block order.
    pub fn eigenvalues(&self) -> Vec<Cx<T>> {
        let mut out = Vec::with_capacity(self.t.nrows());
        for &(s, size) in &self.blocks {
            if size == 1 {
                out.push(cx(self.t[(s, s)], T::zero()));
            } else {
                let (l1, l2) = eig2(self.t[(s, s)], self.t[(s, s + 1)], self.t[(s + 1, s)], self.t[(s + 1, s + 1)]);
                out.push(l1);
                out.push(l2);
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DMatrix<T> {
        &self.q * &self.t * self.q.transpose()
    }

    /// Triangularizes 2×2 blocks whose eigenvalues are real with a Givens rotation.
    fn split_real_blocks(&mut self) {
        let n = self.t.nrows();
        let mut i = 0;
        while i + 1 < n {
            if self.t[(i + 1, i)] == T::zero() {
                i += 1;
                continue;
            }
            let (a, b, c, d) = (self.t[(i, i)], self.t[(i, i + 1)], self.t[(i + 1, i)], self.t[(i + 1, i + 1)]);
            let half = (a - d) / T::lit(2.0);
            let disc = half * half + b * c;
            if disc < T::zero() {
                i += 2;
                continue;
            }
            // eigenvector of the larger-magnitude root for stability
            let root = disc.sqrt();
            let lambda = if half >= T::zero() { (a + d) / T::lit(2.0) + root } else { (a + d) / T::lit(2.0) - root };
            let (mut x, mut y) =
                if (lambda - d).abs() >= (lambda - a).abs() { (lambda - d, c) } else { (b, lambda - a) };
            let norm = (x * x + y * y).sqrt();
            if norm == T::zero() {
                i += 2;
                continue;
            }
            x /= norm;
            y /= norm;
            // G = [[x, -y], [y, x]]; T <- Gᵀ T G, Q <- Q G
            for j in 0..n {
                let (u, v) = (self.t[(i, j)], self.t[(i + 1, j)]);
                self.t[(i, j)] = x * u + y * v;
                self.t[(i + 1, j)] = -y * u + x * v;
            }
            for j in 0..n {
                let (u, v) = (self.t[(j, i)], self.t[(j, i + 1)]);
                self.t[(j, i)] = x * u + y * v;
                self.t[(j, i + 1)] = -y * u + x * v;
                let (u, v) = (self.q[(j, i)], self.q[(j, i + 1)]);
                self.q[(j, i)] = x * u + y * v;
                self.q[(j, i + 1)] = -y * u + x * v;
            }
            self.t[(i + 1, i)] = T::zero();
            i += 2;
        }
    }
}

pub(crate) fn detect_blocks<T: Scalar>(t: &DMatrix<T>) -> Vec<Block> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != T::zero() {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

/// Eigenvalues of `[[a, b], [c, d]]`, the one with nonnegative imaginary part first.
pub(crate) fn eig2<T: Scalar>(a: T, b: T, c: T, d: T) -> (Cx<T>, Cx<T>) {
    let two = T::lit(2.0);
    let mean = (a + d) / two;
    let half = (a - d) / two;
    let disc = half * half + b * c;
    if disc >= T::zero() {
        let r = disc.sqrt();
        (cx(mean + r, T::zero()), cx(mean - r, T::zero()))
    } else {
        let r = (-disc).sqrt();
        (cx(mean, r), cx(mean, -r))
    }
}

/// Reverses row and column order, mapping `Tᵀ` (lower quasi-triangular) to an
/// upper quasi-triangular matrix.
pub(crate) fn flip<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let (r, c) = m.shape();
    DMatrix::from_fn(r, c, |i, j| m[(r - 1 - i, c - 1 - j)])
}

pub(crate) fn flip_blocks(blocks: &[Block], n: usize) -> Vec<Block> {
    blocks.iter().rev().map(|&(s, q)| (n - s - q, q)).collect()
}

/// Solves `T1 X + X T2ᵀ + G = 0` for upper quasi-triangular `T1`, `T2`.
pub(crate) fn solve_quasi_triangular_sylvester<T: Scalar>(
    t1: &DMatrix<T>,
    blocks1: &[Block],
    t2: &DMatrix<T>,
    blocks2: &[Block],
    g: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let n = t1.nrows();
    let m = t2.nrows();
    let scale = t1.amax().max(t2.amax()).max(T::lit(f64::MIN_POSITIVE));
    let mut x = DMatrix::<T>::zeros(n, m);
    for &(j0, q) in blocks2.iter().rev() {
        let tail = m - j0 - q;
        let mut rhs = -g.columns(j0, q).into_owned();
        if tail > 0 {
            rhs -= x.columns(j0 + q, tail) * t2.view((j0, j0 + q), (q, tail)).transpose();
        }
        for &(i0, p) in blocks1.iter().rev() {
            let below = n - i0 - p;
            let mut local = rhs.rows(i0, p).into_owned();
            if below > 0 {
                local -= t1.view((i0, i0 + p), (p, below)) * x.view((i0 + p, j0), (below, q));
            }
            let y = solve_small_sylvester(
                &t1.view((i0, i0), (p, p)).into_owned(),
                &t2.view((j0, j0), (q, q)).into_owned(),
                &local,
                scale,
            )?;
            x.view_mut((i0, j0), (p, q)).copy_from(&y);
        }
    }
    Ok(x)
}

/// Solves `S1 Y + Y S2ᵀ = R` for blocks of size ≤ 2 through the Kronecker form.
fn solve_small_sylvester<T: Scalar>(s1: &DMatrix<T>, s2: &DMatrix<T>, r: &DMatrix<T>, scale: T) -> Result<DMatrix<T>> {
    let p = s1.nrows();
    let q = s2.nrows();
    let dim = p * q;
    if dim == 1 {
        let den = s1[(0, 0)] + s2[(0, 0)];
        if den.abs() <= T::lit(1e-12) * scale {
            return Err(Error::SingularSeparation { gap: den.as_f64() });
        }
        return Ok(DMatrix::from_element(1, 1, r[(0, 0)] / den));
    }
    // vec(S1 Y) = (I ⊗ S1) vec Y, vec(Y S2ᵀ) = (S2 ⊗ I) vec Y
    let mut k = DMatrix::<T>::zeros(dim, dim);
    for bj in 0..q {
        for bi in 0..q {
            for i in 0..p {
                for j in 0..p {
                    let mut v = if bi == bj { s1[(i, j)] } else { T::zero() };
                    if i == j {
                        v += s2[(bj, bi)];
                    }
                    k[(bj * p + i, bi * p + j)] = v;
                }
            }
        }
    }
    let mut rhs: Vec<T> = r.iter().copied().collect();
    // Gaussian elimination with partial pivoting on at most a 4×4 system
    let mut min_pivot = T::max_value().unwrap_or_else(T::one);
    for col in 0..dim {
        let piv = (col..dim).max_by(|&a, &b| k[(a, col)].abs().partial_cmp(&k[(b, col)].abs()).unwrap()).unwrap();
        if piv != col {
            k.swap_rows(piv, col);
            rhs.swap(piv, col);
        }
        let d = k[(col, col)];
        min_pivot = min_pivot.min(d.abs());
        if d.abs() <= T::lit(1e-12) * scale {
            return Err(Error::SingularSeparation { gap: d.abs().as_f64() });
        }
        for row in (col + 1)..dim {
            let f = k[(row, col)] / d;
            for c in col..dim {
                let v = k[(col, c)];
                k[(row, c)] -= f * v;
            }
            let rv = rhs[col];
            rhs[row] -= f * rv;
        }
    }
    for row in (0..dim).rev() {
        let mut acc = rhs[row];
        for c in (row + 1)..dim {
            acc -= k[(row, c)] * rhs[c];
        }
        rhs[row] = acc / k[(row, row)];
    }
    Ok(DMatrix::from_column_slice(p, q, &rhs))
}
