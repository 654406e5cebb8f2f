//! Orthonormal bases, PSD factors, ordered SVD and symmetric eigensolves.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative threshold below which a Gram–Schmidt residual is treated as a
/// rank-deficient direction.
pub const ORTH_DROP_TOL: f64 = 1e-12;

/// Relative eigenvalue threshold for [`psd_factor`].
pub const PSD_CLIP_TOL: f64 = 1e-14;

/// Factor `Z` with `Z Zᵀ ≈ P`.
#[derive(Clone, Debug)]
pub struct SpdFactor<T: Scalar> {
    pub z: DMatrix<T>,
}

impl<T: Scalar> SpdFactor<T> {
    pub fn rank(&self) -> usize {
        self.z.ncols()
    }

    pub fn reconstruct(&self) -> DMatrix<T> {
        &self.z * self.z.transpose()
    }
}

/// `M = U diag(S) Vᵀ` with `S` non-increasing.
#[derive(Clone, Debug)]
pub struct OrderedSvd<T: Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<T>,
    pub v: DMatrix<T>,
}

/// Appends the orthonormalized `cols` to `basis`, orthogonal to the columns
/// of `prefix` as well. Each vector is reprojected until a pass keeps at
/// least half of its norm, so accepted vectors stay orthogonal to working
/// precision even when most of their norm cancels.
fn gram_schmidt_into<T: Scalar>(
    prefix: Option<&DMatrix<T>>,
    basis: &mut Vec<DVector<T>>,
    cols: impl Iterator<Item = DVector<T>>,
    drop: T,
) {
    const MAX_PASSES: usize = 4;
    for mut v in cols {
        let mut accepted = false;
        for _ in 0..MAX_PASSES {
            let before = v.norm();
            if let Some(q) = prefix {
                v -= q * q.tr_mul(&v);
            }
            for q in basis.iter() {
                let c = q.dot(&v);
                v.axpy(-c, q, T::one());
            }
            let after = v.norm();
            if after <= drop {
                break;
            }
            if after >= T::lit(0.5) * before {
                accepted = true;
                break;
            }
        }
        if accepted {
            let nv = v.norm();
            v /= nv;
            basis.push(v);
        }
    }
}

fn max_column_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    m.column_iter().fold(T::zero(), |acc, c| acc.max(c.norm()))
}

/// Orthonormal basis for the numerical range of `m`.
///
/// A column is dropped when its residual after projection against the
/// accepted columns is at most `1e-12 ·` (largest input column norm). A
/// numerically zero input yields an empty (n×0) basis.
pub fn orthonormalize<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    if m.ncols() == 0 {
        return Err(Error::EmptyInput("orthonormalize needs at least one column"));
    }
    let n = m.nrows();
    let drop = T::lit(ORTH_DROP_TOL) * max_column_norm(m);
    let mut basis = Vec::with_capacity(m.ncols().min(n));
    gram_schmidt_into(None, &mut basis, m.column_iter().map(|c| c.into_owned()), drop);
    Ok(stack(n, &basis))
}

/// Equivalent to `orthonormalize([q, new])` for a `q` that already has
/// orthonormal columns, but only orthogonalizes the new block.
pub fn orthonormal_extend<T: Scalar>(q: &DMatrix<T>, new: &DMatrix<T>) -> Result<DMatrix<T>> {
    if q.ncols() == 0 {
        return orthonormalize(new);
    }
    let n = q.nrows();
    if new.nrows() != n {
        return Err(Error::DimensionMismatch(format!("basis has {n} rows, block has {}", new.nrows())));
    }
    let drop = T::lit(ORTH_DROP_TOL) * max_column_norm(new);
    let mut added = Vec::new();
    gram_schmidt_into(Some(q), &mut added, new.column_iter().map(|c| c.into_owned()), drop);
    let mut out = DMatrix::zeros(n, q.ncols() + added.len());
    out.columns_mut(0, q.ncols()).copy_from(q);
    for (k, v) in added.iter().enumerate() {
        out.set_column(q.ncols() + k, v);
    }
    Ok(out)
}

fn stack<T: Scalar>(n: usize, cols: &[DVector<T>]) -> DMatrix<T> {
    let mut out = DMatrix::zeros(n, cols.len());
    for (k, v) in cols.iter().enumerate() {
        out.set_column(k, v);
    }
    out
}

/// Symmetric eigendecomposition with eigenvalues sorted descending (stable).
pub fn sym_eig_desc<T: Scalar>(p: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let eig = SymmetricEigen::new(p.clone());
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(p.nrows(), n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `Z` with `Z Zᵀ = P⁺`, where `P⁺` clips eigenvalues at or below
/// `1e-14 · λ_max` to zero. Columns are ordered by decreasing eigenvalue.
pub fn psd_factor<T: Scalar>(p: &DMatrix<T>) -> Result<SpdFactor<T>> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch(format!("psd_factor of {}x{}", p.nrows(), p.ncols())));
    }
    let asym = (p - p.transpose()).norm();
    let pn = p.norm();
    if asym > T::lit(1e-10) * pn {
        return Err(Error::NotSymmetric((asym / pn).as_f64()));
    }
    let k = p.nrows();
    if k == 0 || pn == T::zero() {
        return Ok(SpdFactor { z: DMatrix::zeros(k, 0) });
    }
    let sym = (p + p.transpose()) * T::lit(0.5);
    let (vals, vecs) = sym_eig_desc(&sym);
    let cut = T::lit(PSD_CLIP_TOL) * vals[0];
    let kept = if vals[0] > T::zero() { vals.iter().take_while(|&&l| l > cut).count() } else { 0 };
    let mut z = DMatrix::zeros(k, kept);
    for (j, val) in vals.iter().take(kept).enumerate() {
        let s = val.sqrt();
        z.set_column(j, &(vecs.column(j) * s));
    }
    Ok(SpdFactor { z })
}

/// SVD with singular values sorted descending; ties keep decomposition order.
pub fn ordered_svd<T: Scalar>(m: &DMatrix<T>) -> OrderedSvd<T> {
    let (a, b) = m.shape();
    let k = a.min(b);
    if k == 0 {
        return OrderedSvd { u: DMatrix::zeros(a, 0), s: Vec::new(), v: DMatrix::zeros(b, 0) };
    }
    let svd = SVD::try_new_unordered(m.clone(), true, true, T::default_epsilon() * T::lit(5.0), 0)
        .expect("SVD iteration without cap always terminates");
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V");
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let mut uo = DMatrix::zeros(a, k);
    let mut vo = DMatrix::zeros(b, k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in idx.iter().enumerate() {
        uo.set_column(dst, &u.column(src));
        vo.set_column(dst, &vt.row(src).transpose());
        s.push(svd.singular_values[src]);
    }
    OrderedSvd { u: uo, s, v: vo }
}

/// Singular values only, descending.
pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<T> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Spectral norm `‖M‖₂`.
pub fn spectral_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// Spectral norm of a symmetric matrix via its eigenvalues.
pub fn spectral_norm_sym<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    let sym = (m + m.transpose()) * T::lit(0.5);
    SymmetricEigen::new(sym).eigenvalues.iter().fold(T::zero(), |acc, l| acc.max(l.abs()))
}

/// Largest principal angle (radians) between `span(a)` and `span(b)`,
/// measured as how far `span(a)` sticks out of `span(b)`.
pub fn max_principal_angle<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let qa = match orthonormalize(a) {
        Ok(q) if q.ncols() > 0 => q,
        _ => return T::zero(),
    };
    let qb = match orthonormalize(b) {
        Ok(q) => q,
        Err(_) => return T::frac_pi_2(),
    };
    let resid = &qa - &qb * qb.tr_mul(&qa);
    spectral_norm(&resid).min(T::one()).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_is_already_orthonormal() {
        let q = orthonormalize(&DMatrix::<f64>::identity(3, 3)).unwrap();
        assert_eq!(q.ncols(), 3);
        assert!((q.tr_mul(&q) - DMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn dependent_columns_are_dropped() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = DVector::<f64>::from_fn(5, |_, _| rng.random_range(-1.0..1.0)).normalize();
        let m = DMatrix::from_columns(&[v.clone(), v * 2.0]);
        assert_eq!(orthonormalize(&m).unwrap().ncols(), 1);
    }

    #[test]
    fn zero_input_gives_empty_basis_and_no_columns_is_an_error() {
        assert_eq!(orthonormalize(&DMatrix::<f64>::zeros(4, 2)).unwrap().ncols(), 0);
        assert!(matches!(orthonormalize(&DMatrix::<f64>::zeros(4, 0)), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn projector_reproduces_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let m = DMatrix::<f64>::from_fn(50, 10, |_, _| rng.random_range(-1.0..1.0));
        let q = orthonormalize(&m).unwrap();
        assert_eq!(q.ncols(), 10);
        assert!((q.tr_mul(&q) - DMatrix::identity(10, 10)).norm() < 1e-12);
        assert!((&q * q.tr_mul(&m) - &m).norm() <= 1e-10 * m.norm());
    }

    #[test]
    fn extend_matches_full_orthonormalization_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let a = DMatrix::<f64>::from_fn(30, 4, |_, _| rng.random_range(-1.0..1.0));
        let b = DMatrix::<f64>::from_fn(30, 3, |_, _| rng.random_range(-1.0..1.0));
        let qa = orthonormalize(&a).unwrap();
        let ext = orthonormal_extend(&qa, &b).unwrap();
        let mut ab = DMatrix::zeros(30, 7);
        ab.columns_mut(0, 4).copy_from(&a);
        ab.columns_mut(4, 3).copy_from(&b);
        let full = orthonormalize(&ab).unwrap();
        assert_eq!(ext.ncols(), full.ncols());
        assert!(max_principal_angle(&ext, &full) < 1e-10);
        // a block already in the span adds nothing
        let again = orthonormal_extend(&ext, &a).unwrap();
        assert_eq!(again.ncols(), ext.ncols());
    }

    #[test]
    fn psd_factor_cases() {
        let z = psd_factor(&DMatrix::<f64>::identity(2, 2)).unwrap();
        assert!((z.reconstruct() - DMatrix::identity(2, 2)).norm() < 1e-14);
        let z = psd_factor(&DMatrix::<f64>::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(z.rank(), 1);
        assert!((z.z[(0, 0)].abs() - 2.0).abs() < 1e-14 && z.z[(1, 0)] == 0.0);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(psd_factor(&bad), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn ordered_svd_cases() {
        let m = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 3.0, 2.0]));
        assert_eq!(ordered_svd(&m).s, vec![3.0, 2.0, 1.0]);
        assert_eq!(ordered_svd(&DMatrix::<f64>::zeros(2, 2)).s, vec![0.0, 0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(85);
        let m = DMatrix::<f64>::from_fn(8, 5, |_, _| rng.random_range(-1.0..1.0));
        let svd = ordered_svd(&m);
        for i in 0..5 {
            let lhs = &m * svd.v.column(i);
            let rhs = svd.u.column(i) * svd.s[i];
            assert!((lhs - rhs).norm() < 1e-12);
        }
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
    }
}
