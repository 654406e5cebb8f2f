//! Adaptive low-rank Lyapunov solver: tangential interpolation at the mirror
//! images of a reduced model's poles, with the interpolation data and the
//! rank chosen automatically.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::benchmarks::random_hurwitz;
use crate::error::{Error, Result};
use crate::linalg::basis::GrowingBasis;
use crate::linalg::{
    ordered_svd, orthonormalize, psd_factor, solve_sylvester_skinny, spectral_norm_sym, sym_eig_desc, LinearOperator,
    LyapunovSolver,
};
use crate::reducers::reflect_unstable;
use crate::scalar::Scalar;

/// Singular values below this fraction of the largest are left out of the
/// `S^{-1/2}` scaling.
pub(crate) const SV_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlrsConfig {
    pub r0: usize,
    pub dr: usize,
    pub tol: f64,
    /// Stagnation tolerance for one rank stage; defaults to `tol`.
    pub stage_tol: Option<f64>,
    pub i_max: usize,
    pub k_max: usize,
    pub seed: u64,
}

impl Default for AlrsConfig {
    fn default() -> Self {
        Self { r0: 2, dr: 2, tol: 1e-6, stage_tol: None, i_max: 10, k_max: 100, seed: 0 }
    }
}

pub(crate) fn validate_common(
    r0: usize,
    dr: usize,
    tol: f64,
    stage_tol: Option<f64>,
    i_max: usize,
    k_max: usize,
) -> Result<()> {
    let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
    if r0 == 0 {
        return bad("r0 must be >= 1");
    }
    if dr == 0 {
        return bad("dr must be >= 1");
    }
    if !(tol > 0.0 && tol < 1.0) {
        return bad("tol must lie in (0, 1)");
    }
    if let Some(s) = stage_tol {
        if !(s > 0.0 && s < 1.0) {
            return bad("stage_tol must lie in (0, 1)");
        }
    }
    if i_max == 0 || k_max == 0 {
        return bad("i_max and k_max must be >= 1");
    }
    Ok(())
}

impl AlrsConfig {
    pub fn validate(&self) -> Result<()> {
        validate_common(self.r0, self.dr, self.tol, self.stage_tol, self.i_max, self.k_max)
    }
}

/// `P ≈ V Pᵣ Vᵀ` with orthonormal `V`.
#[derive(Clone, Debug)]
pub struct LowRankGramian<T: Scalar> {
    pub basis: DMatrix<T>,
    pub core: DMatrix<T>,
}

impl<T: Scalar> LowRankGramian<T> {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Eigenvalues of the approximation, descending.
    pub fn singular_values(&self) -> Vec<T> {
        sym_eig_desc(&self.core).0.into_iter().map(|v| v.max(T::zero())).collect()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        &self.basis * &self.core * self.basis.transpose()
    }

    /// `‖A P̃ + P̃ Aᵀ + F Fᵀ‖₂ / ‖F Fᵀ‖₂` without forming anything `n×n`.
    pub fn lyapunov_residual<O: LinearOperator<T> + ?Sized>(&self, a: &O, f: &DMatrix<T>) -> Result<T> {
        let r = self.rank();
        let m = f.ncols();
        let av = a.apply(&self.basis);
        let mut u = DMatrix::zeros(self.basis.nrows(), 2 * r + m);
        u.columns_mut(0, r).copy_from(&av);
        u.columns_mut(r, r).copy_from(&self.basis);
        u.columns_mut(2 * r, m).copy_from(f);
        let q = orthonormalize(&u)?;
        let rq = q.tr_mul(&u);
        let mut mid = DMatrix::zeros(2 * r + m, 2 * r + m);
        mid.view_mut((0, r), (r, r)).copy_from(&self.core);
        mid.view_mut((r, 0), (r, r)).copy_from(&self.core.transpose());
        mid.view_mut((2 * r, 2 * r), (m, m)).fill_with_identity();
        let res = &rq * mid * rq.transpose();
        let ff = f.tr_mul(f);
        Ok(spectral_norm_sym(&res) / spectral_norm_sym(&ff))
    }
}

#[derive(Clone, Debug)]
pub struct AlrsResult<T: Scalar> {
    pub factor: LowRankGramian<T>,
    /// Leading singular-value estimates after every iteration.
    pub singular_history: Vec<Vec<T>>,
    /// Total iteration count at each rank increase.
    pub stage_ends: Vec<usize>,
    pub iterations_used: usize,
    /// False when `k_max` ran out before the rank test was satisfied.
    pub converged: bool,
    /// Relative Lyapunov residual of the returned approximation.
    pub residual: T,
}

/// Relative 2-norm change between singular-value vectors, the shorter one
/// padded with zeros.
pub(crate) fn stagnation<T: Scalar>(cur: &[T], prev: &[T]) -> T {
    let len = cur.len().max(prev.len());
    let at = |v: &[T], i: usize| v.get(i).copied().unwrap_or_else(T::zero);
    let diff = DVector::from_fn(len, |i, _| at(cur, i) - at(prev, i));
    let norm = DVector::from_column_slice(cur).norm();
    if norm == T::zero() {
        return T::one();
    }
    diff.norm() / norm
}

/// Number of singular values usable for an order-`r` truncation.
pub(crate) fn usable(s: &[f64], r: usize) -> usize {
    let avail = s.iter().take_while(|v| **v > SV_FLOOR * s[0]).count();
    r.min(avail)
}

/// Decides whether the loop should continue given the latest full singular
/// value vector and the current order.
pub(crate) fn rank_test_passes<T: Scalar>(s: &[T], r: usize, tol: f64) -> bool {
    if s.is_empty() || s[0] <= T::zero() {
        return false;
    }
    let idx = r.min(s.len());
    (s[idx - 1] / s[0]).as_f64() >= tol
}

/// Low-rank approximation of the solution of `AP + PAᵀ + BBᵀ = 0`.
pub fn alrs_lyap<T: Scalar, O: LinearOperator<T> + ?Sized>(
    a: &O,
    b: &DMatrix<T>,
    cfg: &AlrsConfig,
) -> Result<AlrsResult<T>> {
    cfg.validate()?;
    let n = a.dim();
    let m = b.ncols();
    if n == 0 || m == 0 || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!("A is {n}x{n}, B is {}x{m}", b.nrows())));
    }
    let stage_tol = T::lit(cfg.stage_tol.unwrap_or(cfg.tol));
    let (mut ar, mut br, _) = random_hurwitz::<T>(cfg.r0, m, 1, cfg.seed);
    let mut r = cfg.r0;
    let mut basis = GrowingBasis::new(n, b.clone());
    let mut s_prev: Vec<T> = Vec::new();
    let mut s_last: Vec<T> = Vec::new();
    let mut history = Vec::new();
    let mut stage_ends = Vec::new();
    let mut vr = DMatrix::zeros(n, 0);
    let (mut i, mut k) = (1usize, 1usize);
    let mut converged = false;
    loop {
        if k > 1 && !rank_test_passes(&s_last, r, cfg.tol) {
            converged = true;
            break;
        }
        if k > cfg.k_max {
            break;
        }
        let (ar_stable, _) = reflect_unstable(&ar)?;
        let phat = solve_sylvester_skinny(a, &ar_stable, &(b * br.transpose()))?;
        let added = basis.extend(a, &phat)?;
        let kdim = basis.dim();
        let pk = LyapunovSolver::new(&basis.proj)?.solve(&(&basis.qf * basis.qf.transpose()))?;
        let zp = psd_factor(&pk)?;
        let svd = ordered_svd(&zp.z.tr_mul(&zp.z));
        let s64: Vec<f64> = svd.s.iter().map(|v| v.as_f64()).collect();
        let cur = svd.s[..usable(&s64, r)].to_vec();
        let advance = stagnation(&cur, &s_prev) <= stage_tol || i >= cfg.i_max;
        if advance {
            r += cfg.dr;
        }
        let rr = usable(&s64, r);
        let scale =
            DMatrix::from_diagonal(&DVector::from_iterator(rr, svd.s[..rr].iter().map(|s| T::one() / s.sqrt())));
        let y = &zp.z * svd.u.columns(0, rr) * scale;
        ar = y.tr_mul(&basis.proj) * &y;
        br = y.tr_mul(&basis.qf);
        vr = &basis.q * &y;
        history.push(cur.clone());
        if advance {
            stage_ends.push(k);
            basis.reset(a, &phat)?;
            s_prev.clear();
            i = 0;
        } else {
            s_prev = cur;
        }
        s_last = svd.s;
        s_last.resize(kdim.max(s_last.len()), T::zero());
        i += 1;
        k += 1;
        if added == 0 && kdim < r {
            // the span is invariant: nothing further can be captured
            converged = true;
            break;
        }
    }
    let pr = LyapunovSolver::new(&ar)?.solve(&(&br * br.transpose()))?;
    let factor = LowRankGramian { basis: vr, core: pr };
    let residual = factor.lyapunov_residual(a, b)?;
    Ok(AlrsResult { factor, singular_history: history, stage_ends, iterations_used: k - 1, converged, residual })
}
