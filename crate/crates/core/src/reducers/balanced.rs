use nalgebra::DMatrix;

use super::{project, ReducedModel};
use crate::error::{Error, Result};
use crate::linalg::{ordered_svd, orthonormalize, psd_factor, sym_eig_desc, LinearOperator, LyapunovSolver};
use crate::scalar::Scalar;
use crate::system::{StateSpaceModel, SvKind, SvReport};

const TIE_TOL: f64 = 1e-12;
const ZERO_SV_TOL: f64 = 1e-14;

fn check_order(values: &[f64], r: usize) -> Result<()> {
    let available = values.iter().take_while(|v| **v > ZERO_SV_TOL * values[0]).count();
    if r == 0 || r > available {
        return Err(Error::RankDeficient { requested: r, available });
    }
    if r < values.len() && values[r - 1] - values[r] <= TIE_TOL * values[0] {
        return Err(Error::SingularValueTie { index: r, next: r + 1, gap: values[r - 1] - values[r] });
    }
    Ok(())
}

fn to_f64<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

/// Square-root balanced truncation from given Gramian factors `P ≈ LₚLₚᵀ`,
/// `Q ≈ L_qL_qᵀ`. With exact factors this is ordinary balanced truncation;
/// with truncated factors it is the usual low-rank variant.
pub fn bt_from_factors<T: Scalar>(
    model: &StateSpaceModel<T>,
    lp: &DMatrix<T>,
    lq: &DMatrix<T>,
    r: usize,
) -> Result<ReducedModel<T>> {
    let n = model.n();
    if lp.nrows() != n || lq.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "factors with {} and {} rows for n = {n}",
            lp.nrows(),
            lq.nrows()
        )));
    }
    if lp.ncols() == 0 || lq.ncols() == 0 {
        return Err(Error::RankDeficient { requested: r, available: 0 });
    }
    let svd = ordered_svd(&lq.tr_mul(lp));
    check_order(&to_f64(&svd.s), r)?;
    let scale =
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(r, svd.s[..r].iter().map(|s| T::one() / s.sqrt())));
    let vr = lp * svd.v.columns(0, r) * &scale;
    let wr = lq * svd.u.columns(0, r) * &scale;
    let mut red = project(model, &vr, &wr)?;
    red.retained_sv = Some(SvReport::new(svd.s[..r].to_vec(), SvKind::Hankel));
    Ok(red)
}

/// Square-root balanced truncation to order `r` using dense Gramians.
pub fn bt_square_root<T: Scalar>(model: &StateSpaceModel<T>, r: usize) -> Result<ReducedModel<T>> {
    if r == 0 || r > model.n() {
        return Err(Error::InvalidArgument(format!("order {r} outside 1..={}", model.n())));
    }
    let g = model.gramians_dense()?;
    let lp = psd_factor(&g.p)?;
    let lq = psd_factor(&g.q)?;
    bt_from_factors(model, &lp.z, &lq.z, r)
}

fn one_sided<T: Scalar>(model: &StateSpaceModel<T>, gramian: &DMatrix<T>, r: usize) -> Result<ReducedModel<T>> {
    if r == 0 || r > model.n() {
        return Err(Error::InvalidArgument(format!("order {r} outside 1..={}", model.n())));
    }
    let (lam, u) = sym_eig_desc(gramian);
    check_order(&to_f64(&lam), r)?;
    let vr = u.columns(0, r).into_owned();
    let mut red = project(model, &vr, &vr)?;
    red.retained_sv = Some(SvReport::new(lam[..r].to_vec(), SvKind::GramianSingular));
    Ok(red)
}

/// Truncated controllable realization: Galerkin projection onto the dominant
/// eigenvectors of the controllability Gramian.
pub fn tcr<T: Scalar>(model: &StateSpaceModel<T>, r: usize) -> Result<ReducedModel<T>> {
    let g = model.gramians_dense()?;
    one_sided(model, &g.p, r)
}

/// Truncated observable realization: Galerkin projection onto the dominant
/// eigenvectors of the observability Gramian.
pub fn tor<T: Scalar>(model: &StateSpaceModel<T>, r: usize) -> Result<ReducedModel<T>> {
    let g = model.gramians_dense()?;
    one_sided(model, &g.q, r)
}

/// Low-rank balanced truncation as a two-step procedure: Galerkin-projected
/// Gramians on `span(Vₖ)` and `span(Wₖ)`, then the square-root step on the
/// factors `VₖZₚ` and `WₖZ_q`. The result is the order-`r` balanced reduction
/// of the interpolant `CVₖ(sWₖᵀVₖ - WₖᵀAVₖ)⁻¹WₖᵀB`.
pub fn two_step_lowrank_bt<T: Scalar>(
    model: &StateSpaceModel<T>,
    vk: &DMatrix<T>,
    wk: &DMatrix<T>,
    r: usize,
) -> Result<ReducedModel<T>> {
    let vk = orthonormalize(vk)?;
    let wk = orthonormalize(wk)?;
    if vk.ncols() < r || wk.ncols() < r {
        return Err(Error::RankDeficient { requested: r, available: vk.ncols().min(wk.ncols()) });
    }
    let av = vk.tr_mul(&model.a().apply(&vk));
    let aw = wk.tr_mul(&model.a().apply(&wk));
    let bv = vk.tr_mul(model.b());
    let cw = model.c() * &wk;
    let pk = LyapunovSolver::new(&av)?.solve(&(&bv * bv.transpose()))?;
    let qk = LyapunovSolver::new(&aw)?.solve_transposed(&(cw.transpose() * &cw))?;
    let zp = psd_factor(&pk)?;
    let zq = psd_factor(&qk)?;
    bt_from_factors(model, &(&vk * &zp.z), &(&wk * &zq.z), r)
}
