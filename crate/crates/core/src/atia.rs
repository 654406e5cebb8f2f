//! Adaptive tangential-interpolation balanced truncation: bi-tangential
//! Hermite interpolation at the mirror images of the current low-rank
//! truncated balanced realization, with order selection.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::alrs::{rank_test_passes, stagnation, usable, validate_common};
use crate::benchmarks::random_hurwitz;
use crate::error::{Error, Result};
use crate::linalg::basis::GrowingBasis;
use crate::linalg::{ordered_svd, psd_factor, singular_values, solve_sylvester_skinny, LyapunovSolver, Transposed};
use crate::reducers::{project, reflect_unstable, ReducedModel};
use crate::scalar::Scalar;
use crate::system::{StateSpaceModel, SvKind, SvReport, DEFAULT_DENSE_CAP};

/// Condition number of `WₖᵀVₖ` above which the bases are re-biorthogonalized.
const BIORTH_COND_LIMIT: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtiaConfig {
    pub r0: usize,
    pub dr: usize,
    pub tol: f64,
    pub stage_tol: Option<f64>,
    pub i_max: usize,
    pub k_max: usize,
    pub seed: u64,
}

impl Default for AtiaConfig {
    fn default() -> Self {
        Self { r0: 2, dr: 2, tol: 1e-5, stage_tol: None, i_max: 10, k_max: 100, seed: 0 }
    }
}

impl AtiaConfig {
    pub fn validate(&self) -> Result<()> {
        validate_common(self.r0, self.dr, self.tol, self.stage_tol, self.i_max, self.k_max)
    }
}

#[derive(Clone, Debug)]
pub struct AtiaRecord<T: Scalar> {
    /// Total iteration count (1-based).
    pub k: usize,
    /// Iteration within the current order stage (1-based).
    pub i: usize,
    /// Order in effect during the iteration.
    pub r: usize,
    pub sv: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct AtiaResult<T: Scalar> {
    pub rom: ReducedModel<T>,
    pub hankel_estimates: SvReport<T>,
    pub history: Vec<AtiaRecord<T>>,
    pub iterations_used: usize,
    pub converged: bool,
    /// Iterations in which the bases had to be re-biorthogonalized.
    pub rebiorthogonalizations: usize,
}

/// Balanced truncation of `model` by adaptive tangential interpolation.
pub fn atia_bt<T: Scalar>(model: &StateSpaceModel<T>, cfg: &AtiaConfig) -> Result<AtiaResult<T>> {
    cfg.validate()?;
    let a = model.a();
    let at = Transposed(a);
    let (b, c) = (model.b(), model.c());
    let n = model.n();
    let stage_tol = T::lit(cfg.stage_tol.unwrap_or(cfg.tol));
    let (mut ar, mut br, mut cr) = random_hurwitz::<T>(cfg.r0, model.m(), model.p(), cfg.seed);
    let mut r = cfg.r0;
    let mut vb = GrowingBasis::new(n, b.clone());
    let mut wb = GrowingBasis::new(n, c.transpose());
    let mut s_prev: Vec<T> = Vec::new();
    let mut s_last: Vec<T> = Vec::new();
    let mut history = Vec::new();
    let mut vr = DMatrix::zeros(n, 0);
    let mut wr = DMatrix::zeros(n, 0);
    let mut estimates = Vec::new();
    let (mut i, mut k) = (1usize, 1usize);
    let mut converged = false;
    let mut rebiorth = 0;
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
        let qhat = solve_sylvester_skinny(&at, &ar_stable.transpose(), &(c.transpose() * &cr))?;
        let added = vb.extend(a, &phat)? + wb.extend(&at, &qhat)?;
        let mut e = wb.q.tr_mul(&vb.q);
        let esv = singular_values(&e);
        if esv.is_empty() || esv[0] <= T::zero() {
            return Err(Error::SingularProjection { cond: f64::INFINITY });
        }
        if (esv[0] / esv[esv.len() - 1]).as_f64() > BIORTH_COND_LIMIT || esv[esv.len() - 1] <= T::zero() {
            let svd = ordered_svd(&e);
            let keep = svd.s.iter().take_while(|s| (esv[0] / **s).as_f64() <= BIORTH_COND_LIMIT).count();
            wb.rotate(&at, &svd.u.columns(0, keep).into_owned())?;
            vb.rotate(a, &svd.v.columns(0, keep).into_owned())?;
            e = wb.q.tr_mul(&vb.q);
            rebiorth += 1;
        }
        let pk = LyapunovSolver::new(&vb.proj)?.solve(&(&vb.qf * vb.qf.transpose()))?;
        let qk = LyapunovSolver::new(&wb.proj)?.solve(&(&wb.qf * wb.qf.transpose()))?;
        let zp = psd_factor(&pk)?;
        let zq = psd_factor(&qk)?;
        if zp.rank() == 0 || zq.rank() == 0 {
            return Err(Error::RankDeficient { requested: r, available: 0 });
        }
        let svd = ordered_svd(&(zq.z.tr_mul(&e) * &zp.z));
        let s64: Vec<f64> = svd.s.iter().map(|v| v.as_f64()).collect();
        let cur = svd.s[..usable(&s64, r)].to_vec();
        history.push(AtiaRecord { k, i, r, sv: cur.clone() });
        let advance = stagnation(&cur, &s_prev) <= stage_tol || i >= cfg.i_max;
        if advance {
            r += cfg.dr;
        }
        let rr = usable(&s64, r);
        let scale =
            DMatrix::from_diagonal(&DVector::from_iterator(rr, svd.s[..rr].iter().map(|s| T::one() / s.sqrt())));
        let yv = &zp.z * svd.v.columns(0, rr) * &scale;
        let yw = &zq.z * svd.u.columns(0, rr) * &scale;
        let wav = wb.q.tr_mul(&vb.aq);
        ar = yw.tr_mul(&wav) * &yv;
        br = yw.tr_mul(&wb.q.tr_mul(b));
        cr = c * &vb.q * &yv;
        vr = &vb.q * &yv;
        wr = &wb.q * &yw;
        estimates = svd.s[..rr].to_vec();
        let kdim = vb.dim().min(wb.dim());
        if advance {
            vb.reset(a, &phat)?;
            wb.reset(&at, &qhat)?;
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
            converged = true;
            break;
        }
    }
    let mut rom = project(model, &vr, &wr)?;
    let hankel_estimates = SvReport {
        values: estimates.clone(),
        kind: SvKind::Hankel,
        history: history.iter().map(|h| h.sv.clone()).collect(),
    };
    rom.retained_sv = Some(SvReport::new(estimates, SvKind::Hankel));
    Ok(AtiaResult {
        rom,
        hankel_estimates,
        history,
        iterations_used: k - 1,
        converged,
        rebiorthogonalizations: rebiorth,
    })
}

/// One row of the estimate-versus-dense comparison (1-based `index`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HsvComparison {
    pub index: usize,
    pub estimate: f64,
    pub dense: f64,
    pub rel_diff: f64,
}

/// Compares the retained Hankel singular value estimates with the dense ones.
pub fn atia_hsv_compare<T: Scalar>(result: &AtiaResult<T>, model: &StateSpaceModel<T>) -> Result<Vec<HsvComparison>> {
    if model.n() > DEFAULT_DENSE_CAP {
        return Err(Error::DenseInfeasible { n: model.n(), cap: DEFAULT_DENSE_CAP });
    }
    let dense = model.hankel_singular_values()?;
    Ok(result
        .hankel_estimates
        .values
        .iter()
        .zip(&dense.values)
        .enumerate()
        .map(|(i, (e, d))| {
            let (e, d) = (e.as_f64(), d.as_f64());
            HsvComparison { index: i + 1, estimate: e, dense: d, rel_diff: (e - d).abs() / d }
        })
        .collect())
}
