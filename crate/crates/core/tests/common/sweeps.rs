//! Oracle sweeps shared by the oracle suite and the acceptance target.

use balred::benchmarks::random_stable;
use balred::linalg::{solve_lyapunov_dense, solve_sylvester_skinny, DenseOperator, LinearOperator, LyapunovSolver};
use balred::reducers::two_step_lowrank_bt;
use balred::Model;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::*;

/// Hurwitz test matrix: even seeds have real spread spectra, odd seeds come
/// from the random-stable generator (complex pairs).
pub fn lyapunov_instance(seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = 2 + (seed as usize * 7) % 29;
    let mut g = rng(1000 + seed);
    let a = if seed.is_multiple_of(2) {
        spread_hurwitz(&mut g, n)
    } else {
        random_stable::<f64>(n, 1, 1, seed).unwrap().a().to_dense()
    };
    let b = gaussian(&mut g, n, 1 + seed as usize % 3);
    (a, &b * b.transpose())
}

fn psd_factor_by_eig(p: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new((p + p.transpose()) * 0.5);
    let top = eig.eigenvalues.max();
    let cols: Vec<DVector<f64>> = (0..p.nrows())
        .filter(|&i| eig.eigenvalues[i] > 1e-14 * top)
        .map(|i| eig.eigenvectors.column(i) * eig.eigenvalues[i].sqrt())
        .collect();
    DMatrix::from_columns(&cols)
}

/// The low-rank balanced truncation computed entirely in the coordinates of
/// the k-th order interpolant: Galerkin Gramians by Kronecker solves, the
/// square-root step on their factors, and `Aᵣ = Wᵣᵀ(WₖᵀAVₖ)Vᵣ`.
pub fn reduce_interpolant(model: &Model, vk: &DMatrix<f64>, wk: &DMatrix<f64>, r: usize) -> Model {
    let vk = vk.clone().qr().q();
    let wk = wk.clone().qr().q();
    let a = model.a().to_dense();
    let (b, c) = (model.b(), model.c());
    let av = vk.transpose() * &a * &vk;
    let aw = wk.transpose() * a.transpose() * &wk;
    let bv = vk.transpose() * b;
    let cw = wk.transpose() * c.transpose();
    let zp = psd_factor_by_eig(&kronecker_lyapunov(&av, &(&bv * bv.transpose())));
    let zq = psd_factor_by_eig(&kronecker_lyapunov(&aw, &(&cw * cw.transpose())));
    let svd = (zq.transpose() * wk.transpose() * &vk * &zp).svd(true, true);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut vr = DMatrix::zeros(zp.nrows(), r);
    let mut wr = DMatrix::zeros(zq.nrows(), r);
    for (col, &i) in idx.iter().take(r).enumerate() {
        let s = svd.singular_values[i].sqrt();
        vr.set_column(col, &(&zp * vt.row(i).transpose() / s));
        wr.set_column(col, &(&zq * u.column(i) / s));
    }
    let ak = wk.transpose() * &a * &vk;
    Model::dense(wr.transpose() * ak * &vr, wr.transpose() * wk.transpose() * b, c * &vk * &vr).unwrap()
}

/// Worst relative difference of the dense Lyapunov solvers (`AP + PAᵀ` and
/// `AᵀQ + QA`) against the Kronecker oracle over 50 instances with n ≤ 30.
pub fn lyapunov_worst() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let (a, g) = lyapunov_instance(seed);
        let p = solve_lyapunov_dense(&a, &g).unwrap();
        worst = worst.max(rel_diff(&p, &kronecker_lyapunov(&a, &g)));
        let q = LyapunovSolver::new(&a).unwrap().solve_transposed(&g).unwrap();
        worst = worst.max(rel_diff(&q, &kronecker_lyapunov(&a.transpose(), &g)));
    }
    worst
}

/// Worst relative difference of the skinny Sylvester solver against the
/// Kronecker oracle over 50 instances with n ≤ 30.
pub fn sylvester_worst() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let n = 3 + (seed as usize * 5) % 28;
        let r = 1 + seed as usize % 6;
        let mut g = rng(2000 + seed);
        let a = random_stable::<f64>(n, 1, 1, 3 * seed).unwrap().a().to_dense();
        let m = random_stable::<f64>(r, 1, 1, 3 * seed + 1).unwrap().a().to_dense();
        let f = gaussian(&mut g, n, r);
        let x = solve_sylvester_skinny(&DenseOperator::new(a.clone()), &m, &f).unwrap();
        worst = worst.max(rel_diff(&x, &kronecker_sylvester(&a, &m, &f)));
    }
    worst
}

/// Worst transfer mismatch between `two_step_lowrank_bt` and the reduction
/// carried out on the interpolant, over 20 instances at five frequencies.
pub fn two_step_worst() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let model = random_stable::<f64>(40, 2, 2, 500 + seed).unwrap();
        let mut g = rng(3000 + seed);
        let vk = gaussian(&mut g, 40, 10);
        let wk = gaussian(&mut g, 40, 10);
        let lifted = two_step_lowrank_bt(&model, &vk, &wk, 4).unwrap();
        let oracle = reduce_interpolant(&model, &vk, &wk, 4);
        worst = worst.max(transfer_mismatch(&lifted.rom, &oracle, &FIVE_FREQUENCIES));
    }
    worst
}
