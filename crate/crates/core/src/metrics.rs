//! Error measures: Gramian and PQ-product errors, sampled H∞ ratios and
//! frequency-response sweeps.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::alrs::LowRankGramian;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, spectral_norm_sym, LinearOperator, LyapunovSolver, Operator, RealSchur};
use crate::reducers::ReducedModel;
use crate::scalar::{cabs, cx, Cx, Scalar};
use crate::system::{StateSpaceModel, DEFAULT_DENSE_CAP};

/// Log-spaced frequency grid (rad/s) with a relative resolution for the
/// local refinement of maxima.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqGrid {
    pub points: Vec<f64>,
    pub refine_rel: f64,
}

pub const DEFAULT_GRID_POINTS: usize = 400;

impl FreqGrid {
    pub fn log_space(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && count >= 2 && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid grid [{lo}, {hi}] with {count} points")));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let step = (b - a) / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count).map(|i| 10f64.powf(a + step * i as f64)).collect();
        points[0] = lo;
        points[count - 1] = hi;
        Ok(Self { points, refine_rel: 1e-3 })
    }

    /// `DEFAULT_GRID_POINTS` points over `[1e-3 |λ|min, 1e3 |λ|max]` of the
    /// spectrum of `A`.
    pub fn for_model<T: Scalar>(model: &StateSpaceModel<T>) -> Result<Self> {
        let (lo, hi) = spectrum_magnitude_bounds(model.a())?;
        Self::log_space(1e-3 * lo, 1e3 * hi, DEFAULT_GRID_POINTS)
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i > 0 { e2[i - 1] / q } else { 0.0 };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalue magnitudes of `A` (estimates for large
/// tridiagonal operators: Sturm bisection for the smallest, Gershgorin for the
/// largest).
pub fn spectrum_magnitude_bounds<T: Scalar>(a: &Operator<T>) -> Result<(f64, f64)> {
    let n = a.dim();
    if let Operator::Tridiagonal(t) = a {
        let (lo, up) = (t.lower(), t.upper());
        if lo.iter().zip(up).all(|(l, u)| (*l * *u) > T::zero()) || n == 1 {
            // diagonally similar to symmetric; work with -A
            let d: Vec<f64> = t.diag().iter().map(|v| -v.as_f64()).collect();
            let e2: Vec<f64> = lo.iter().zip(up).map(|(l, u)| (*l * *u).as_f64()).collect();
            let radius = |i: usize| {
                let mut r = 0.0;
                if i > 0 {
                    r += e2[i - 1].sqrt();
                }
                if i + 1 < n {
                    r += e2[i].sqrt();
                }
                r
            };
            let gmin = (0..n).map(|i| d[i] - radius(i)).fold(f64::INFINITY, f64::min);
            let gmax = (0..n).map(|i| d[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
            let smallest = |mut lo: f64, mut hi: f64| {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if sturm_count(&d, &e2, mid) >= 1 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 1e-12 * hi.abs().max(f64::MIN_POSITIVE) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            };
            let largest = |mut lo: f64, mut hi: f64| {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if sturm_count(&d, &e2, mid) >= n {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 1e-12 * hi.abs().max(f64::MIN_POSITIVE) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            };
            let lmin = smallest(gmin, gmax);
            let lmax = largest(gmin, gmax);
            // -A has eigenvalues in [lmin, lmax]; magnitudes of A's eigenvalues
            let (amin, amax) = if lmin > 0.0 || lmax < 0.0 {
                (lmin.abs().min(lmax.abs()), lmin.abs().max(lmax.abs()))
            } else {
                (f64::MIN_POSITIVE, lmin.abs().max(lmax.abs()))
            };
            return Ok((amin.max(f64::MIN_POSITIVE), amax.max(f64::MIN_POSITIVE)));
        }
        if n > DEFAULT_DENSE_CAP {
            return Err(Error::DenseInfeasible { n, cap: DEFAULT_DENSE_CAP });
        }
    }
    if n > DEFAULT_DENSE_CAP {
        return Err(Error::DenseInfeasible { n, cap: DEFAULT_DENSE_CAP });
    }
    let eig = RealSchur::new(&a.to_dense())?.eigenvalues();
    let mags: Vec<f64> = eig.iter().map(|l| cabs(*l).as_f64()).collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(0.0, f64::max);
    Ok((lo.max(f64::MIN_POSITIVE), hi.max(f64::MIN_POSITIVE)))
}

/// `‖P - V Pᵣ Vᵀ‖₂ / ‖P‖₂`.
pub fn gramian_rel_error<T: Scalar>(p: &DMatrix<T>, factor: &LowRankGramian<T>) -> Result<T> {
    if p.nrows() != factor.basis.nrows() || !p.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Gramian is {}x{}, factor has {} rows",
            p.nrows(),
            p.ncols(),
            factor.basis.nrows()
        )));
    }
    Ok(spectral_norm_sym(&(p - factor.to_dense())) / spectral_norm_sym(p))
}

/// `‖PQ - Vᵣ Pᵣ Vᵣᵀ Wᵣ Qᵣ Wᵣᵀ‖₂ / ‖PQ‖₂` with `Pᵣ`, `Qᵣ` the reduced Gramians.
pub fn pq_rel_error<T: Scalar>(model: &StateSpaceModel<T>, red: &ReducedModel<T>) -> Result<T> {
    let g = model.gramians_dense()?;
    let solver = LyapunovSolver::new(&red.a())?;
    let (br, cr) = (red.rom.b(), red.rom.c());
    let pr = solver.solve(&(br * br.transpose()))?;
    let qr = solver.solve_transposed(&(cr.transpose() * cr))?;
    let pq = &g.p * &g.q;
    let approx = (&red.vr * pr * red.vr.transpose()) * (&red.wr * qr * red.wr.transpose());
    Ok(spectral_norm(&(&pq - approx)) / spectral_norm(&pq))
}

fn sigma_max<T: Scalar>(h: DMatrix<Cx<T>>) -> T {
    if h.len() == 1 {
        return cabs(h[(0, 0)]);
    }
    h.singular_values().iter().copied().fold(T::zero(), |a, b| a.max(b))
}

fn response<T: Scalar>(model: &StateSpaceModel<T>, w: f64) -> Result<DMatrix<Cx<T>>> {
    model.eval_transfer(cx(T::zero(), T::lit(w)))
}

fn error_response<T: Scalar>(model: &StateSpaceModel<T>, rom: &StateSpaceModel<T>, w: f64) -> Result<T> {
    Ok(sigma_max(response(model, w)? - response(rom, w)?))
}

/// Golden-section search for a local maximum of `f` on `[lo, hi]` in log
/// frequency, stopping at relative width `rel`.
fn refine_max(f: &(dyn Fn(f64) -> Result<f64> + Sync), lo: f64, hi: f64, rel: f64) -> Result<f64> {
    if lo <= 0.0 || hi <= lo {
        return Ok(f64::NEG_INFINITY);
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1.exp())?;
    let mut f2 = f(x2.exp())?;
    let mut best = f1.max(f2);
    for _ in 0..200 {
        if (b - a).abs() <= rel {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1.exp())?;
            best = best.max(f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2.exp())?;
            best = best.max(f2);
        }
    }
    Ok(best)
}

/// Grid maximum of `f` (plus `ω = 0`), refined around the grid argmax.
fn sampled_peak(f: &(dyn Fn(f64) -> Result<f64> + Sync), grid: &FreqGrid) -> Result<f64> {
    let values: Vec<f64> = grid.points.par_iter().map(|w| f(*w)).collect::<Result<Vec<f64>>>()?;
    let (arg, mut peak) =
        values.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    peak = peak.max(f(0.0)?);
    let lo = grid.points[arg.saturating_sub(1)];
    let hi = grid.points[(arg + 1).min(grid.points.len() - 1)];
    peak = peak.max(refine_max(f, lo, hi, grid.refine_rel)?);
    Ok(peak)
}

/// Sampled `‖H - Hᵣ‖∞ / ‖H‖∞`. Sampling makes both norms lower bounds.
pub fn hinf_rel_error<T: Scalar>(model: &StateSpaceModel<T>, rom: &StateSpaceModel<T>, grid: &FreqGrid) -> Result<T> {
    if model.m() != rom.m() || model.p() != rom.p() {
        return Err(Error::DimensionMismatch("models have different input/output counts".into()));
    }
    let err = |w: f64| error_response(model, rom, w).map(|v| v.as_f64());
    let nominal = |w: f64| response(model, w).map(|h| sigma_max(h).as_f64());
    let num = sampled_peak(&err, grid)?;
    let den = sampled_peak(&nominal, grid)?;
    Ok(T::lit(num / den))
}

/// `(ω, σ_max(H(jω)))` for every grid point, in grid order.
pub fn sigma_sweep<T: Scalar>(model: &StateSpaceModel<T>, grid: &FreqGrid) -> Result<Vec<(f64, T)>> {
    grid.points.par_iter().map(|w| Ok((*w, sigma_max(response(model, *w)?)))).collect()
}
