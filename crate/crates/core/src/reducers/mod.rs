//! Projection-based reducers: Petrov–Galerkin projection, square-root balanced
//! truncation and its one-sided variants, tangential interpolation through
//! Sylvester equations, and the two-sided iteration.

mod balanced;
mod interpolation;

pub use balanced::{bt_from_factors, bt_square_root, tcr, tor, two_step_lowrank_bt};
pub use interpolation::{
    sylvester_pair, tangential_interpolate, tsia, InterpolationData, SylvesterPair, TsiaConfig, TsiaResult,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, LinearOperator, RealSchur};
use crate::scalar::{Cx, Scalar};
use crate::system::{StateSpaceModel, SvReport};

/// Projections above this condition number of `VᵣᵀWᵣ` are rejected.
pub const PROJECTION_COND_LIMIT: f64 = 1e12;

/// Reduced model `(Aᵣ, Bᵣ, Cᵣ)` together with the bases that produced it.
#[derive(Clone, Debug)]
pub struct ReducedModel<T: Scalar> {
    pub rom: StateSpaceModel<T>,
    pub vr: DMatrix<T>,
    /// Normalized so that `WᵣᵀVᵣ = I`.
    pub wr: DMatrix<T>,
    pub retained_sv: Option<SvReport<T>>,
}

impl<T: Scalar> ReducedModel<T> {
    pub fn order(&self) -> usize {
        self.rom.n()
    }

    pub fn eval_transfer(&self, s: Cx<T>) -> Result<DMatrix<Cx<T>>> {
        self.rom.eval_transfer(s)
    }

    /// Dense `Aᵣ`.
    pub fn a(&self) -> DMatrix<T> {
        self.rom.a().to_dense()
    }
}

/// Petrov–Galerkin projection. `Wᵣ` is replaced by `Wᵣ (VᵣᵀWᵣ)⁻¹` so that
/// `WᵣᵀVᵣ = I`; the reduced transfer function does not depend on this choice.
pub fn project<T: Scalar>(model: &StateSpaceModel<T>, vr: &DMatrix<T>, wr: &DMatrix<T>) -> Result<ReducedModel<T>> {
    let n = model.n();
    if vr.nrows() != n || wr.nrows() != n || vr.ncols() != wr.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "projection bases {}x{} and {}x{} for n = {n}",
            vr.nrows(),
            vr.ncols(),
            wr.nrows(),
            wr.ncols()
        )));
    }
    if vr.ncols() == 0 {
        return Err(Error::EmptyInput("projection bases have no columns"));
    }
    let g = vr.tr_mul(wr);
    let sv = singular_values(&g);
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    let cond = if smin > T::zero() { (smax / smin).as_f64() } else { f64::INFINITY };
    if cond.is_nan() || cond >= PROJECTION_COND_LIMIT {
        return Err(Error::SingularProjection { cond });
    }
    let ginv = g.try_inverse().ok_or(Error::SingularProjection { cond })?;
    let wr = wr * ginv;
    let ar = wr.tr_mul(&model.a().apply(vr));
    let br = wr.tr_mul(model.b());
    let cr = model.c() * vr;
    Ok(ReducedModel { rom: StateSpaceModel::dense(ar, br, cr)?, vr: vr.clone(), wr, retained_sv: None })
}

/// Moves eigenvalues with real part `>= -1e-12` into the open left half-plane
/// (`Re λ -> -|Re λ| - 1e-8`) through the real Schur form, leaving the rest of
/// the spectrum untouched. Returns the matrix and whether anything changed.
pub(crate) fn reflect_unstable<T: Scalar>(a: &DMatrix<T>) -> Result<(DMatrix<T>, bool)> {
    let schur = RealSchur::new(a)?;
    let mut t = schur.t.clone();
    let guard = T::lit(-1e-12);
    let nudge = T::lit(1e-8);
    let mut changed = false;
    for &(j, q) in &schur.blocks {
        if q == 1 {
            if t[(j, j)] >= guard {
                t[(j, j)] = -t[(j, j)].abs() - nudge;
                changed = true;
            }
        } else {
            let re = (t[(j, j)] + t[(j + 1, j + 1)]) * T::lit(0.5);
            if re >= guard {
                let shift = re.abs() + re + nudge;
                t[(j, j)] -= shift;
                t[(j + 1, j + 1)] -= shift;
                changed = true;
            }
        }
    }
    if !changed {
        return Ok((a.clone(), false));
    }
    Ok((&schur.q * t * schur.q.transpose(), true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn coordinate_projection() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[-0.1, -0.2, -100.0, -200.0]));
        let b = DMatrix::from_column_slice(4, 1, &[1.0, 1.0, 1e4, 1.0]);
        let c = DMatrix::from_row_slice(1, 4, &[1.0, 1.0, 1.0, 1e4]);
        let m = StateSpaceModel::dense(a, b, c).unwrap();
        let e1 = DMatrix::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        let red = project(&m, &e1, &e1).unwrap();
        assert_eq!(red.a()[(0, 0)], -0.1);
        assert_eq!(red.rom.b()[(0, 0)], 1.0);
        assert_eq!(red.rom.c()[(0, 0)], 1.0);
        let id = DMatrix::identity(4, 4);
        let full = project(&m, &id, &id).unwrap();
        for s in [cx(0.0, 0.0), cx(0.5, 2.0), cx(-3.0, 1.0)] {
            let d = (full.eval_transfer(s).unwrap() - m.eval_transfer(s).unwrap()).norm();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn orthogonal_bases_are_singular() {
        let m = StateSpaceModel::dense(
            -DMatrix::<f64>::identity(2, 2),
            DMatrix::from_element(2, 1, 1.0),
            DMatrix::from_element(1, 2, 1.0),
        )
        .unwrap();
        let v = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let w = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        assert!(matches!(project(&m, &v, &w), Err(Error::SingularProjection { .. })));
    }

    #[test]
    fn reflection_moves_spectrum_left() {
        let a = DMatrix::<f64>::from_row_slice(3, 3, &[0.5, 1.0, 0.0, -1.0, 0.2, 0.3, 0.0, 0.0, -2.0]);
        let (s, changed) = reflect_unstable(&a).unwrap();
        assert!(changed);
        let eig = RealSchur::new(&s).unwrap().eigenvalues();
        assert!(eig.iter().all(|l| l.re < 0.0));
        assert!(eig.iter().any(|l| (l.re + 2.0).abs() < 1e-12));
        assert!(eig.iter().any(|l| (l.re + 0.35 + 1e-8).abs() < 1e-10));
        let stable = -DMatrix::<f64>::identity(2, 2);
        assert!(!reflect_unstable(&stable).unwrap().1);
    }
}
