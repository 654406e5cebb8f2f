use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{project, reflect_unstable, ReducedModel};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, solve_sylvester_skinny, LinearOperator, RealSchur, Transposed};
use crate::scalar::{cabs, Cx, Scalar};
use crate::system::StateSpaceModel;

/// Tangential interpolation data in matrix form: right data `(S_b, L_b)` and
/// left data `(S_c, L_c)`. The eigenvalues of `S_b` (`S_c`) are the right
/// (left) interpolation points.
#[derive(Clone, Debug)]
pub struct InterpolationData<T: Scalar> {
    pub s_b: DMatrix<T>,
    pub l_b: DMatrix<T>,
    pub s_c: DMatrix<T>,
    pub l_c: DMatrix<T>,
}

fn realify<T: Scalar>(points: &[(Cx<T>, DVector<Cx<T>>)]) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let dim = points.first().map(|(_, d)| d.len()).ok_or(Error::EmptyInput("no interpolation points"))?;
    let r: usize = points.iter().map(|(s, _)| if s.im == T::zero() { 1 } else { 2 }).sum();
    let mut s_mat = DMatrix::zeros(r, r);
    let mut l_mat = DMatrix::zeros(dim, r);
    let mut j = 0;
    for (s, d) in points {
        if d.len() != dim {
            return Err(Error::DimensionMismatch("tangential directions of different lengths".into()));
        }
        if s.im == T::zero() {
            s_mat[(j, j)] = s.re;
            l_mat.set_column(j, &d.map(|z| z.re));
            j += 1;
        } else {
            let (s, d) = if s.im > T::zero() { (*s, d.clone()) } else { (s.conj(), d.map(|z| z.conj())) };
            s_mat[(j, j)] = s.re;
            s_mat[(j, j + 1)] = s.im;
            s_mat[(j + 1, j)] = -s.im;
            s_mat[(j + 1, j + 1)] = s.re;
            l_mat.set_column(j, &d.map(|z| z.re));
            l_mat.set_column(j + 1, &d.map(|z| z.im));
            j += 2;
        }
    }
    Ok((s_mat, l_mat))
}

impl<T: Scalar> InterpolationData<T> {
    pub fn new(s_b: DMatrix<T>, l_b: DMatrix<T>, s_c: DMatrix<T>, l_c: DMatrix<T>) -> Result<Self> {
        let r = s_b.nrows();
        if !s_b.is_square() || s_c.shape() != (r, r) || l_b.ncols() != r || l_c.ncols() != r {
            return Err(Error::DimensionMismatch(format!(
                "S_b {:?}, L_b {:?}, S_c {:?}, L_c {:?}",
                s_b.shape(),
                l_b.shape(),
                s_c.shape(),
                l_c.shape()
            )));
        }
        if r == 0 {
            return Err(Error::EmptyInput("interpolation data of order zero"));
        }
        Ok(Self { s_b, l_b, s_c, l_c })
    }

    /// Builds the data from explicit points and directions. A point with
    /// nonzero imaginary part stands for itself and its conjugate (with the
    /// conjugate direction) and occupies a real 2×2 block.
    pub fn from_points(right: &[(Cx<T>, DVector<Cx<T>>)], left: &[(Cx<T>, DVector<Cx<T>>)]) -> Result<Self> {
        let (s_b, l_b) = realify(right)?;
        let (s_c, l_c) = realify(left)?;
        Self::new(s_b, l_b, s_c, l_c)
    }

    /// Mirror images of the poles of `rom` with its residue directions:
    /// `S_b = -Aᵣᵀ`, `L_b = Bᵣᵀ`, `S_c = -Aᵣ`, `L_c = Cᵣ`.
    pub fn mirror_of(rom: &StateSpaceModel<T>) -> Self {
        let a = rom.a().to_dense();
        Self { s_b: -a.transpose(), l_b: rom.b().transpose(), s_c: -a, l_c: rom.c().clone() }
    }

    pub fn order(&self) -> usize {
        self.s_b.nrows()
    }

    pub fn right_points(&self) -> Result<Vec<Cx<T>>> {
        Ok(RealSchur::new(&self.s_b)?.eigenvalues())
    }

    pub fn left_points(&self) -> Result<Vec<Cx<T>>> {
        Ok(RealSchur::new(&self.s_c)?.eigenvalues())
    }
}

/// Interpolatory reduction: `AVᵣ - VᵣS_b + BL_b = 0`,
/// `AᵀWᵣ - WᵣS_c + CᵀL_c = 0`, then projection. The bases are orthonormalized
/// before projecting, which leaves the reduced transfer function unchanged.
pub fn tangential_interpolate<T: Scalar>(
    model: &StateSpaceModel<T>,
    data: &InterpolationData<T>,
) -> Result<ReducedModel<T>> {
    if data.l_b.nrows() != model.m() || data.l_c.nrows() != model.p() {
        return Err(Error::DimensionMismatch("tangential directions do not match the model's inputs/outputs".into()));
    }
    let v = solve_sylvester_skinny(model.a(), &-data.s_b.transpose(), &(model.b() * &data.l_b))?;
    let w =
        solve_sylvester_skinny(&Transposed(model.a()), &-data.s_c.transpose(), &(model.c().transpose() * &data.l_c))?;
    project_spans(model, &v, &w, data.order())
}

fn project_spans<T: Scalar>(
    model: &StateSpaceModel<T>,
    v: &DMatrix<T>,
    w: &DMatrix<T>,
    r: usize,
) -> Result<ReducedModel<T>> {
    let vq = orthonormalize(v)?;
    let wq = orthonormalize(w)?;
    if vq.ncols() != r || wq.ncols() != r {
        return Err(Error::SingularProjection { cond: f64::INFINITY });
    }
    project(model, &vq, &wq)
}

/// Solutions of `AP̂ + P̂Aᵣᵀ + BBᵣᵀ = 0` and `AᵀQ̂ + Q̂Aᵣ + CᵀCᵣ = 0`.
#[derive(Clone, Debug)]
pub struct SylvesterPair<T: Scalar> {
    pub phat: DMatrix<T>,
    pub qhat: DMatrix<T>,
}

pub fn sylvester_pair<T: Scalar>(model: &StateSpaceModel<T>, rom: &StateSpaceModel<T>) -> Result<SylvesterPair<T>> {
    if rom.m() != model.m() || rom.p() != model.p() {
        return Err(Error::DimensionMismatch("reduced model has different input/output counts".into()));
    }
    let ar = rom.a().to_dense();
    let phat = solve_sylvester_skinny(model.a(), &ar, &(model.b() * rom.b().transpose()))?;
    let qhat = solve_sylvester_skinny(&Transposed(model.a()), &ar.transpose(), &(model.c().transpose() * rom.c()))?;
    Ok(SylvesterPair { phat, qhat })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TsiaConfig {
    pub max_iter: usize,
    /// Stop when the relative change of the sorted pole vector falls below this.
    pub conv_tol: f64,
}

impl Default for TsiaConfig {
    fn default() -> Self {
        Self { max_iter: 200, conv_tol: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct TsiaResult<T: Scalar> {
    pub reduced: ReducedModel<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative pole change of the last iteration.
    pub pole_change: f64,
    /// Number of iterations whose projected `Aᵣ` had to be stabilized.
    pub reflections: usize,
}

fn sorted_poles<T: Scalar>(a: &DMatrix<T>) -> Result<Vec<Cx<T>>> {
    let mut p = RealSchur::new(a)?.eigenvalues();
    p.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
    Ok(p)
}

fn relative_change<T: Scalar>(new: &[Cx<T>], old: &[Cx<T>]) -> f64 {
    let num: T = new.iter().zip(old).fold(T::zero(), |acc, (a, b)| acc + cabs(*a - *b).powi(2));
    let den: T = new.iter().fold(T::zero(), |acc, a| acc + cabs(*a).powi(2));
    (num.sqrt() / den.sqrt().max(T::lit(f64::MIN_POSITIVE))).as_f64()
}

/// Two-sided iteration: `Vᵣ = P̂`, `Wᵣ = Q̂` from the current reduced model,
/// projected until the reduced poles stop moving. On convergence the Wilson
/// H₂-optimality conditions hold.
pub fn tsia<T: Scalar>(
    model: &StateSpaceModel<T>,
    init: &StateSpaceModel<T>,
    cfg: TsiaConfig,
) -> Result<TsiaResult<T>> {
    if cfg.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be positive".into()));
    }
    let r = init.n();
    let (a0, _) = reflect_unstable(&init.a().to_dense())?;
    let mut current = StateSpaceModel::dense(a0, init.b().clone(), init.c().clone())?;
    let mut poles = sorted_poles(&current.a().to_dense())?;
    let mut reflections = 0;
    let mut last: Option<ReducedModel<T>> = None;
    let mut change = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let pair = sylvester_pair(model, &current)?;
        let red = project_spans(model, &pair.phat, &pair.qhat, r)?;
        let ar = red.a();
        let new_poles = sorted_poles(&ar)?;
        change = relative_change(&new_poles, &poles);
        poles = new_poles;
        let (ar_stable, reflected) = reflect_unstable(&ar)?;
        if reflected {
            reflections += 1;
        }
        current = StateSpaceModel::dense(ar_stable, red.rom.b().clone(), red.rom.c().clone())?;
        let done = change <= cfg.conv_tol && !reflected;
        last = Some(red);
        if done {
            return Ok(TsiaResult {
                reduced: last.unwrap(),
                iterations: it,
                converged: true,
                pole_change: change,
                reflections,
            });
        }
    }
    Ok(TsiaResult {
        reduced: last.unwrap(),
        iterations: cfg.max_iter,
        converged: false,
        pole_change: change,
        reflections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn first_order() -> StateSpaceModel<f64> {
        StateSpaceModel::dense(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn single_point_interpolation() {
        let m = first_order();
        let one = DVector::from_element(1, cx(1.0, 0.0));
        let data = InterpolationData::from_points(&[(cx(1.0, 0.0), one.clone())], &[(cx(1.0, 0.0), one)]).unwrap();
        let red = tangential_interpolate(&m, &data).unwrap();
        assert!((red.eval_transfer(cx(1.0, 0.0)).unwrap()[(0, 0)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn conjugate_points_are_realified() {
        let d = DVector::from_row_slice(&[cx(1.0, 2.0)]);
        let (s, l) = realify(&[(cx(-1.0, -3.0), d)]).unwrap();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[-1.0, 3.0, -3.0, -1.0]));
        assert_eq!(l, DMatrix::from_row_slice(1, 2, &[1.0, -2.0]));
    }

    #[test]
    fn tsia_fixed_point_of_first_order_system() {
        let m = first_order();
        let res = tsia(&m, &m, TsiaConfig::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert!((res.reduced.a()[(0, 0)] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_data_shapes() {
        let rom = StateSpaceModel::dense(
            DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 2.0]),
            DMatrix::from_row_slice(1, 2, &[3.0, 4.0]),
        )
        .unwrap();
        let d = InterpolationData::mirror_of(&rom);
        assert_eq!(d.s_b, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -2.0, 3.0]));
        assert_eq!(d.l_b.shape(), (1, 2));
        let mut pts: Vec<f64> = d.right_points().unwrap().iter().map(|z| z.re).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((pts[0] - 1.0).abs() < 1e-14 && (pts[1] - 3.0).abs() < 1e-14);
    }
}
