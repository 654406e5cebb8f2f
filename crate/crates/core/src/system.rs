//! LTI state-space models `H(s) = C (sI - A)⁻¹ B`, their Gramians, Hankel
//! singular values and pole-residue form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{psd_factor, singular_values, DenseOperator, LinearOperator, LyapunovSolver, Operator, RealSchur};
use crate::scalar::{cabs, cx_re, Cx, Scalar};

/// Largest state dimension for which dense `n×n` work (Gramians, eigenvalues)
/// is attempted by default.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// Realization `(A, B, C)` with `n` states, `m` inputs and `p` outputs.
#[derive(Clone, Debug)]
pub struct StateSpaceModel<T: Scalar> {
    a: Operator<T>,
    b: DMatrix<T>,
    c: DMatrix<T>,
}

/// Controllability (`p`) and observability (`q`) Gramians.
#[derive(Clone, Debug)]
pub struct GramianPair<T: Scalar> {
    pub p: DMatrix<T>,
    pub q: DMatrix<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SvKind {
    GramianSingular,
    Hankel,
}

/// Descending list of singular values, optionally with per-iteration snapshots.
#[derive(Clone, Debug)]
pub struct SvReport<T: Scalar> {
    pub values: Vec<T>,
    pub kind: SvKind,
    pub history: Vec<Vec<T>>,
}

impl<T: Scalar> SvReport<T> {
    pub fn new(mut values: Vec<T>, kind: SvKind) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Self { values, kind, history: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `H(s) = Σ lᵢ rᵢ* / (s - λᵢ)`.
#[derive(Clone, Debug)]
pub struct PoleResidue<T: Scalar> {
    pub poles: Vec<Cx<T>>,
    /// Output factors `lᵢ` (p-vectors).
    pub left: Vec<DVector<Cx<T>>>,
    /// Input factors `rᵢ` (m-vectors); the residue is `lᵢ rᵢ*`.
    pub right: Vec<DVector<Cx<T>>>,
}

impl<T: Scalar> PoleResidue<T> {
    pub fn eval(&self, s: Cx<T>) -> DMatrix<Cx<T>> {
        let p = self.left[0].len();
        let m = self.right[0].len();
        let mut h = DMatrix::zeros(p, m);
        for ((lam, l), r) in self.poles.iter().zip(&self.left).zip(&self.right) {
            h += l * r.adjoint() / (s - lam);
        }
        h
    }

    /// Residue matrix `lᵢ rᵢ*`.
    pub fn residue(&self, i: usize) -> DMatrix<Cx<T>> {
        &self.left[i] * self.right[i].adjoint()
    }
}

impl<T: Scalar> StateSpaceModel<T> {
    pub fn new(a: impl Into<Operator<T>>, b: DMatrix<T>, c: DMatrix<T>) -> Result<Self> {
        let a = a.into();
        let n = a.dim();
        if n == 0 || b.ncols() == 0 || c.nrows() == 0 {
            return Err(Error::EmptyInput("model needs n, m, p >= 1"));
        }
        if b.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {n}x{n}, B is {}x{}, C is {}x{}",
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        if b.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in B or C".into()));
        }
        Ok(Self { a, b, c })
    }

    /// Convenience constructor for a fully dense realization.
    pub fn dense(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        Self::new(Operator::Dense(DenseOperator::new(a)), b, c)
    }

    pub fn n(&self) -> usize {
        self.a.dim()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn a(&self) -> &Operator<T> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<T> {
        &self.c
    }

    /// Dual realization `(Aᵀ, Cᵀ, Bᵀ)`.
    pub fn dual(&self) -> Self {
        Self { a: self.a.transposed(), b: self.c.transpose(), c: self.b.transpose() }
    }

    /// Similarity transform `(T⁻¹AT, T⁻¹B, CT)`; densifies `A`.
    pub fn similarity(&self, t: &DMatrix<T>) -> Result<Self> {
        let n = self.n();
        if t.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("transform is {}x{}", t.nrows(), t.ncols())));
        }
        let lu = t.clone().lu();
        let a = self.a.to_dense();
        let ainv_t = lu.solve(&(a * t)).ok_or(Error::SingularProjection { cond: f64::INFINITY })?;
        let b = lu.solve(&self.b).ok_or(Error::SingularProjection { cond: f64::INFINITY })?;
        Self::dense(ainv_t, b, &self.c * t)
    }

    fn check_dense(&self, cap: usize) -> Result<()> {
        if self.n() > cap {
            return Err(Error::DenseInfeasible { n: self.n(), cap });
        }
        Ok(())
    }

    /// `(A - sI)⁻¹ B`
    fn resolvent_b(&self, s: Cx<T>) -> Result<DMatrix<Cx<T>>> {
        self.a.shifted_solve(s, &self.b.map(cx_re))
    }

    /// Transfer matrix `H(s)` (p×m), via a shifted solve.
    pub fn eval_transfer(&self, s: Cx<T>) -> Result<DMatrix<Cx<T>>> {
        let x = self.resolvent_b(s)?;
        Ok(-(self.c.map(cx_re) * x))
    }

    /// Derivative `H'(s) = -C (sI - A)⁻² B`, via two shifted solves.
    pub fn eval_transfer_derivative(&self, s: Cx<T>) -> Result<DMatrix<Cx<T>>> {
        let x1 = self.resolvent_b(s)?;
        let x2 = self.a.shifted_solve(s, &x1)?;
        Ok(-(self.c.map(cx_re) * x2))
    }

    /// Eigenvalues of `A` (dense path).
    pub fn poles(&self) -> Result<Vec<Cx<T>>> {
        self.check_dense(DEFAULT_DENSE_CAP)?;
        Ok(RealSchur::new(&self.a.to_dense())?.eigenvalues())
    }

    /// True iff every eigenvalue of `A` lies in the open left half-plane.
    pub fn is_hurwitz(&self) -> bool {
        match &self.a {
            Operator::Tridiagonal(t) if t.is_symmetric() => {
                // A symmetric: Hurwitz iff -A is positive definite (LDLᵀ pivots)
                let d = t.diag();
                let off = t.lower();
                let mut piv = -d[0];
                if piv <= T::zero() {
                    return false;
                }
                for i in 1..d.len() {
                    piv = -d[i] - off[i - 1] * off[i - 1] / piv;
                    if piv <= T::zero() {
                        return false;
                    }
                }
                true
            }
            Operator::Tridiagonal(t) if self.n() > DEFAULT_DENSE_CAP => {
                let d = t.diag();
                let (lo, up) = (t.lower(), t.upper());
                if lo.iter().zip(up).all(|(l, u)| *l * *u > T::zero()) {
                    // diagonally similar to a symmetric tridiagonal matrix
                    let sym: Vec<T> = lo.iter().zip(up).map(|(l, u)| (*l * *u).sqrt()).collect();
                    let mut piv = -d[0];
                    if piv <= T::zero() {
                        return false;
                    }
                    for i in 1..d.len() {
                        piv = -d[i] - sym[i - 1] * sym[i - 1] / piv;
                        if piv <= T::zero() {
                            return false;
                        }
                    }
                    return true;
                }
                // Gershgorin: sufficient only
                (0..d.len()).all(|i| {
                    let mut radius = T::zero();
                    if i > 0 {
                        radius += lo[i - 1].abs();
                    }
                    if i + 1 < d.len() {
                        radius += up[i].abs();
                    }
                    d[i] + radius < T::zero()
                })
            }
            _ => match RealSchur::new(&self.a.to_dense()) {
                Ok(s) => s.eigenvalues().iter().all(|l| l.re < T::zero()),
                Err(_) => false,
            },
        }
    }

    /// Dense Gramians, refusing when `n` exceeds [`DEFAULT_DENSE_CAP`].
    pub fn gramians_dense(&self) -> Result<GramianPair<T>> {
        self.gramians_dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn gramians_dense_capped(&self, cap: usize) -> Result<GramianPair<T>> {
        self.check_dense(cap)?;
        let solver = LyapunovSolver::new(&self.a.to_dense())?;
        let p = solver.solve(&(&self.b * self.b.transpose()))?;
        let q = solver.solve_transposed(&(self.c.transpose() * &self.c))?;
        Ok(GramianPair { p, q })
    }

    /// Hankel singular values from the SVD of `L_qᵀ L_p`, padded with zeros to length `n`.
    pub fn hankel_singular_values(&self) -> Result<SvReport<T>> {
        let g = self.gramians_dense()?;
        hankel_from_gramians(&g, self.n())
    }

    /// Pole-residue form; requires simple poles.
    pub fn pole_residue(&self) -> Result<PoleResidue<T>> {
        self.check_dense(DEFAULT_DENSE_CAP)?;
        let a = self.a.to_dense();
        let n = a.nrows();
        let lambdas = RealSchur::new(&a)?.eigenvalues();
        let rho = lambdas.iter().fold(T::zero(), |m, l| m.max(cabs(*l)));
        let mut gap = T::max_value().unwrap_or_else(T::one);
        for i in 0..n {
            for j in (i + 1)..n {
                gap = gap.min(cabs(lambdas[i] - lambdas[j]));
            }
        }
        if n > 1 && gap <= T::lit(1e-10) * rho {
            return Err(Error::RepeatedPoles { gap: gap.as_f64() });
        }
        let op = DenseOperator::new(a);
        let mut x = DMatrix::<Cx<T>>::zeros(n, n);
        let mut k = 0;
        while k < n {
            let lam = lambdas[k];
            let v = eigenvector_by_inverse_iteration(&op, lam, rho)?;
            x.set_column(k, &v);
            if lam.im > T::zero() && k + 1 < n {
                x.set_column(k + 1, &v.map(|z| z.conj()));
                k += 2;
            } else {
                k += 1;
            }
        }
        let xinv = x.clone().try_inverse().ok_or(Error::RepeatedPoles { gap: gap.as_f64() })?;
        let cx_ = self.c.map(cx_re) * &x;
        let xb = xinv * self.b.map(cx_re);
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        let mut k = 0;
        while k < n {
            let l: DVector<Cx<T>> = cx_.column(k).into_owned();
            let r: DVector<Cx<T>> = xb.row(k).adjoint();
            if lambdas[k].im > T::zero() && k + 1 < n {
                left.push(l.clone());
                right.push(r.clone());
                left.push(l.map(|z| z.conj()));
                right.push(r.map(|z| z.conj()));
                k += 2;
            } else {
                left.push(l);
                right.push(r);
                k += 1;
            }
        }
        Ok(PoleResidue { poles: lambdas, left, right })
    }
}

fn eigenvector_by_inverse_iteration<T: Scalar>(op: &DenseOperator<T>, lam: Cx<T>, rho: T) -> Result<DVector<Cx<T>>> {
    let n = op.dim();
    let scale = rho.max(T::one());
    let mut delta = T::lit(1e-13) * scale;
    for _ in 0..6 {
        let mu = lam + Cx::new(delta, delta);
        let mut v = DMatrix::<Cx<T>>::from_fn(n, 1, |i, _| {
            Cx::new(T::one() + T::lit(0.1) * T::from_usize_lossy(i % 7), T::lit(0.01) * T::from_usize_lossy(i % 3))
        });
        let mut ok = true;
        for _ in 0..3 {
            match op.shifted_solve(mu, &v) {
                Ok(w) => {
                    let nw = w.norm();
                    v = w / cx_re(nw);
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(v.column(0).into_owned());
        }
        delta *= T::lit(100.0);
    }
    Err(Error::ShiftSolveFailure { shift_re: lam.re.as_f64(), shift_im: lam.im.as_f64() })
}

/// Hankel singular values from a Gramian pair, padded with zeros to `n`.
pub fn hankel_from_gramians<T: Scalar>(g: &GramianPair<T>, n: usize) -> Result<SvReport<T>> {
    let lp = psd_factor(&g.p)?;
    let lq = psd_factor(&g.q)?;
    let mut values = singular_values(&(lq.z.tr_mul(&lp.z)));
    values.resize(n, T::zero());
    Ok(SvReport::new(values, SvKind::Hankel))
}
