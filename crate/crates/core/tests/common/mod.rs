#![allow(dead_code)]

pub mod sweeps;

use balred::{Cx, Model};
use nalgebra::{DMatrix, DVector, Dim, Matrix, Storage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Hurwitz matrix with eigenvalues spread over several decades.
pub fn spread_hurwitz(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let q = gaussian(rng, n, n).qr().q();
    let t = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -(10f64.powf(-1.0 + 3.0 * i as f64 / n.max(2) as f64))
        } else if j > i {
            let z: f64 = StandardNormal.sample(rng);
            0.3 * z
        } else {
            0.0
        }
    });
    &q * t * q.transpose()
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// `AX + XMᵀ + F = 0` via `(I ⊗ A + M ⊗ I) vec X = -vec F`.
pub fn kronecker_sylvester(a: &DMatrix<f64>, m: &DMatrix<f64>, f: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, r) = (a.nrows(), m.nrows());
    let op = kron(&DMatrix::identity(r, r), a) + kron(m, &DMatrix::identity(n, n));
    let x = op.lu().solve(&(-vec_of(f))).expect("nonsingular Kronecker system");
    DMatrix::from_column_slice(n, r, x.as_slice())
}

/// `AP + PAᵀ + G = 0` via the Kronecker sum.
pub fn kronecker_lyapunov(a: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    kronecker_sylvester(a, a, g)
}

pub fn rel_diff(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (x - y).norm() / x.norm().max(y.norm()).max(f64::MIN_POSITIVE)
}

pub fn rel_diff_c<R: Dim, C: Dim, S1: Storage<Cx<f64>, R, C>, S2: Storage<Cx<f64>, R, C>>(
    x: &Matrix<Cx<f64>, R, C, S1>,
    y: &Matrix<Cx<f64>, R, C, S2>,
) -> f64 {
    let num: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    num.sqrt() / x.norm().max(y.norm()).max(f64::MIN_POSITIVE)
}

/// Largest relative transfer mismatch over the given imaginary-axis points.
pub fn transfer_mismatch(a: &Model, b: &Model, omegas: &[f64]) -> f64 {
    omegas
        .iter()
        .map(|w| {
            let s = Cx::new(0.0, *w);
            rel_diff_c(&a.eval_transfer(s).unwrap(), &b.eval_transfer(s).unwrap())
        })
        .fold(0.0, f64::max)
}

pub const FIVE_FREQUENCIES: [f64; 5] = [0.0, 0.3, 3.0, 30.0, 300.0];

/// Relative defects of the bi-tangential Hermite conditions at the mirror
/// images of the poles of `rom`: right, left and derivative conditions.
pub fn hermite_defects(model: &Model, rom: &Model) -> (f64, f64, f64) {
    let pr = rom.pole_residue().unwrap();
    let (mut right, mut left, mut deriv) = (0f64, 0f64, 0f64);
    for i in 0..pr.poles.len() {
        let s = -pr.poles[i];
        let b = pr.right[i].conjugate();
        let l = pr.left[i].transpose();
        let (h, hr) = (model.eval_transfer(s).unwrap(), rom.eval_transfer(s).unwrap());
        let (d, dr) = (model.eval_transfer_derivative(s).unwrap(), rom.eval_transfer_derivative(s).unwrap());
        right = right.max(rel_diff_c(&(&h * &b), &(&hr * &b)));
        left = left.max(rel_diff_c(&(&l * &h), &(&l * &hr)));
        deriv = deriv.max(rel_diff_c(&(&l * &d * &b), &(&l * &dr * &b)));
    }
    (right, left, deriv)
}
