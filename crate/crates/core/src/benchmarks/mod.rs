//! Benchmark models and external model ingestion.

mod matrix_market;

pub use matrix_market::{load_matrix_market, read_matrix_market, write_matrix_market, write_model, MmFormat, MmMatrix};

use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, TridiagonalOperator};
use crate::scalar::Scalar;
use crate::system::StateSpaceModel;

/// 1-D heat equation on (0, 1) with Dirichlet ends, centered differences on
/// `n` interior points. Input at `x ≈ 1/3`, output at `x ≈ 2/3`.
pub fn heat_rod<T: Scalar>(n: usize) -> Result<StateSpaceModel<T>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("heat rod needs n >= 3, got {n}")));
    }
    let h2 = T::from_usize_lossy(n + 1).powi(2);
    let a = TridiagonalOperator::new(vec![h2; n - 1], vec![T::lit(-2.0) * h2; n], vec![h2; n - 1])?;
    let j = ((n as f64) / 3.0).round() as usize - 1;
    let k = ((2 * n) as f64 / 3.0).round() as usize - 1;
    let mut b = DMatrix::zeros(n, 1);
    b[(j, 0)] = T::from_usize_lossy(n + 1);
    let mut c = DMatrix::zeros(1, n);
    c[(0, k)] = T::one();
    StateSpaceModel::new(a, b, c)
}

fn gaussian<T: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        T::lit(x)
    })
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Seeded Hurwitz triple `(A, B, C)` with `A = M - (‖M‖₂ + 1) I` and Gaussian
/// `M`, `B`, `C` drawn from independent substreams of `seed`.
pub fn random_hurwitz<T: Scalar>(n: usize, m: usize, p: usize, seed: u64) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>) {
    let mut a = gaussian::<T>(&mut stream(seed, 0), n, n);
    let shift = spectral_norm(&a) + T::one();
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let b = gaussian(&mut stream(seed, 1), n, m);
    let c = gaussian(&mut stream(seed, 2), p, n);
    (a, b, c)
}

/// Random stable model, deterministic in `seed`.
pub fn random_stable<T: Scalar>(n: usize, m: usize, p: usize, seed: u64) -> Result<StateSpaceModel<T>> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidArgument("random_stable needs n, m, p >= 1".into()));
    }
    let (a, b, c) = random_hurwitz(n, m, p, seed);
    StateSpaceModel::dense(a, b, c)
}

/// Fourth-order modal example with a strongly controllable but weakly
/// observable pole at -100 and the reverse at -200.
pub fn illustrative4<T: Scalar>() -> StateSpaceModel<T> {
    let l = |v: &[f64]| v.iter().map(|x| T::lit(*x)).collect::<Vec<T>>();
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(l(&[-0.1, -0.2, -100.0, -200.0])));
    let b = DMatrix::from_vec(4, 1, l(&[1.0, 1.0, 1e4, 1.0]));
    let c = DMatrix::from_vec(1, 4, l(&[1.0, 1.0, 1.0, 1e4]));
    StateSpaceModel::dense(a, b, c).expect("consistent dimensions")
}

/// Declarative model description used by configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    HeatRod { n: usize },
    RandomStable { n: usize, m: usize, p: usize, seed: Option<u64> },
    Illustrative4,
    MatrixMarket { a: PathBuf, b: PathBuf, c: PathBuf },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::HeatRod { n } if *n < 3 => Err(Error::InvalidArgument(format!("heat_rod: n = {n} < 3"))),
            ModelSpec::RandomStable { n, m, p, .. } if *n == 0 || *m == 0 || *p == 0 => {
                Err(Error::InvalidArgument("random_stable: n, m, p must be >= 1".into()))
            }
            ModelSpec::MatrixMarket { a, b, c } => {
                for f in [a, b, c] {
                    if !f.is_file() {
                        return Err(Error::Io(format!("{}: no such file", f.display())));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Builds the model; `default_seed` is used when the description carries none.
    pub fn build<T: Scalar>(&self, default_seed: u64) -> Result<StateSpaceModel<T>> {
        self.validate()?;
        match self {
            ModelSpec::HeatRod { n } => heat_rod(*n),
            ModelSpec::RandomStable { n, m, p, seed } => random_stable(*n, *m, *p, seed.unwrap_or(default_seed)),
            ModelSpec::Illustrative4 => Ok(illustrative4()),
            ModelSpec::MatrixMarket { a, b, c } => load_matrix_market(a, b, c),
        }
    }

    pub fn state_dim(&self) -> Option<usize> {
        match self {
            ModelSpec::HeatRod { n } | ModelSpec::RandomStable { n, .. } => Some(*n),
            ModelSpec::Illustrative4 => Some(4),
            ModelSpec::MatrixMarket { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearOperator;

    #[test]
    fn heat_rod_small_instance() {
        let m = heat_rod::<f64>(3).unwrap();
        let a = m.a().to_dense();
        let expect = DMatrix::from_row_slice(3, 3, &[-2.0, 1.0, 0.0, 1.0, -2.0, 1.0, 0.0, 1.0, -2.0]) * 16.0;
        assert_eq!(a, expect);
        assert_eq!(m.b()[(0, 0)], 4.0);
        assert_eq!(m.c()[(0, 1)], 1.0);
        assert!(matches!(m.a(), crate::linalg::Operator::Tridiagonal(_)));
    }

    #[test]
    fn random_stable_is_deterministic_and_shaped() {
        let a = random_stable::<f64>(20, 2, 3, 7).unwrap();
        let b = random_stable::<f64>(20, 2, 3, 7).unwrap();
        assert_eq!(a.a().to_dense(), b.a().to_dense());
        assert_eq!(a.b(), b.b());
        assert_eq!(a.c(), b.c());
        assert_eq!(a.b().shape(), (20, 2));
        assert_eq!(a.c().shape(), (3, 20));
    }

    #[test]
    fn model_description_deserializes_and_rejects_unknown_keys() {
        let j: ModelSpec = serde_json::from_str(r#"{"kind":"random_stable","n":5,"m":1,"p":1,"seed":3}"#).unwrap();
        assert_eq!(j, ModelSpec::RandomStable { n: 5, m: 1, p: 1, seed: Some(3) });
        assert!(serde_json::from_str::<ModelSpec>(r#"{"kind":"heat_rod","n":5,"extra":1}"#).is_err());
        assert!(ModelSpec::HeatRod { n: 2 }.validate().is_err());
    }
}
