//! Dense kernels and structured Lyapunov/Sylvester solvers.

mod banded;
pub(crate) mod basis;
pub mod factor;
pub mod lyapunov;
pub mod operator;
pub mod schur;
pub mod sylvester;

pub use factor::{
    max_principal_angle, ordered_svd, orthonormal_extend, orthonormalize, psd_factor, singular_values, spectral_norm,
    spectral_norm_sym, sym_eig_desc, OrderedSvd, SpdFactor,
};
pub use lyapunov::{solve_lyapunov_dense, LyapunovSolver};
pub use operator::{DenseOperator, LinearOperator, Operator, Transposed, TridiagonalOperator};
pub use schur::RealSchur;
pub use sylvester::solve_sylvester_skinny;
