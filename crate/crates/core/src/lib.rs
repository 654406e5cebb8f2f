//! Model-order reduction by balanced truncation and tangential interpolation.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the benchmarks, metrics and
//! the command-line runner use.
//!
//! - [`linalg`]: Lyapunov/Sylvester solvers, orthonormal bases, structured operators.
//! - [`system`]: state-space models, Gramians, Hankel singular values.
//! - [`reducers`]: square-root balanced truncation, tangential interpolation, TSIA.
//! - [`alrs`]: adaptive low-rank Lyapunov solver.
//! - [`atia`]: adaptive tangential-interpolation balanced truncation.
//! - [`benchmarks`]: model generators and Matrix Market I/O.
//! - [`metrics`]: Gramian, PQ-product and sampled H∞ errors.

pub mod alrs;
pub mod atia;
pub mod benchmarks;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod reducers;
pub mod scalar;
pub mod system;

pub use alrs::{alrs_lyap, AlrsConfig, AlrsResult, LowRankGramian};
pub use atia::{atia_bt, atia_hsv_compare, AtiaConfig, AtiaResult, HsvComparison};
pub use benchmarks::ModelSpec;
pub use error::{Error, Result};
pub use reducers::ReducedModel;
pub use scalar::{Cx, Scalar};
pub use system::{StateSpaceModel, SvKind, SvReport};

pub type Model = StateSpaceModel<f64>;
pub type ModelF32 = StateSpaceModel<f32>;
pub type Reduced = ReducedModel<f64>;
pub type Complex64 = Cx<f64>;
pub type LowRankGramian64 = LowRankGramian<f64>;
pub type AlrsOutput = AlrsResult<f64>;
pub type AtiaOutput = AtiaResult<f64>;
