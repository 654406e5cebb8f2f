use thiserror::Error;

/// Errors raised by the reduction toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hurwitz: eigenvalue with real part {re:e}")]
    NonHurwitz { re: f64 },

    #[error("Lyapunov/Sylvester operator is singular: eigenvalue sum {gap:e} is numerically zero")]
    SingularSeparation { gap: f64 },

    #[error("spectra of A and -M overlap near shift {shift_re:e}{shift_im:+e}i")]
    SpectrumOverlap { shift_re: f64, shift_im: f64 },

    #[error("shifted solve failed at s = {shift_re:e}{shift_im:+e}i")]
    ShiftSolveFailure { shift_re: f64, shift_im: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("repeated poles: minimum eigenvalue gap {gap:e} below threshold")]
    RepeatedPoles { gap: f64 },

    #[error("projection is singular: cond(W^T V) = {cond:e}")]
    SingularProjection { cond: f64 },

    #[error("singular values {index} and {next} are tied (gap {gap:e}); truncation is ill-defined")]
    SingularValueTie { index: usize, next: usize, gap: f64 },

    #[error("requested order {requested} exceeds numerical rank {available}")]
    RankDeficient { requested: usize, available: usize },

    #[error("interim reduced model could not be stabilized")]
    InterimUnstable,

    #[error("dense computation infeasible: n = {n} exceeds cap {cap}")]
    DenseInfeasible { n: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("decomposition did not converge: {0}")]
    NoConvergence(&'static str),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
