use crate::eigensolve::EigenResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error(
        "Lanczos did not converge after {iterations} iterations (best value {}, residual {:e})",
        best.value,
        best.residual
    )]
    NotConverged {
        iterations: usize,
        best: Box<EigenResult>,
    },

    #[error("start vector has no weight in the requested parity sector; resample the seed")]
    EmptySectorProjection,

    #[error("dense diagonalization limited to dimension {limit}, got {dim}")]
    DenseTooLarge { dim: usize, limit: usize },

    #[error("ground-state overlap vanished at J = {j} (sector mismatch or level crossing)")]
    ZeroFidelity { j: f64 },

    #[error("fidelity susceptibility peak sits on the window edge at J = {j} (window [{lo}, {hi}])")]
    PeakAtEdge { j: f64, lo: f64, hi: f64 },

    #[error("rescaled curves share no common range of the scaling variable")]
    EmptyOverlap,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
