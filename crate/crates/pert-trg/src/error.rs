use free_trg::FreeTrgError;
use thiserror::Error;
use wick::WickError;

#[derive(Debug, Error)]
pub enum PertTrgError {
    /// Requested feature lies outside the first-order quartic closure.
    #[error("unsupported at first order: {0}")]
    Unsupported(String),

    /// The factored-phase arithmetic drifted from the explicit complex
    /// evaluation: an imaginary residue survived, or the real parts disagree.
    #[error(
        "phase bookkeeping failure: {kind} residual {residual:e} exceeds {tol:e} x scale {scale:e}"
    )]
    PhaseBookkeeping {
        kind: &'static str,
        residual: f64,
        tol: f64,
        scale: f64,
    },

    /// A derivative-carrier block was presented for consumption more than one
    /// coarse-graining step after its creation.
    #[error(
        "odd-carrier lifetime violation: block born at level {born_level} \
         consumed at level {consume_level} (must be exactly one step later)"
    )]
    OddLifetime {
        born_level: usize,
        consume_level: usize,
    },

    /// The index space of a tensor does not carry the block layout the
    /// operation requires.
    #[error("invalid index space: {0}")]
    InvalidSpace(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Free(#[from] FreeTrgError),

    #[error(transparent)]
    Wick(#[from] WickError),
}

impl From<symlin::SymlinError> for PertTrgError {
    fn from(e: symlin::SymlinError) -> Self {
        PertTrgError::Free(FreeTrgError::from(e))
    }
}
