use thiserror::Error;

#[derive(Debug, Error)]
pub enum FreeTrgError {
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] symlin::SymlinError),
    #[error("coarse-grained form violates the {block} structure (relative deviation {deviation:e})")]
    StructureViolation { block: String, deviation: f64 },
    #[error("all splitting weights at level {level} fell below zero_tol; the bond weight is degenerate")]
    DegenerateWeight { level: usize },
    #[error("invalid flow parameters: {0}")]
    InvalidParams(String),
}
