use thiserror::Error;

/// Errors raised across the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("not in O({n},{m}): max deviation {deviation:.3e} exceeds {tol:.1e}")]
    NotPseudoOrthogonal {
        n: usize,
        m: usize,
        deviation: f64,
        tol: f64,
    },

    #[error("point outside chart domain of {space}: {detail}")]
    OutsideDomain { space: String, detail: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("node {node} is not spacelike (min induced-metric eigenvalue {min_eig:.3e})")]
    NotSpacelike { node: usize, min_eig: f64 },

    #[error("degenerate normal space at node {node}: condition number {condition:.3e}")]
    DegenerateNormal { node: usize, condition: f64 },

    #[error("flow halted at s = {s:.6e} after {retries} step rejections: {reason}")]
    Halted {
        s: f64,
        retries: usize,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
