use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {left:?} vs {right:?}")]
    GridMismatch {
        left: crate::GridSpec,
        right: crate::GridSpec,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("operation `{op}` does not support variant {variant}")]
    UnsupportedVariant { op: &'static str, variant: crate::Variant },
    #[error("variant sp4 only admits the trivial solution (K4(u) > 0 for every u != 0)")]
    Trivial,
    #[error("c = {c} is not below the threshold c0 = {c0}")]
    Threshold { c: f64, c0: f64 },
    #[error("no positive root: {0}")]
    NoRoot(String),
    #[error("iteration diverged: {0}")]
    Divergence(String),
    #[error("stationarity violated: multiplier {0} is not positive")]
    Stationarity(f64),
    #[error("shape precondition failed: {0}")]
    Shape(String),
    #[error("domain too short: {fraction:e} of the mass lies in the outer 10% of the grid")]
    BoundaryMass { fraction: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
