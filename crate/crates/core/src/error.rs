use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid {model} point: {reason}")]
    InvalidPoint { model: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("graph is not spacelike: max |grad u| = {max_gradient} exceeds {limit} at node {node}")]
    NotSpacelike {
        node: usize,
        max_gradient: f64,
        limit: f64,
    },

    #[error("Gauss image leaves the horoball at node {node}: B(f) - g = {gap}")]
    HoroballViolation { node: usize, gap: f64 },

    #[error("degenerate normal frame at node {node}: mean curvature vector vanishes")]
    DegenerateFrame { node: usize },

    #[error("intrinsic ball of radius {radius} around node {center} reaches the domain boundary")]
    DomainTooSmall { center: usize, radius: f64 },

    #[error("linear solver failed: {0}")]
    LinearSolver(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
