use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("norm is not regular elliptic: min(gamma + gamma'') = {min:.6e} at theta = {theta:.6}")]
    EllipticityViolation { min: f64, theta: f64 },

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("sampled norm needs at least {min} samples on a power-of-two grid, got {got}")]
    Resolution { got: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid specs differ: {0}")]
    SpecMismatch(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("signed distance is undefined for an empty or full set")]
    UndefinedDistance,

    #[error("the step {step} minimizer is the empty set; the volume penalty 1/sqrt(h) is too weak for a set this small, decrease h")]
    Vanished { step: usize },

    #[error("stencil of order {order} reproduces the norm only to {max_error:.4} relative error (bound {bound:.4})")]
    StencilInsufficient { order: usize, max_error: f64, bound: f64 },

    #[error("max-flow solver failed on {nodes} nodes / {arcs} arcs: {reason}")]
    Solver { nodes: usize, arcs: usize, reason: String },

    #[error("set has no boundary contour")]
    NoContour,

    #[error("contour degenerate: {0}")]
    Degenerate(String),

    #[error("perturbation is not a normal graph: {0}")]
    SmallnessViolation(String),

    #[error("rate-fit window: {0}")]
    Window(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
