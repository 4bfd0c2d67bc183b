use thiserror::Error;

/// Broad category of an [`Error`], used to map failures onto process exit
/// codes by front ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: unknown names, malformed parameters, shape mismatches.
    Config,
    /// The geometry is singular at the requested point or direction.
    Degeneracy,
    /// The profile ODE could not be integrated.
    Solver,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} is not supported (need n >= 3)")]
    Dimension(usize),
    #[error("expected {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("tensor rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("point {coords:?} lies outside the valid region of chart `{chart}`")]
    OutsideChart { chart: String, coords: Vec<f64> },
    #[error("non-finite coordinates {0:?}")]
    NonFinite(Vec<f64>),
    #[error("jet order {requested} exceeds supported order {max}")]
    JetOrder { requested: usize, max: usize },
    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: String },
    #[error("the zero vector cannot be used as a direction")]
    ZeroDirection,
    #[error("finite-difference step {0:e} is below the underflow limit 1e-10")]
    StepUnderflow(f64),
    #[error("finite-difference multi-index of order {0} exceeds 3")]
    MultiIndexOrder(usize),
    #[error("s = {s} lies outside the profile domain ({lo}, {hi})")]
    OutsideDomain { s: f64, lo: f64, hi: f64 },
    #[error("Q has a pole at s = {s} (phi - s phi' = 0)")]
    QPole { s: f64 },
    #[error("Delta = 1 + sQ + (b^2 - s^2)Q' vanishes at s = {s}")]
    DeltaDegenerate { s: f64 },
    #[error("condition (b)/(c) residual {residual:e} is too large for the reduced H-trace formula")]
    NotApplicable { residual: f64 },
    #[error("ODE coefficient vanishes at s = {s} (s^2 = b^2)")]
    EndpointSingularity { s: f64 },
    #[error("ODE pole 1 + sQ = 0 at s = {s}")]
    OdePole { s: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
    #[error("solution interval [{lo}, {hi}] is too short")]
    IntervalTooShort { lo: f64, hi: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Dimension(_) | Shape { .. } | RankMismatch { .. } | NonFinite(_) | JetOrder { .. }
            | StepUnderflow(_) | MultiIndexOrder(_) | InvalidParams(_) | Unknown { .. } | OutsideChart { .. } => {
                ErrorKind::Config
            }
            NotPositiveDefinite { .. } | ZeroDirection | OutsideDomain { .. } | QPole { .. }
            | DeltaDegenerate { .. } | NotApplicable { .. } => ErrorKind::Degeneracy,
            EndpointSingularity { .. } | OdePole { .. } | IntervalTooShort { .. } => ErrorKind::Solver,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
