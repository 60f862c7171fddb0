//! Error definitions shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, RieffError>;

#[derive(Debug, Error)]
pub enum RieffError {
    #[error("state ({u1}, {u2}) lies outside the saturation triangle")]
    Domain { u1: f64, u2: f64 },

    #[error("{0}")]
    Parameter(String),

    #[error("hyperbolicity lost at ({u1}, {u2}): discriminant {discriminant:.3e}")]
    HyperbolicityLoss { u1: f64, u2: f64, discriminant: f64 },

    #[error("states coincide within {tol:.1e}; shock speed undefined")]
    CoincidentStates { tol: f64 },

    #[error("reference ({u1}, {u2}) is not strictly hyperbolic")]
    StartDegenerate { u1: f64, u2: f64 },

    #[error("Newton corrector diverged at step {step} (residual {residual:.3e})")]
    NewtonDivergence { step: usize, residual: f64 },

    #[error("start state sits on the inflection manifold (|grad lambda . r| = {value:.3e})")]
    StartAtInflection { value: f64 },

    #[error("segment did not stop at an inflection (stopped: {reason})")]
    NotAnInflectionStop { reason: String },

    #[error("coordinate is not monotone along the curve: sample {index} has ell {ell}")]
    NonMonotoneCoordinate { index: usize, ell: f64 },

    #[error("tangency function keeps one sign over the search interval")]
    NoTangency,

    #[error("wave curves do not cross inside the domain")]
    NoIntersection,

    #[error("quadrature Richardson check failed: estimate {estimate:.3e} exceeds {tol:.1e}")]
    QuadratureCheck { estimate: f64, tol: f64 },

    #[error("CFL bound blown: max wave speed {a_max:.3e} at step {step}")]
    CflViolation { a_max: f64, step: usize },

    #[error("piece {index}: {source}")]
    Piece {
        index: usize,
        #[source]
        source: Box<RieffError>,
    },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RieffError {
    /// Short stable name used in JSON summaries and FFI status codes.
    pub fn name(&self) -> &'static str {
        match self {
            RieffError::Domain { .. } => "DomainError",
            RieffError::Parameter(_) => "ParameterError",
            RieffError::HyperbolicityLoss { .. } => "HyperbolicityLoss",
            RieffError::CoincidentStates { .. } => "CoincidentStates",
            RieffError::StartDegenerate { .. } => "StartDegenerate",
            RieffError::NewtonDivergence { .. } => "NewtonDivergence",
            RieffError::StartAtInflection { .. } => "StartAtInflection",
            RieffError::NotAnInflectionStop { .. } => "NotAnInflectionStop",
            RieffError::NonMonotoneCoordinate { .. } => "NonMonotoneCoordinate",
            RieffError::NoTangency => "NoTangency",
            RieffError::NoIntersection => "NoIntersection",
            RieffError::QuadratureCheck { .. } => "QuadratureCheck",
            RieffError::CflViolation { .. } => "CFLViolation",
            RieffError::Piece { source, .. } => source.name(),
            RieffError::Config(_) => "ConfigError",
            RieffError::Io(_) => "IoError",
        }
    }

    pub(crate) fn in_piece(self, index: usize) -> RieffError {
        RieffError::Piece {
            index,
            source: Box::new(self),
        }
    }
}
