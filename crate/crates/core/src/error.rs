use thiserror::Error;

use crate::geodesic::Segment;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} outside chart bounds")]
    Domain { point: Vec<f64> },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("degenerate fundamental tensor: {0}")]
    DegenerateTensor(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integration failure after {} samples: {reason}", partial.samples.len())]
    IntegrationFailure { reason: String, partial: Box<Segment> },
    #[error("velocity left the cone domain: {0}")]
    ConeExit(String),
    #[error("projection onto the cone failed: {0}")]
    ProjectionFailure(String),
    #[error("no interface crossing: {0}")]
    NoCrossing(String),
    #[error("grazing contact with the interface at s = {s}")]
    GrazingContact { s: f64 },
    #[error("incident direction is not transverse: its orthogonal hyperplane is the interface tangent space")]
    NonTransverseIncident,
    #[error("internal consistency: {0}")]
    InternalConsistency(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("no arrival: {0}")]
    NoArrival(String),
    #[error("trapped ray: {0}")]
    Trapped(String),
    #[error("at event {index}: {source}")]
    AtEvent {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Innermost error, looking through event annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtEvent { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn at_event(self, index: usize) -> Error {
        match self {
            e @ Error::AtEvent { .. } => e,
            e => Error::AtEvent {
                index,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
