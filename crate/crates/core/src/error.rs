use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function (e.g. negative flow).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are inconsistent with each other or reference unknown ids.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("trip {trip} ({origin} -> {destination}) is unreachable{}", level_suffix(*.level))]
    Unreachable {
        trip: usize,
        origin: usize,
        destination: usize,
        level: Option<usize>,
    },

    #[error("degenerate objective: every mode weight is zero")]
    DegenerateObjective,

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("missing isochrone for node {node}, mode {mode}")]
    MissingIsochrone { node: usize, mode: String },

    /// Input text could not be parsed; the message carries the location.
    #[error("parse error: {0}")]
    Parse(String),
}

fn level_suffix(level: Option<usize>) -> String {
    match level {
        Some(l) => format!(" for non-compliant level {l}"),
        None => String::new(),
    }
}
