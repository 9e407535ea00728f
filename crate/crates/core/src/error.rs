use thiserror::Error;

/// Errors raised by the learning machinery and its persistence formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("action component {index} = {value} lies outside [-1, 1]")]
    ActionOutOfRange { index: usize, value: f64 },
    #[error("action has {0} components, expected 24")]
    ActionDimension(usize),
    #[error("task point has a non-finite coordinate")]
    NonFinitePoint,
    #[error("competence threshold must be negative, got {0}")]
    InvalidThreshold(f64),
    #[error("query on an empty episodic memory")]
    EmptyMemory,
    #[error("variance of an empty episode set")]
    EmptySet,
    #[error("goal ({0}, {1}) lies outside the task bounds")]
    GoalOutOfBounds(f64, f64),
    #[error("region is not splittable: {0}")]
    SplitPrecondition(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("only {found} feasible teaching cells, {wanted} required")]
    TeachingSetInfeasible { found: usize, wanted: usize },
    #[error("reachable-set estimate is empty")]
    EmptyReachable,
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
