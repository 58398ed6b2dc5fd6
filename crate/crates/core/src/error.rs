use crate::complex::{BandId, ComponentId};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("band {band}: {message}")]
    InvalidBand { band: BandId, message: String },
    #[error("component {component}: {message}")]
    InvalidComponent {
        component: ComponentId,
        message: String,
    },
    #[error("unknown band {0}")]
    UnknownBand(BandId),
    #[error("unknown component {0}")]
    UnknownComponent(ComponentId),
    #[error("interval is not a free arc")]
    NotAFreeArc,
    #[error("value {value} outside [0, {bound}]")]
    OutOfRange { value: String, bound: String },
    #[error("{at} is not a splitting point of component {component}")]
    NotASplittingPoint { component: ComponentId, at: String },
    #[error("point {at} is not in the support")]
    PointOutsideSupport { at: String },
    #[error("ladder radius {ladder} must be smaller than ball radius {radius}")]
    RadiusTooSmall { ladder: usize, radius: usize },
    #[error("budget of {budget} exhausted")]
    BudgetExceeded { budget: usize },
    #[error("parameter must be positive: {0}")]
    NonPositiveParameter(String),
    #[error("invalid widths: {0}")]
    InvalidWidths(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("not self-similar: {0}")]
    NotSelfSimilar(String),
    #[error("search exhausted after {states} states")]
    SearchExhausted { states: usize },
    #[error("invalid arc: {0}")]
    InvalidArc(String),
}

pub type Result<T> = std::result::Result<T, Error>;
