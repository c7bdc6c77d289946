use thiserror::Error;

use crate::equilibrium::EquilibriumReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in this crate.
///
/// Indices carried by the variants are 0-based, like the rest of the API.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("too few charges for this operation: {0}")]
    InvalidCount(usize),

    #[error("charge {index} must be pinned at {expected}, found {value}")]
    EndpointNotPinned { index: usize, value: f64, expected: f64 },

    #[error("position {value} of charge {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("positions must be strictly increasing; charge {index} does not exceed its left neighbour")]
    OrderViolation { index: usize },

    #[error("charge index {index} is not an interior charge of a {n}-charge configuration")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("solver did not converge (residual {:.3e} after {} iterations)", .0.residual, .0.iterations)]
    NotConverged(Box<EquilibriumReport>),

    #[error("line search step underflowed (residual {:.3e} after {} iterations)", .0.residual, .0.iterations)]
    StepUnderflow(Box<EquilibriumReport>),

    #[error("iterate collapsed onto coincident charges after {iterations} iterations")]
    DegenerateIterate { iterations: usize },

    #[error("integrator step underflow at t = {time} while keeping charges ordered")]
    OrderingBreached { time: f64 },

    #[error("invalid dynamics setup: {0}")]
    InvalidSpec(String),

    #[error("not enough samples to average: {0}")]
    InsufficientSamples(String),

    #[error("{n} charges is not of the form 2^m + 1")]
    CountNotDyadic { n: usize },

    #[error("{n} charges (m = {m}) cannot resolve a dyadic with denominator 2^{s}")]
    ResolutionTooCoarse { n: usize, m: u32, s: u32 },

    #[error("{q}/2^{s} is not a reduced dyadic in (0, 1)")]
    InvalidDyadic { q: u64, s: u32 },

    #[error("observation point coincides with charge {index}")]
    PointOnCharge { index: usize },

    #[error("observation point lies on the needle")]
    PointOnNeedle,

    #[error("field is unbounded at the needle end x = {0}")]
    Endpoint(f64),

    #[error("argument outside the domain: {0}")]
    DomainViolation(String),

    #[error("trigamma needs a positive argument, got {0}")]
    NonpositiveArgument(f64),

    #[error("quadrature failed to reach tolerance (estimate {estimate}, error {error:.3e})")]
    QuadratureFailed { estimate: f64, error: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}
