use thiserror::Error;

use crate::fielddsl::Smoothness;
use crate::fielddsl::{EvalError, ParseError};
use crate::hgroup::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dilation factor must be non-negative, got {0}")]
    NegativeDilation(f64),

    #[error("{point} is not in the horizontal plane of {base} (offset {offset:e})")]
    NotInPlane { base: Point, point: Point, offset: f64 },

    #[error("parallel planes: {0} and {1} share the same horizontal projection")]
    ParallelPlanes(Point, Point),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("evaluation failed at {at}: {source}")]
    Eval { at: Point, source: EvalError },

    #[error("nonsmooth point {0}: derivative undefined")]
    NonsmoothPoint(Point),

    #[error("operation requires a {required} field, got {found}")]
    Smoothness { required: Smoothness, found: Smoothness },

    #[error("limit did not converge: {0}")]
    Divergent(String),

    #[error("half-plane intersection is empty (input is not convex at this point)")]
    EmptyIntersection,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no convergence after N = {0}")]
    NoConvergence(usize),

    #[error("chain invariant violated at node {index}: {reason}")]
    ChainInvariant { index: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn eval(at: Point, source: EvalError) -> Self {
        Error::Eval { at, source }
    }
}
