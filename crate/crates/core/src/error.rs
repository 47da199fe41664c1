use thiserror::Error;

use crate::walk::TransferReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    IndexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("edge {{{u}, {v}}} has non-positive weight {w}")]
    NonPositiveWeight { u: usize, v: usize, w: f64 },
    #[error("vertices must be distinct, got {0} twice")]
    EqualVertices(usize),
    #[error(
        "eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },
    #[error("vertices {0} and {1} are not twins")]
    TwinViolation(usize, usize),
    #[error("connection set is not closed under negation mod {n}: {s} present, {neg} missing")]
    AsymmetricSet { n: u64, s: u64, neg: u64 },
    #[error("connection set contains 0")]
    ContainsZero,
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),
    #[error("{d} is not a proper divisor of {n}")]
    NotProperDivisor { n: u64, d: u64 },
    #[error("modulus {0} is odd")]
    OddModulus(u64),
    #[error("matching edges are not pairwise disjoint (vertex {0} repeated)")]
    NotDisjoint(usize),
    #[error("graph size {0} is not a multiple of 4")]
    SizeNotMultipleOf4(usize),
    #[error("graph is not Laplacian integral")]
    NotIntegral,
    #[error("vertices {0} and {1} are not twins")]
    NotTwins(usize, usize),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("expected witness #{index} failed: {report}")]
    WitnessFailed {
        index: usize,
        report: Box<TransferReport>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
