use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("scale factor must be strictly positive")]
    NonPositiveScale,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("state space too large to enumerate ({states} states)")]
    StateSpaceTooLarge { states: u128 },
    #[error("population lattice too large ({points} points)")]
    LatticeTooLarge { points: u128 },
    #[error("queue {queue} is absent from the multiplicity vector")]
    QueueAbsent { queue: usize },
    #[error("index has more than one distinct queue")]
    NotLeaf,
    #[error("layout does not match the model: {0}")]
    LayoutMismatch(String),
    #[error("singular recursion step at population {pop:?}")]
    SingularStep { pop: Vec<i64> },
    #[error("normalizing constant G(m, N) is zero; indices are undefined")]
    DegenerateModel,
    #[error("state probabilities require every multiplicity to be 1")]
    ReplicatedQueuesUnsupported,
    #[error("infeasible state: {0}")]
    InfeasibleState(String),
    #[error("branching factor {branching} has no closed-form cost for M = {queues}")]
    UnsupportedBranching { branching: usize, queues: usize },
    #[error("branching factor {branching} outside 1..={queues}")]
    InvalidBranching { branching: usize, queues: usize },
    #[error("missing child value for {0}")]
    MissingChildValue(String),
    #[error("constant {0} is not available from the solved basis")]
    NotInBasis(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
