use thiserror::Error;

use crate::ids::{ProcessId, ProcessSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("process {0} declares an empty quorum")]
    EmptyQuorum(ProcessId),
    #[error("well-behaved active process {0} has no quorums")]
    EmptyDeclaration(ProcessId),
    #[error("quorum {quorum} of process {owner} has member {member} outside the universe")]
    UnknownMember {
        owner: ProcessId,
        quorum: ProcessSet,
        member: ProcessId,
    },
    #[error("unknown process {0}")]
    UnknownProcess(ProcessId),
    #[error("byzantine set {0} is not contained in the universe")]
    ByzantineOutsideUniverse(ProcessSet),
    #[error("{0} is not a subset of the well-behaved processes")]
    BadSubset(ProcessSet),
    #[error("{size} well-behaved processes exceed the enumeration bound {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("precondition not verified: {0}")]
    PreconditionNotVerified(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
