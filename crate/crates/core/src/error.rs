use thiserror::Error;

use crate::routing::PassengerId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no capacity-feasible insertion for passenger {0}")]
    InfeasibleInsertion(PassengerId),
    #[error("passenger {0} has no pending pickup in the route")]
    NotInRoute(PassengerId),
    #[error("passenger {0} is already present in the route")]
    DuplicatePassenger(PassengerId),
    #[error("choice index {index} out of range for {len} alternatives")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("state has no pending request")]
    NoPendingRequest,
    #[error("a request is already pending")]
    RequestAlreadyPending,
    #[error("request issued at {issue_time} min but state is at {state_time} min")]
    TimeMismatch { issue_time: f64, state_time: f64 },
    #[error("horizon {0} too large for exhaustive enumeration (max 4)")]
    HorizonTooLarge(usize),
    #[error("lookahead {lookahead} outside [0, {horizon}]")]
    LookaheadOutOfRange { lookahead: usize, horizon: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
