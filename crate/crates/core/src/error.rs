use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: edge references unknown node {node}")]
    DanglingNode { line: usize, node: u64 },

    #[error("line {line}: edge ({u}, {v}) has non-positive weight {weight}")]
    NonPositiveWeight { line: usize, u: u64, v: u64, weight: f64 },

    #[error(
        "line {line}: edge ({u}, {v}) weight {weight} is shorter than the straight-line distance {euclidean}"
    )]
    WeightBelowEuclidean {
        line: usize,
        u: u64,
        v: u64,
        weight: f64,
        euclidean: f64,
    },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: u64 },

    #[error("duplicate node id {0}")]
    DuplicateNode(u64),

    #[error("duplicate poi id {0}")]
    DuplicatePoi(u64),

    #[error("max fan-out must be at least 4, got {0}")]
    FanoutTooSmall(usize),

    #[error("unknown node {0}")]
    UnknownNode(u64),

    #[error("invalid trip for user {user_id}: {reason}")]
    InvalidTrip { user_id: u64, reason: String },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("user {user_id}: leg {leg} from node {from} to node {to} is disconnected")]
    DisconnectedTrip {
        user_id: u64,
        leg: usize,
        from: u32,
        to: u32,
    },

    #[error("the POI set is empty")]
    NoPois,

    #[error("no feasible meetup: every POI is unreachable for at least one user")]
    NoFeasibleMeetup,

    #[error("invalid workload: {0}")]
    InvalidWorkload(String),

    #[error("{what}: gave up after {attempts} attempts")]
    RetryExhausted { what: &'static str, attempts: usize },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
