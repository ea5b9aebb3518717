use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{operation} requires the {required} broadcast-range model")]
    UnsupportedRangeModel {
        operation: &'static str,
        required: &'static str,
    },

    #[error("expectation is not finite: {0}")]
    UndefinedExpectation(&'static str),

    #[error("evaluation grid is empty")]
    EmptyGrid,

    #[error("evaluation grid must be strictly increasing (index {index})")]
    NonIncreasingGrid { index: usize },

    #[error("empirical distribution has no samples")]
    EmptyDistribution,

    #[error("not enough samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },

    #[error("uncertainty measure has a zero denominator (all observed values equal)")]
    DegenerateDenominator,

    #[error("sampling would not terminate: {0}")]
    NonTerminating(&'static str),

    #[error(
        "collision in direction {direction} lane {lane} at t = {time:.2} s: vehicle {follower} \
         overlaps vehicle {leader} (gap {gap:.3} m)"
    )]
    Collision {
        time: f64,
        direction: u8,
        lane: usize,
        leader: u64,
        follower: u64,
        gap: f64,
    },

    #[error("detector at x = {position} m has no passages in the window")]
    NoDetectorData { position: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
