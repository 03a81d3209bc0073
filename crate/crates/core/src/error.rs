use thiserror::Error;

use crate::position::Square;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("a position needs at least one coin")]
    EmptyPosition,

    #[error("square {0} holds more than one coin")]
    DuplicateSquare(Square),

    #[error("cannot parse squares: {0}")]
    Parse(String),

    #[error("illegal move {from}->{to}: {reason}")]
    IllegalMove {
        from: Square,
        to: Square,
        reason: &'static str,
    },

    #[error("position has {got} coins, at least {needed} required")]
    TooFewCoins { needed: usize, got: usize },

    #[error("position {0} is terminal")]
    Terminal(String),

    #[error("position {0} is already a P-position")]
    AlreadyLosing(String),

    #[error("memo budget of {budget} entries exhausted")]
    ResourceLimit { budget: usize },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("no shift n <= {bound} found for {position}")]
    ShiftNotFound { position: String, bound: Square },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("position space is empty: {0}")]
    EmptySpace(String),

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn too_few(needed: usize, got: usize) -> Self {
        Error::TooFewCoins { needed, got }
    }
}
