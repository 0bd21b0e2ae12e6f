use alloc::string::String;

use thiserror::Error;

use crate::mau::Attribute;
use crate::puzzle::Operator;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PuzzleError {
    #[error("unsupported board width {0}")]
    InvalidWidth(usize),
    #[error("expected {expected} tiles, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("tiles are not a permutation of 0..width^2")]
    NotPermutation,
    #[error("could not parse board")]
    Parse,
    #[error("illegal move {0}")]
    IllegalMove(Operator),
    #[error("board widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("initial state cannot reach the goal")]
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("node budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("depth {depth} is not achievable on a {width}x{width} board")]
    DepthUnachievable { depth: u32, width: usize },
    #[error("no instance of depth {depth} found in {attempts} attempts")]
    GenerationFailed { depth: u32, attempts: u32 },
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiniminError {
    #[error("lookahead level {level} outside 1..={max}")]
    InvalidLookahead { level: u32, max: u32 },
    #[error("resource limits must be positive")]
    InvalidLimits,
    #[error("empty sample")]
    EmptySample,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MauError {
    #[error("invalid lottery: {0}")]
    InvalidLottery(&'static str),
    #[error("outcome lacks attribute {0}")]
    AttributeMissing(Attribute),
    #[error("malformed utility model: {0}")]
    MalformedModel(String),
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("no choices given")]
    NoChoices,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("no decision accuracy for lookahead {0}")]
    MissingAccuracy(u32),
    #[error("empirical table has no cells for lookahead {0}")]
    MissingLevel(u32),
    #[error("depth {0} outside the modelled range")]
    OutOfRange(u32),
    #[error("invalid model parameters: {0}")]
    InvalidParams(&'static str),
    #[error("empty sample")]
    EmptySample,
    #[error(transparent)]
    Minimin(#[from] MiniminError),
    #[error(transparent)]
    Mau(#[from] MauError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    #[error("no lookahead levels offered")]
    NoLevels,
    #[error("no candidates offered")]
    NoCandidates,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mau(#[from] MauError),
}
