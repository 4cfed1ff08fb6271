use thiserror::Error;

use crate::weight::ExtValue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseWeightError {
    #[error("malformed weight `{0}`")]
    Malformed(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown state id {0}")]
    UnknownStateId(usize),
    #[error("automaton has no transitions")]
    EmptyTransitions,
    #[error("no initial state")]
    NoInitial,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("value function applied to an empty sequence")]
    EmptySequence,
    #[error("Sum^B requires a non-negative bound")]
    NegativeBound,
}

/// Errors raised by evaluation, flattening and the decision procedures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error("automaton is incomplete: state `{state}` has no `{letter}`-transition")]
    Incomplete { state: String, letter: String },
    #[error("nondeterministic input: {0}")]
    Nondeterministic(String),
    #[error("oracle capacity exceeded ({0} configurations)")]
    OracleCapacity(usize),
    #[error("exploration budget exhausted; best bound found {bound}")]
    BudgetExhausted { bound: ExtValue },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("undecidable route: {0}")]
    Undecidable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infinite weight under a limit-average objective")]
    InfiniteWeight,
    #[error("timeout")]
    Timeout,
    #[error("state limit exceeded ({0} states)")]
    StateLimit(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
