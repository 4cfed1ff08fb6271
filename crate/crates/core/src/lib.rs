//! Nested quantitative automata: exact value functions, flattening into quantitative
//! automata, and threshold emptiness and universality checks.

pub mod automaton;
pub mod check;
pub mod decide;
pub mod error;
pub mod flatten;
pub mod generators;
pub mod graph;
pub mod lasso;
pub mod limits;
pub mod nested;
pub mod oracle;
pub mod text;
pub mod value;
pub mod weight;

pub use automaton::{
    build_automaton, Automaton, AutomatonBuilder, Letter, SccDecomposition, StateId, Transition,
};
pub use check::{
    emptiness_route, flatten_for, nqa_emptiness, nqa_universality, universality_route,
    DecisionOptions, EmptinessReport, Route, Stats, UniversalityReport,
};
pub use decide::{
    bottom_value_det, qa_emptiness, qa_universality, top_value, TopValueReport, Universality,
};
pub use error::{AutomatonError, Error, ParseWeightError, Result, ValueError};
pub use flatten::{
    child_return_values, childsum_unbounded, clip_child_sums, determinize_alphabet_extension,
    eliminate_silent, flatten_extremal_threshold, flatten_regular, multiset_flatten,
    recurrent_childsum_bound, silent_qa_eval_lasso, synchronize_children, FlatWeight, SilentQa,
};
pub use generators::{gen_resource, gen_response, RcParams, RtParams};
pub use lasso::Lasso;
pub use limits::Limits;
pub use nested::{
    monitor_prefix, validate_deterministic_nqa, validate_nqa, ChildAutomaton, Diagnostic, Label,
    MonitorReport, NestedAutomaton, Severity,
};
pub use oracle::{nqa_eval_lasso, nqa_eval_lasso_nondet};
pub use text::{parse_nqa, parse_qa, serialize_nqa, serialize_qa, ParseError};
pub use value::{
    eval_finite, eval_lasso, running_aggregate, FiniteKind, FiniteValueFn, InfiniteValueFn,
    PeriodicSeq,
};
pub use weight::{ExtValue, Weight};
