//! Nested quantitative automata: a parent over infinite words whose transitions spawn
//! child automata over finite words.

use std::fmt;

use crate::automaton::{Automaton, Letter, StateId, Transition};
use crate::error::{AutomatonError, Error, Result};
use crate::value::{Accumulator, FiniteValueFn};
use crate::weight::Weight;

/// Parent transition label: `0` is silent, `i >= 1` invokes child `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl Label {
    pub const SILENT: Label = Label(0);

    pub fn is_silent(self) -> bool {
        self.0 == 0
    }

    /// Zero-based child index, `None` when silent.
    pub fn child(self) -> Option<usize> {
        (self.0 as usize).checked_sub(1)
    }

    pub fn invoke(child: usize) -> Label {
        Label(child as u32 + 1)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A child automaton over finite words; its final states accept.
#[derive(Clone, Debug)]
pub struct ChildAutomaton {
    base: Automaton<Weight>,
}

impl ChildAutomaton {
    pub fn new(base: Automaton<Weight>) -> Self {
        ChildAutomaton { base }
    }

    pub fn base(&self) -> &Automaton<Weight> {
        &self.base
    }

    pub fn into_base(self) -> Automaton<Weight> {
        self.base
    }

    pub fn num_states(&self) -> usize {
        self.base.num_states()
    }

    pub fn weights(&self) -> Vec<Weight> {
        let mut ws: Vec<Weight> = self
            .base
            .transitions()
            .iter()
            .map(|t| t.weight.clone())
            .collect();
        ws.sort();
        ws.dedup();
        ws
    }

    /// Deterministic, and final states have no outgoing transitions.
    pub fn is_deterministic(&self) -> bool {
        self.base.is_deterministic()
            && (0..self.base.num_states())
                .all(|q| !self.base.is_final(q) || self.base.outgoing(q).next().is_none())
    }

    pub fn has_outgoing(&self, q: StateId) -> bool {
        self.base.outgoing(q).next().is_some()
    }
}

#[derive(Clone, Debug)]
pub struct NestedAutomaton {
    parent: Automaton<Label>,
    children: Vec<ChildAutomaton>,
}

impl NestedAutomaton {
    /// Children are re-indexed onto the parent's alphabet by letter name; a child letter
    /// the parent does not know is an error.
    pub fn new(
        parent: Automaton<Label>,
        children: Vec<Automaton<Weight>>,
    ) -> Result<Self, AutomatonError> {
        let alphabet = parent.alphabet().to_vec();
        let children = children
            .into_iter()
            .map(|c| reindex(c, &alphabet).map(ChildAutomaton::new))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NestedAutomaton { parent, children })
    }

    pub fn parent(&self) -> &Automaton<Label> {
        &self.parent
    }

    pub fn children(&self) -> &[ChildAutomaton] {
        &self.children
    }

    /// Zero-based child access.
    pub fn child(&self, j: usize) -> &ChildAutomaton {
        &self.children[j]
    }

    pub fn num_children(&self) -> usize {
        self.children.len()
    }

    pub fn alphabet(&self) -> &[String] {
        self.parent.alphabet()
    }

    pub fn num_letters(&self) -> usize {
        self.parent.num_letters()
    }

    /// Deterministic parent and deterministic children whose final states are terminal.
    pub fn is_deterministic(&self) -> bool {
        self.parent.is_deterministic() && self.children.iter().all(ChildAutomaton::is_deterministic)
    }

    pub(crate) fn require_deterministic(&self) -> Result<()> {
        if self.is_deterministic() {
            Ok(())
        } else {
            Err(Error::Nondeterministic(
                "the NQA has a nondeterministic parent or child".into(),
            ))
        }
    }

    /// Maximum absolute child weight.
    pub fn max_abs_child_weight(&self) -> Weight {
        self.children
            .iter()
            .flat_map(|c| c.base.transitions().iter().map(|t| t.weight.abs()))
            .max()
            .unwrap_or_else(Weight::zero)
    }
}

fn reindex(
    child: Automaton<Weight>,
    alphabet: &[String],
) -> Result<Automaton<Weight>, AutomatonError> {
    if child.alphabet() == alphabet {
        return Ok(child);
    }
    let mut map = Vec::with_capacity(child.num_letters());
    for name in child.alphabet() {
        let idx = alphabet
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| AutomatonError::UnknownLetter(name.clone()))?;
        map.push(idx);
    }
    let transitions = child
        .transitions()
        .iter()
        .map(|t| Transition {
            source: t.source,
            letter: map[t.letter],
            target: t.target,
            weight: t.weight.clone(),
        })
        .collect();
    Automaton::from_parts(
        alphabet.to_vec(),
        child.state_names().to_vec(),
        child.initial(),
        transitions,
        child.finals().to_vec(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, message: impl Into<String>) -> Self {
        Diagnostic {
            severity,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.severity, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Structural checks: child count, label range, alphabet agreement and completeness of
/// the parent. Incomplete children at non-final states only warn, since a child may
/// legitimately reject. Determinism is reported as info.
pub fn validate_nqa(n: &NestedAutomaton) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let k = n.num_children();
    if k == 0 {
        out.push(Diagnostic::new(
            Severity::Error,
            "the NQA has no child automaton",
        ));
    }
    for t in n.parent.transitions() {
        if t.weight.0 as usize > k {
            out.push(Diagnostic::new(
                Severity::Error,
                format!(
                    "label out of range: {} on `{} : {}, {} -> {}` but only {k} children",
                    t.weight,
                    n.parent.letter_name(t.letter),
                    t.weight,
                    n.parent.state_name(t.source),
                    n.parent.state_name(t.target)
                ),
            ));
        }
    }
    for (j, c) in n.children.iter().enumerate() {
        if c.base.alphabet() != n.parent.alphabet() {
            out.push(Diagnostic::new(
                Severity::Error,
                format!("child {} alphabet differs from the parent alphabet", j + 1),
            ));
        }
    }
    if let Some((q, a)) = n.parent.missing_transition() {
        out.push(Diagnostic::new(
            Severity::Error,
            format!(
                "parent is incomplete: state `{}` has no `{}`-transition",
                n.parent.state_name(q),
                n.parent.letter_name(a)
            ),
        ));
    }
    for (j, c) in n.children.iter().enumerate() {
        let b = &c.base;
        'states: for q in 0..b.num_states() {
            if b.is_final(q) {
                continue;
            }
            for a in 0..b.num_letters() {
                if b.successors(q, a).next().is_none() {
                    out.push(Diagnostic::new(
                        Severity::Warning,
                        format!(
                            "child {} is incomplete at non-final state `{}` (letter `{}`)",
                            j + 1,
                            b.state_name(q),
                            b.letter_name(a)
                        ),
                    ));
                    continue 'states;
                }
            }
        }
        if !(0..b.num_states()).any(|q| b.is_final(q)) {
            out.push(Diagnostic::new(
                Severity::Warning,
                format!("child {} has no final state", j + 1),
            ));
        }
    }
    out.push(Diagnostic::new(
        Severity::Info,
        if n.is_deterministic() {
            "deterministic NQA"
        } else {
            "nondeterministic NQA"
        },
    ));
    out
}

/// [`validate_nqa`] for an NQA declared deterministic: every nondeterministic state and
/// every child final state with outgoing transitions becomes an error.
pub fn validate_deterministic_nqa(n: &NestedAutomaton) -> Vec<Diagnostic> {
    let mut out = validate_nqa(n);
    out.retain(|d| d.severity != Severity::Info);
    if !n.parent.is_deterministic() {
        out.push(Diagnostic::new(
            Severity::Error,
            "parent is nondeterministic",
        ));
    }
    for (j, c) in n.children.iter().enumerate() {
        let b = &c.base;
        if !b.is_deterministic() {
            out.push(Diagnostic::new(
                Severity::Error,
                format!("child {} is nondeterministic", j + 1),
            ));
        }
        for q in 0..b.num_states() {
            if let Some(t) = b.outgoing(q).next().filter(|_| b.is_final(q)) {
                out.push(Diagnostic::new(
                    Severity::Error,
                    format!(
                        "child {} final state `{}` has an outgoing `{}`-transition",
                        j + 1,
                        b.state_name(q),
                        b.letter_name(t.letter)
                    ),
                ));
            }
        }
    }
    out
}

/// Outcome of running a deterministic NQA on a finite prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonitorReport {
    /// `(spawn position, returned value)`, positions 1-based, sorted by position.
    pub returned: Vec<(usize, Weight)>,
    pub still_active: usize,
    /// Spawn positions of children that got stuck before reaching a final state.
    pub stuck: Vec<usize>,
    /// 1-based position at which the parent had no transition, if any.
    pub parent_stuck_at: Option<usize>,
}

impl MonitorReport {
    pub fn values(&self) -> Vec<Weight> {
        self.returned.iter().map(|(_, v)| v.clone()).collect()
    }
}

/// Runs a deterministic NQA on a finite word, spawning a child on every non-silent
/// parent transition and recording the value of each child that reached a final state.
pub fn monitor_prefix(
    n: &NestedAutomaton,
    g: &FiniteValueFn,
    w: &[Letter],
) -> Result<MonitorReport> {
    n.require_deterministic()?;
    struct Inst {
        child: usize,
        state: StateId,
        acc: Accumulator,
        spawn: usize,
    }
    let mut q = n.parent.initial();
    let mut active: Vec<Inst> = Vec::new();
    let mut report = MonitorReport {
        returned: Vec::new(),
        still_active: 0,
        stuck: Vec::new(),
        parent_stuck_at: None,
    };
    for (i, &a) in w.iter().enumerate() {
        if a >= n.num_letters() {
            return Err(AutomatonError::UnknownLetter(format!("#{a}")).into());
        }
        let Some(t) = n.parent.successors(q, a).next() else {
            report.parent_stuck_at = Some(i + 1);
            break;
        };
        q = t.target;
        if let Some(j) = t.weight.child() {
            active.push(Inst {
                child: j,
                state: n.children[j].base.initial(),
                acc: g.start(),
                spawn: i + 1,
            });
        }
        let mut next = Vec::with_capacity(active.len());
        for inst in active {
            let b = &n.children[inst.child].base;
            match b.successors(inst.state, a).next() {
                None => report.stuck.push(inst.spawn),
                Some(ct) => {
                    let acc = g.step(&inst.acc, &ct.weight);
                    if b.is_final(ct.target) {
                        let v = g.finish(&acc).expect("child read a letter");
                        report.returned.push((inst.spawn, v));
                    } else {
                        next.push(Inst {
                            state: ct.target,
                            acc,
                            ..inst
                        });
                    }
                }
            }
        }
        active = next;
    }
    report.returned.sort_by_key(|(p, _)| *p);
    report.still_active = active.len();
    Ok(report)
}
