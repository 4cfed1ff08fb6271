//! Flattening nested automata into quantitative automata with silent transitions.
//!
//! The obligation-based constructions (regular and threshold) track, for every spawned
//! child, a guess of its outcome together with the set of child configurations still
//! able to realize that guess. Obligations are discharged the first time some
//! configuration terminates with the guessed outcome; a breakpoint set forces every
//! obligation to be discharged infinitely often relative to parent acceptance.

mod multiset;
mod silent;
mod tables;

use num_traits::ToPrimitive;
use std::collections::{HashMap, VecDeque};

use crate::automaton::{Automaton, StateId, Transition};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::nested::{ChildAutomaton, NestedAutomaton};
use crate::value::{FiniteValueFn, InfiniteValueFn};
use crate::weight::{ExtValue, Weight};

pub use multiset::{
    default_multiplicity_cap, determinize_alphabet_extension, multiset_flatten,
    synchronize_children, AlphabetExtension, SynchronizedNqa, UltimateChild,
};
pub use silent::{eliminate_silent, silent_qa_eval_lasso, CompressedQa};
pub use tables::{Advance, ProductTable};

/// Weight of a flattened transition: silent, a counted value, or (for the multiset
/// construction) an uncounted contribution folded into the next counted value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlatWeight {
    Silent,
    Value(ExtValue),
    Carry(Weight),
}

impl FlatWeight {
    pub fn value(w: Weight) -> Self {
        FlatWeight::Value(ExtValue::Finite(w))
    }

    pub fn is_counted(&self) -> bool {
        matches!(self, FlatWeight::Value(_))
    }
}

/// Quantitative automaton whose transitions may be silent.
pub type SilentQa = Automaton<FlatWeight>;

/// A pending child: which table tracks it, the guessed outcome and the live frontier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Obligation {
    pub table: u32,
    pub goal: u32,
    pub frontier: Vec<u32>,
}

/// Obligations with their breakpoint mark.
type Pending = Vec<(Obligation, bool)>;

struct SpawnOption {
    weight: FlatWeight,
    table: u32,
    goal: u32,
}

struct Engine<'a> {
    n: &'a NestedAutomaton,
    tables: Vec<ProductTable>,
    live: Vec<bool>,
}

impl<'a> Engine<'a> {
    fn new(n: &'a NestedAutomaton, tables: Vec<ProductTable>) -> Self {
        Engine {
            n,
            tables,
            live: n.parent().can_reach_accepting(),
        }
    }

    fn explore(
        &self,
        options: &dyn Fn(&Pending, usize) -> Vec<SpawnOption>,
        limits: &Limits,
    ) -> Result<SilentQa> {
        let p = self.n.parent();
        let alphabet = p.alphabet().to_vec();
        if !self.live[p.initial()] {
            return Ok(Automaton::from_parts(
                alphabet,
                vec!["s0".into()],
                0,
                Vec::new(),
                vec![false],
            )?);
        }
        let mut ids: HashMap<(StateId, Pending), usize> = HashMap::new();
        let mut states: Vec<(StateId, Pending)> = Vec::new();
        let mut transitions = Vec::new();
        let root = (p.initial(), Vec::new());
        ids.insert(root.clone(), 0);
        states.push(root);
        let mut queue = VecDeque::from([0usize]);

        while let Some(u) = queue.pop_front() {
            limits.check_states(states.len())?;
            let (q, pending) = states[u].clone();
            let accepting = is_breakpoint(p.is_final(q), &pending);
            let mut emit = |mut next: Pending, target: StateId, letter, weight| {
                if accepting {
                    next.iter_mut().for_each(|(_, m)| *m = true);
                }
                let key = (target, canonical(next));
                let v = *ids.entry(key.clone()).or_insert_with(|| {
                    states.push(key);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                transitions.push(Transition {
                    source: u,
                    letter,
                    target: v,
                    weight,
                });
            };
            'edges: for t in p.outgoing(q) {
                if !self.live[t.target] {
                    continue;
                }
                let a = t.letter;
                let mut next = Vec::with_capacity(pending.len() + 1);
                for (o, m) in &pending {
                    match self.tables[o.table as usize].advance(&o.frontier, o.goal, a) {
                        Advance::Dead => continue 'edges,
                        Advance::Discharged => {}
                        Advance::Alive(frontier) => next.push((
                            Obligation {
                                frontier,
                                ..o.clone()
                            },
                            *m,
                        )),
                    }
                }
                match t.weight.child() {
                    None => emit(next, t.target, a, FlatWeight::Silent),
                    Some(j) => {
                        for opt in options(&pending, j) {
                            let table = &self.tables[opt.table as usize];
                            let mut spawned = next.clone();
                            match table.advance(&[table.start], opt.goal, a) {
                                Advance::Dead => continue,
                                Advance::Discharged => {}
                                Advance::Alive(frontier) => spawned.push((
                                    Obligation {
                                        table: opt.table,
                                        goal: opt.goal,
                                        frontier,
                                    },
                                    false,
                                )),
                            }
                            emit(spawned, t.target, a, opt.weight);
                        }
                    }
                }
            }
        }
        let finals = states
            .iter()
            .map(|(q, pend)| is_breakpoint(p.is_final(*q), pend))
            .collect();
        let names = (0..states.len()).map(|i| format!("s{i}")).collect();
        Ok(Automaton::from_parts(
            alphabet,
            names,
            0,
            transitions,
            finals,
        )?)
    }
}

fn is_breakpoint(parent_final: bool, pending: &Pending) -> bool {
    parent_final && pending.iter().all(|(_, m)| !m)
}

/// Sorted, with identical obligations merged; they have the same future, so the merged
/// copy is marked if either was.
fn canonical(mut v: Pending) -> Pending {
    v.sort();
    let mut out: Pending = Vec::with_capacity(v.len());
    for (o, m) in v {
        match out.last_mut() {
            Some((last, lm)) if *last == o => *lm |= m,
            _ => out.push((o, m)),
        }
    }
    out
}

fn value_table(child: &ChildAutomaton, g: &FiniteValueFn, limits: &Limits) -> Result<ProductTable> {
    ProductTable::build(
        child,
        g.start(),
        |acc, w| Some(g.step(acc, w)),
        |acc| g.finish(acc),
        limits,
    )
}

fn require_finite_range(g: &FiniteValueFn) -> Result<()> {
    if g.has_finite_range() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{g} has an unbounded range; clip child sums first"
        )))
    }
}

/// Values child `j` can return along a run whose parent can still reach acceptance,
/// explored over the synchronized parent × child product.
fn reachable_returns(
    n: &NestedAutomaton,
    j: usize,
    table: &ProductTable,
    limits: &Limits,
) -> Result<Vec<Weight>> {
    let p = n.parent();
    let live = p.can_reach_accepting();
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    for t in p.transitions() {
        if t.weight.child() == Some(j) && live[t.target] {
            for &x in table.successors(table.start, t.letter) {
                if seen.insert((t.target, x)) {
                    queue.push_back((t.target, x));
                }
            }
        }
    }
    let mut found = vec![false; table.goal_keys.len()];
    while let Some((q, x)) = queue.pop_front() {
        limits.check_states(seen.len())?;
        if let Some(g) = table.goal(x) {
            found[g as usize] = true;
        }
        for t in p.outgoing(q) {
            if !live[t.target] {
                continue;
            }
            for &y in table.successors(x, t.letter) {
                if seen.insert((t.target, y)) {
                    queue.push_back((t.target, y));
                }
            }
        }
    }
    Ok(table
        .goal_keys
        .iter()
        .zip(found)
        .filter(|(_, f)| *f)
        .map(|(k, _)| k.clone())
        .collect())
}

/// Sorted set of values child `j` (0-based) can return in some run of the parent that
/// can still be extended to an accepting one. Only finite-range `g` are allowed.
pub fn child_return_values(
    n: &NestedAutomaton,
    j: usize,
    g: &FiniteValueFn,
) -> Result<Vec<Weight>> {
    require_finite_range(g)?;
    if j >= n.num_children() {
        return Err(Error::InvalidArgument(format!("no child {}", j + 1)));
    }
    let limits = Limits::none();
    let table = value_table(n.child(j), g, &limits)?;
    reachable_returns(n, j, &table, &limits)
}

/// Exact flattening for finite-range `g`: every spawn guesses the returned value and
/// emits it; the guess is verified by an obligation.
pub fn flatten_regular(
    n: &NestedAutomaton,
    g: &FiniteValueFn,
    limits: &Limits,
) -> Result<SilentQa> {
    require_finite_range(g)?;
    let tables = n
        .children()
        .iter()
        .map(|c| value_table(c, g, limits))
        .collect::<Result<Vec<_>>>()?;
    let guesses: Vec<Vec<(Weight, u32)>> = tables
        .iter()
        .enumerate()
        .map(|(j, t)| {
            Ok(reachable_returns(n, j, t, limits)?
                .into_iter()
                .map(|v| {
                    let goal = t.goal_of_key(&v).expect("returned values are goal keys");
                    (v, goal)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let engine = Engine::new(n, tables);
    engine.explore(
        &|_, j| {
            guesses[j]
                .iter()
                .map(|(v, goal)| SpawnOption {
                    weight: FlatWeight::value(v.clone()),
                    table: j as u32,
                    goal: *goal,
                })
                .collect()
        },
        limits,
    )
}

/// Tracker for "the child returns at least `lambda`".
fn verify_table(
    child: &ChildAutomaton,
    g: &FiniteValueFn,
    lambda: &Weight,
    limits: &Limits,
) -> Result<ProductTable> {
    let one = || Some(Weight::one());
    match g {
        FiniteValueFn::Min => ProductTable::build(
            child,
            (),
            |_, w| (w >= lambda).then_some(()),
            |_| one(),
            limits,
        ),
        FiniteValueFn::Max => ProductTable::build(
            child,
            false,
            |seen, w| Some(*seen || w >= lambda),
            |seen| if *seen { one() } else { None },
            limits,
        ),
        FiniteValueFn::SumPlus => {
            let cap = lambda.clone().max_of(Weight::zero());
            ProductTable::build(
                child,
                Weight::zero(),
                |s, w| Some((s + &w.abs()).min_of(cap.clone())),
                |s| if s >= lambda { one() } else { None },
                limits,
            )
        }
        FiniteValueFn::SumMinus => ProductTable::build(
            child,
            Weight::zero(),
            |s, w| {
                let s = s - &w.abs();
                (&s >= lambda).then_some(s)
            },
            |_| one(),
            limits,
        ),
        FiniteValueFn::SumB(_) => Err(Error::InvalidArgument(
            "the threshold flattening does not take SumB; use the regular flattening".into(),
        )),
    }
}

/// Flattening for extremal `f` against threshold `lambda`: spawns emit `1` when the
/// child is verified to return at least `lambda` and `0` when it merely terminates.
/// The NQA has a word of value `>= lambda` iff the result has one of value `>= 1`.
pub fn flatten_extremal_threshold(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    lambda: &Weight,
    limits: &Limits,
) -> Result<SilentQa> {
    if !f.is_extremal() {
        return Err(Error::InvalidArgument(format!(
            "{} is not an extremal value function",
            f.name()
        )));
    }
    let mut tables = Vec::with_capacity(2 * n.num_children());
    for c in n.children() {
        tables.push(verify_table(c, g, lambda, limits)?);
        tables.push(ProductTable::build(
            c,
            (),
            |_, _| Some(()),
            |_| Some(Weight::one()),
            limits,
        )?);
    }
    let one = Weight::one();
    let goals: Vec<(Option<u32>, Option<u32>)> = (0..n.num_children())
        .map(|j| {
            (
                tables[2 * j].goal_of_key(&one),
                tables[2 * j + 1].goal_of_key(&one),
            )
        })
        .collect();
    let engine = Engine::new(n, tables);
    engine.explore(
        &|pending, j| {
            let (verify, term) = goals[j];
            let verify = verify.map(|goal| SpawnOption {
                weight: FlatWeight::value(Weight::one()),
                table: 2 * j as u32,
                goal,
            });
            let term = term.map(|goal| SpawnOption {
                weight: FlatWeight::value(Weight::zero()),
                table: 2 * j as u32 + 1,
                goal,
            });
            let witness_busy = pending.iter().any(|(o, _)| o.table % 2 == 0);
            match f {
                InfiniteValueFn::Sup | InfiniteValueFn::LimSup if witness_busy => {
                    term.into_iter().collect()
                }
                InfiniteValueFn::Inf => verify.into_iter().collect(),
                _ => verify.into_iter().chain(term).collect(),
            }
        },
        limits,
    )
}

/// Lattice step of the child weights: every child sum is a multiple of it.
fn weight_step(n: &NestedAutomaton) -> Weight {
    let d = n
        .children()
        .iter()
        .flat_map(|c| c.base().transitions().iter().map(|t| t.weight.clone()))
        .fold(Weight::zero(), |d, w| d.gcd(&w));
    if d.is_zero() {
        Weight::one()
    } else {
        d
    }
}

/// Replaces `Sum+`/`Sum-` children by `SumB` ones with the same answer to every
/// "value `>= lambda`" question under an extremal parent. Returns the rewritten NQA and
/// the bounded sum to use with it.
pub fn clip_child_sums(
    n: &NestedAutomaton,
    g: &FiniteValueFn,
    lambda: &Weight,
) -> Result<(NestedAutomaton, FiniteValueFn)> {
    let d = weight_step(n);
    let at = lambda.ceil_to(&d);
    let (sign, bound) = match g {
        FiniteValueFn::SumPlus => (Weight::one(), at.max_of(Weight::zero())),
        // values strictly below lambda collapse onto the largest lattice point below it
        FiniteValueFn::SumMinus => (-Weight::one(), (d - at).max_of(Weight::zero())),
        other => return Err(Error::InvalidArgument(format!("cannot clip {other}"))),
    };
    Ok((
        map_child_weights(n, |w| &sign * &w.abs())?,
        FiniteValueFn::sum_b(bound)?,
    ))
}

pub(crate) fn map_child_weights(
    n: &NestedAutomaton,
    f: impl Fn(&Weight) -> Weight,
) -> Result<NestedAutomaton> {
    let children = n
        .children()
        .iter()
        .map(|c| c.base().map_weights(&f))
        .collect();
    Ok(NestedAutomaton::new(n.parent().clone(), children)?)
}

/// Global configurations `(parent state, set of occupied child states)` reachable by a
/// deterministic NQA, or an upper bound for nondeterministic ones.
fn configuration_count(n: &NestedAutomaton, limits: &Limits) -> Result<usize> {
    let p = n.parent();
    let total: usize = n.children().iter().map(|c| c.num_states()).sum();
    if !n.is_deterministic() {
        if total > 24 {
            return Err(Error::Unsupported(
                "unboundedness check on a large nondeterministic NQA".into(),
            ));
        }
        return Ok(p.num_states() << total);
    }
    let step_child =
        |j: usize, s: StateId, a| n.child(j).base().successors(s, a).next().map(|t| t.target);
    let mut seen: std::collections::HashSet<(StateId, Vec<(usize, StateId)>)> = Default::default();
    let mut queue = VecDeque::from([(p.initial(), Vec::new())]);
    seen.insert((p.initial(), Vec::new()));
    while let Some((q, set)) = queue.pop_front() {
        limits.check_states(seen.len())?;
        for t in p.outgoing(q) {
            let mut next = Vec::new();
            let mut advance = |j: usize, s: StateId| {
                if let Some(s2) = step_child(j, s, t.letter) {
                    if !n.child(j).base().is_final(s2) {
                        next.push((j, s2));
                    }
                }
            };
            for &(j, s) in &set {
                advance(j, s);
            }
            if let Some(j) = t.weight.child() {
                advance(j, n.child(j).base().initial());
            }
            next.sort_unstable();
            next.dedup();
            let key = (t.target, next);
            if seen.insert(key.clone()) {
                queue.push_back(key);
            }
        }
    }
    Ok(seen.len())
}

/// Decides whether child sums are unbounded in the sense relevant to `(LimSupAvg, Sum+)`:
/// some accepting run has infinitely many children accumulating more than
/// `lambda* = configurations × max child states × max |w|`. Such a child repeats a
/// global configuration with a strictly larger sum, so it can be pumped without bound.
/// Returns the verdict together with `lambda*`.
pub fn childsum_unbounded(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    limits: &Limits,
) -> Result<(bool, Weight)> {
    if f != InfiniteValueFn::LimSupAvg || *g != FiniteValueFn::SumPlus {
        return Err(Error::InvalidArgument(
            "the unboundedness check is for (LimSupAvg, Sum+)".into(),
        ));
    }
    let configs = configuration_count(n, limits)?;
    let max_states = n
        .children()
        .iter()
        .map(|c| c.num_states())
        .max()
        .unwrap_or(1);
    let w = n.max_abs_child_weight();
    let lambda_star = Weight::from_int((configs * max_states) as i64) * w.clone();
    if w.is_zero() {
        return Ok((false, lambda_star));
    }
    let probe = &lambda_star + &weight_step(n);
    Ok((limsup_reaches(n, &probe, limits)?, lambda_star))
}

/// Does some accepting run see infinitely many `Sum+` returns of at least `v`?
fn limsup_reaches(n: &NestedAutomaton, v: &Weight, limits: &Limits) -> Result<bool> {
    let f = InfiniteValueFn::LimSup;
    let flat = flatten_extremal_threshold(n, f, &FiniteValueFn::SumPlus, v, limits)?;
    let q = eliminate_silent(&flat, f, true)?;
    Ok(crate::decide::qa_emptiness_ext(&q.automaton, f, &Weight::one())?.0)
}

/// The largest `Sum+` return some accepting run sees infinitely often, for an NQA whose
/// child sums were found bounded by `lambda_star`. Larger returns occur only finitely
/// often on every accepting run, so clipping there keeps every limit average.
pub fn recurrent_childsum_bound(
    n: &NestedAutomaton,
    lambda_star: &Weight,
    limits: &Limits,
) -> Result<Weight> {
    let d = weight_step(n);
    let steps = (lambda_star.clone() / d.clone()).ceil_to(&Weight::one());
    let steps = steps
        .numer()
        .to_u64()
        .ok_or_else(|| Error::Unsupported(format!("child-sum bound {lambda_star} is too large")))?;
    let at = |i: u64| Weight::from_int(i as i64) * d.clone();
    if !limsup_reaches(n, &Weight::zero(), limits)? {
        return Ok(Weight::zero());
    }
    // reaches(lo) holds; reaches(hi) fails
    let (mut lo, mut hi) = (0u64, steps + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if limsup_reaches(n, &at(mid), limits)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(lo))
}
