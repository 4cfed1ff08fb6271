//! Flattening for limit averages of `Sum-` children: alphabet extension to remove
//! nondeterminism, synchronization into one child automaton, and a bounded multiset
//! construction.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{FlatWeight, SilentQa};
use crate::automaton::{Automaton, Letter, StateId, Transition};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::nested::{Label, NestedAutomaton};
use crate::value::{FiniteValueFn, InfiniteValueFn};
use crate::weight::Weight;

/// A deterministic NQA over an extended alphabet; `projection[b]` is the original
/// letter behind extended letter `b`.
#[derive(Clone, Debug)]
pub struct AlphabetExtension {
    pub nqa: NestedAutomaton,
    pub projection: Vec<Letter>,
}

/// Resolves nondeterminism by moving choices into the letters. An extended letter
/// `a#i` fixes, for letter `a`, which transition the parent takes and which option every
/// child takes, indexed per state. A child option also decides whether a final state
/// with outgoing transitions terminates or continues; such states are split into a
/// non-final copy and a terminal final copy `s!`.
///
/// Instances of the same child sitting in the same state follow the same option. A
/// deterministic NQA is returned unchanged.
pub fn determinize_alphabet_extension(n: &NestedAutomaton) -> Result<AlphabetExtension> {
    if n.is_deterministic() {
        return Ok(AlphabetExtension {
            nqa: n.clone(),
            projection: (0..n.num_letters()).collect(),
        });
    }
    let p = n.parent();
    let k = n.num_letters();

    // child options: (target in the new child, weight)
    let mut child_options: Vec<Vec<Vec<Vec<(StateId, Weight)>>>> = Vec::new();
    let mut child_parts = Vec::new();
    for c in n.children() {
        let b = c.base();
        let mut names: Vec<String> = b.state_names().to_vec();
        let mut finals: Vec<bool> = (0..b.num_states())
            .map(|s| b.is_final(s) && !c.has_outgoing(s))
            .collect();
        let mut stop_copy = vec![None; b.num_states()];
        for s in 0..b.num_states() {
            if b.is_final(s) && c.has_outgoing(s) {
                stop_copy[s] = Some(names.len());
                names.push(format!("{}!", b.state_name(s)));
                finals.push(true);
            }
        }
        let mut opts = vec![vec![Vec::new(); k]; b.num_states()];
        for t in b.transitions() {
            let o = &mut opts[t.source][t.letter];
            if b.is_final(t.target) {
                o.push((stop_copy[t.target].unwrap_or(t.target), t.weight.clone()));
            }
            if c.has_outgoing(t.target) {
                o.push((t.target, t.weight.clone()));
            }
        }
        child_options.push(opts);
        child_parts.push((names, finals));
    }

    let parent_deg: Vec<usize> = (0..k)
        .map(|a| {
            (0..p.num_states())
                .map(|q| p.successors(q, a).count())
                .max()
                .unwrap_or(0)
                .max(1)
        })
        .collect();
    let child_deg: Vec<Vec<usize>> = child_options
        .iter()
        .map(|opts| {
            (0..k)
                .map(|a| opts.iter().map(|o| o[a].len()).max().unwrap_or(0).max(1))
                .collect()
        })
        .collect();

    let mut alphabet = Vec::new();
    let mut projection = Vec::new();
    // digits[b] = (parent choice, child choices)
    let mut digits: Vec<(usize, Vec<usize>)> = Vec::new();
    for a in 0..k {
        let combos = parent_deg[a] * child_deg.iter().map(|d| d[a]).product::<usize>();
        if combos > 1 << 16 {
            return Err(Error::Unsupported(format!(
                "alphabet extension needs {combos} letters for `{}`",
                p.letter_name(a)
            )));
        }
        for i in 0..combos {
            alphabet.push(if combos == 1 {
                p.letter_name(a).to_string()
            } else {
                format!("{}#{i}", p.letter_name(a))
            });
            projection.push(a);
            let mut rest = i / parent_deg[a];
            let cs = child_deg
                .iter()
                .map(|d| {
                    let c = rest % d[a];
                    rest /= d[a];
                    c
                })
                .collect();
            digits.push((i % parent_deg[a], cs));
        }
    }

    let mut parent_ts = Vec::new();
    for q in 0..p.num_states() {
        for (b, (d, _)) in digits.iter().enumerate() {
            let succ: Vec<_> = p.successors(q, projection[b]).collect();
            if !succ.is_empty() {
                let t = succ[d % succ.len()];
                parent_ts.push(Transition {
                    source: q,
                    letter: b,
                    target: t.target,
                    weight: t.weight,
                });
            }
        }
    }
    let parent = Automaton::from_parts(
        alphabet.clone(),
        p.state_names().to_vec(),
        p.initial(),
        parent_ts,
        p.finals().to_vec(),
    )?;

    let mut children = Vec::new();
    for (j, (names, finals)) in child_parts.into_iter().enumerate() {
        let mut ts = Vec::new();
        for (s, row) in child_options[j].iter().enumerate() {
            for (b, (_, cs)) in digits.iter().enumerate() {
                let o = &row[projection[b]];
                if !o.is_empty() {
                    let (target, w) = &o[cs[j] % o.len()];
                    ts.push(Transition {
                        source: s,
                        letter: b,
                        target: *target,
                        weight: w.clone(),
                    });
                }
            }
        }
        let init = n.child(j).base().initial();
        children.push(Automaton::from_parts(
            alphabet.clone(),
            names,
            init,
            ts,
            finals,
        )?);
    }
    Ok(AlphabetExtension {
        nqa: NestedAutomaton::new(parent, children)?,
        projection,
    })
}

/// Disjoint union of deterministic children, entered at `entries[j]` for child `j`.
#[derive(Clone, Debug)]
pub struct UltimateChild {
    succ: Vec<Vec<Option<(StateId, Weight)>>>,
    finals: Vec<bool>,
    names: Vec<String>,
    pub entries: Vec<StateId>,
}

impl UltimateChild {
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn step(&self, s: StateId, a: Letter) -> Option<&(StateId, Weight)> {
        self.succ[s][a].as_ref()
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals[s]
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.names[s]
    }
}

/// Deterministic parent whose spawns all enter one ultimate child.
#[derive(Clone, Debug)]
pub struct SynchronizedNqa {
    pub parent: Automaton<Label>,
    pub child: UltimateChild,
}

/// Merges the children of a deterministic NQA into a single automaton that advances
/// every active instance in lockstep.
pub fn synchronize_children(n: &NestedAutomaton) -> Result<SynchronizedNqa> {
    n.require_deterministic()?;
    let k = n.num_letters();
    let mut succ = Vec::new();
    let mut finals = Vec::new();
    let mut names = Vec::new();
    let mut entries = Vec::new();
    for (j, c) in n.children().iter().enumerate() {
        let b = c.base();
        let offset = succ.len();
        entries.push(offset + b.initial());
        for s in 0..b.num_states() {
            let mut row = vec![None; k];
            for t in b.outgoing(s) {
                row[t.letter] = Some((offset + t.target, t.weight.clone()));
            }
            succ.push(row);
            finals.push(b.is_final(s));
            names.push(if n.num_children() == 1 {
                b.state_name(s).to_string()
            } else {
                format!("{}.{}", j + 1, b.state_name(s))
            });
        }
    }
    Ok(SynchronizedNqa {
        parent: n.parent().clone(),
        child: UltimateChild {
            succ,
            finals,
            names,
            entries,
        },
    })
}

/// One instance per ultimate-child state is enough for every NQA whose active
/// instances never collide in a state.
pub fn default_multiplicity_cap(s: &SynchronizedNqa) -> usize {
    s.child.num_states().max(1)
}

type MultisetKey = (StateId, Vec<(StateId, usize)>, Vec<StateId>);

/// Tracks how many active instances sit in each ultimate-child state, up to `cap` per
/// state; successors exceeding the cap are dropped, so the construction only
/// under-approximates, monotonically in `cap`.
///
/// Every step carries the summed `-|w|` of all active instances; spawn steps are the
/// counted ones. Over a run where every instance terminates, the limit average of the
/// result equals the limit average of the returned `Sum-` values.
pub fn multiset_flatten(
    s: &SynchronizedNqa,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    cap: usize,
    limits: &Limits,
) -> Result<SilentQa> {
    if !f.is_limit_average() || *g != FiniteValueFn::SumMinus {
        return Err(Error::InvalidArgument(
            "the multiset flattening is for limit averages of Sum- children".into(),
        ));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument(
            "multiplicity cap must be positive".into(),
        ));
    }
    let p = &s.parent;
    let u = &s.child;
    let live = p.can_reach_accepting();
    let alphabet = p.alphabet().to_vec();
    if !live[p.initial()] {
        return Ok(Automaton::from_parts(
            alphabet,
            vec!["m0".into()],
            0,
            Vec::new(),
            vec![false],
        )?);
    }
    let accepting = |(q, _, marked): &MultisetKey| p.is_final(*q) && marked.is_empty();
    let mut ids: HashMap<MultisetKey, usize> = HashMap::new();
    let mut states: Vec<MultisetKey> = Vec::new();
    let root: MultisetKey = (p.initial(), Vec::new(), Vec::new());
    ids.insert(root.clone(), 0);
    states.push(root);
    let mut queue = VecDeque::from([0usize]);
    let mut transitions = Vec::new();
    while let Some(x) = queue.pop_front() {
        limits.check_states(states.len())?;
        let key = states[x].clone();
        let (q, counts, marked) = &key;
        'edges: for t in p.outgoing(*q) {
            if !live[t.target] {
                continue;
            }
            let a = t.letter;
            let mut total = Weight::zero();
            let mut next: BTreeMap<StateId, usize> = BTreeMap::new();
            let mut next_marked = Vec::new();
            for &(st, cnt) in counts {
                let Some((s2, w)) = u.step(st, a) else {
                    continue 'edges;
                };
                total = total - Weight::from_int(cnt as i64) * w.abs();
                if !u.is_final(*s2) {
                    *next.entry(*s2).or_default() += cnt;
                    if marked.binary_search(&st).is_ok() {
                        next_marked.push(*s2);
                    }
                }
            }
            if let Some(j) = t.weight.child() {
                let Some((s2, w)) = u.step(u.entries[j], a) else {
                    continue;
                };
                total = total - w.abs();
                if !u.is_final(*s2) {
                    *next.entry(*s2).or_default() += 1;
                }
            }
            if next.values().any(|&c| c > cap) {
                continue;
            }
            let next: Vec<(StateId, usize)> = next.into_iter().collect();
            let next_marked = if accepting(&key) {
                next.iter().map(|(s, _)| *s).collect()
            } else {
                next_marked.sort_unstable();
                next_marked.dedup();
                next_marked
            };
            let weight = if t.weight.child().is_some() {
                FlatWeight::value(total)
            } else if total.is_zero() {
                FlatWeight::Silent
            } else {
                FlatWeight::Carry(total)
            };
            let target_key = (t.target, next, next_marked);
            let y = *ids.entry(target_key.clone()).or_insert_with(|| {
                states.push(target_key);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            transitions.push(Transition {
                source: x,
                letter: a,
                target: y,
                weight,
            });
        }
    }
    let finals = states.iter().map(accepting).collect();
    let names = (0..states.len()).map(|i| format!("m{i}")).collect();
    Ok(Automaton::from_parts(
        alphabet,
        names,
        0,
        transitions,
        finals,
    )?)
}
