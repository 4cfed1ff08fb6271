//! Removing silent transitions from a flattened automaton.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{FlatWeight, SilentQa};
use crate::automaton::{Automaton, Letter, StateId, Transition};
use crate::decide::top_value_ext;
use crate::error::{Error, Result};
use crate::lasso::Lasso;
use crate::value::InfiniteValueFn;
use crate::weight::{ExtValue, Weight};

/// Result of silent-transition elimination. Limit-average compression replaces paths by
/// fresh letters; `expansion[i]` is the original word spelled by fresh letter `i`.
#[derive(Clone, Debug)]
pub struct CompressedQa {
    pub automaton: Automaton<ExtValue>,
    pub expansion: Option<Vec<Vec<Letter>>>,
}

impl CompressedQa {
    /// Maps a lasso over the compressed alphabet back to the original one.
    pub fn expand(&self, lasso: &Lasso) -> Lasso {
        match &self.expansion {
            None => lasso.clone(),
            Some(words) => {
                let spell = |v: &[Letter]| {
                    v.iter()
                        .flat_map(|&a| words[a].iter().copied())
                        .collect::<Vec<_>>()
                };
                Lasso::new(spell(&lasso.stem), spell(&lasso.cycle))
                    .expect("fresh letters spell nonempty words")
            }
        }
    }
}

/// Turns a silent QA into an ordinary one with the same top value under `f`, where runs
/// must take infinitely many counted transitions.
///
/// For extremal `f`, silent weights become the neutral element and a three-phase
/// product enforces infinitely many counted transitions between final visits. For
/// limit averages, maximal silent paths followed by one counted transition are
/// compressed into single transitions. With `scc_opt`, both steps are confined to
/// accepting SCCs: the phase product only where an accepting SCC has an internal silent
/// transition, and for averages every silent transition outside accepting SCCs just
/// counts as `0`, which cannot change a prefix-independent value.
pub fn eliminate_silent(q: &SilentQa, f: InfiniteValueFn, scc_opt: bool) -> Result<CompressedQa> {
    if f.is_extremal() {
        extremal(q, f, scc_opt).map(|automaton| CompressedQa {
            automaton,
            expansion: None,
        })
    } else {
        compress(q, scc_opt)
    }
}

fn internal_to_accepting(q: &SilentQa, t: &Transition<FlatWeight>) -> bool {
    let s = q.sccs();
    s.scc_of[t.source] == s.scc_of[t.target] && s.in_accepting(t.source)
}

fn extremal(q: &SilentQa, f: InfiniteValueFn, scc_opt: bool) -> Result<Automaton<ExtValue>> {
    let neutral = if f.is_sup_like() {
        ExtValue::NegInf
    } else {
        ExtValue::PosInf
    };
    let n = q.num_states();
    let mut tripled = vec![!scc_opt; n];
    if scc_opt {
        for t in q.transitions() {
            if t.weight == FlatWeight::Silent && internal_to_accepting(q, t) {
                let c = q.sccs().scc_of[t.source];
                for &s in &q.sccs().members[c] {
                    tripled[s] = true;
                }
            }
        }
    }
    let id = |s: StateId, phase: usize| 3 * s + phase;
    let entry_phase = |t: StateId| usize::from(q.is_final(t));
    let mut transitions = Vec::new();
    for t in q.transitions() {
        let silent = t.weight == FlatWeight::Silent;
        let weight = match &t.weight {
            FlatWeight::Silent => neutral.clone(),
            FlatWeight::Value(v) => v.clone(),
            FlatWeight::Carry(_) => {
                return Err(Error::InvalidArgument(
                    "carry weights only occur under limit averages".into(),
                ))
            }
        };
        let phases: &[usize] = if tripled[t.source] { &[0, 1, 2] } else { &[0] };
        for &ph in phases {
            let target = if !tripled[t.target] {
                0
            } else if tripled[t.source] {
                match ph {
                    1 if !silent => 2,
                    1 => 1,
                    _ => entry_phase(t.target),
                }
            } else {
                entry_phase(t.target)
            };
            transitions.push(Transition {
                source: id(t.source, ph),
                letter: t.letter,
                target: id(t.target, target),
                weight: weight.clone(),
            });
        }
    }
    let mut names = Vec::with_capacity(3 * n);
    let mut finals = Vec::with_capacity(3 * n);
    for s in 0..n {
        for ph in 0..3 {
            if tripled[s] {
                names.push(format!("{}~{ph}", q.state_name(s)));
                finals.push(ph == 2);
            } else {
                names.push(if ph == 0 {
                    q.state_name(s).to_string()
                } else {
                    format!("{}~{ph}", q.state_name(s))
                });
                finals.push(ph == 0 && q.is_final(s));
            }
        }
    }
    let init = id(
        q.initial(),
        if tripled[q.initial()] {
            entry_phase(q.initial())
        } else {
            0
        },
    );
    Ok(Automaton::from_parts(
        q.alphabet().to_vec(),
        names,
        init,
        transitions,
        finals,
    )?)
}

/// Counted value of a transition after the SCC optimization, or `None` if it stays
/// uncounted; the second component is the carried amount.
fn classify(
    q: &SilentQa,
    t: &Transition<FlatWeight>,
    scc_opt: bool,
) -> Result<(Option<Weight>, Weight)> {
    let counted_anyway = scc_opt && !internal_to_accepting(q, t);
    match &t.weight {
        FlatWeight::Value(ExtValue::Finite(w)) => Ok((Some(w.clone()), Weight::zero())),
        FlatWeight::Value(_) => Err(Error::InfiniteWeight),
        FlatWeight::Silent if counted_anyway => Ok((Some(Weight::zero()), Weight::zero())),
        FlatWeight::Silent => Ok((None, Weight::zero())),
        FlatWeight::Carry(c) if c.is_positive() => Err(Error::InvalidArgument(
            "positive carry weights are not supported".into(),
        )),
        FlatWeight::Carry(c) if counted_anyway => Ok((Some(c.clone()), Weight::zero())),
        FlatWeight::Carry(c) => Ok((None, c.clone())),
    }
}

fn compress(q: &SilentQa, scc_opt: bool) -> Result<CompressedQa> {
    let n = q.num_states();
    let kinds = q
        .transitions()
        .iter()
        .map(|t| classify(q, t, scc_opt))
        .collect::<Result<Vec<_>>>()?;
    let mut anchor = vec![false; n];
    anchor[q.initial()] = true;
    for (t, (v, _)) in q.transitions().iter().zip(&kinds) {
        if v.is_some() {
            anchor[t.target] = true;
        }
    }

    // best[(x, y, bit)] = (weight, word) of the heaviest compressed edge
    let mut best: HashMap<(StateId, StateId, bool), (Weight, Vec<Letter>)> = HashMap::new();
    for x in (0..n).filter(|&x| anchor[x]) {
        // Dijkstra on the uncounted subgraph, costs are negated carries
        let node = |s: StateId, bit: bool| 2 * s + usize::from(bit);
        let mut dist: Vec<Option<Weight>> = vec![None; 2 * n];
        let mut pred: Vec<Option<(usize, Letter)>> = vec![None; 2 * n];
        let mut done = vec![false; 2 * n];
        let mut heap = BinaryHeap::new();
        dist[node(x, false)] = Some(Weight::zero());
        heap.push(Reverse((Weight::zero(), node(x, false))));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            let (s, bit) = (u / 2, u % 2 == 1);
            for &e in q.outgoing_ids(s) {
                let t = &q.transitions()[e];
                let bit2 = bit || q.is_final(t.target);
                match &kinds[e] {
                    (Some(v), _) => {
                        let w = v - &d;
                        let key = (x, t.target, bit2);
                        if best.get(&key).map_or(true, |(b, _)| *b < w) {
                            let mut word = spell(&pred, u);
                            word.push(t.letter);
                            best.insert(key, (w, word));
                        }
                    }
                    (None, carry) => {
                        let v = node(t.target, bit2);
                        let d2 = &d - carry;
                        if dist[v].as_ref().map_or(true, |old| d2 < *old) {
                            dist[v] = Some(d2.clone());
                            pred[v] = Some((u, t.letter));
                            heap.push(Reverse((d2, v)));
                        }
                    }
                }
            }
        }
    }

    let mut edges: Vec<_> = best.into_iter().collect();
    edges.sort();
    let mut transitions = Vec::new();
    let mut expansion = Vec::with_capacity(edges.len());
    let mut alphabet = Vec::with_capacity(edges.len());
    for (i, ((x, y, bit), (w, word))) in edges.into_iter().enumerate() {
        for src_bit in [0, 1] {
            transitions.push(Transition {
                source: 2 * x + src_bit,
                letter: i,
                target: 2 * y + usize::from(bit),
                weight: ExtValue::Finite(w.clone()),
            });
        }
        alphabet.push(format!("e{i}"));
        expansion.push(word);
    }
    if alphabet.is_empty() {
        alphabet.push("e0".into());
        expansion.push(vec![0]);
    }
    let names = (0..2 * n)
        .map(|u| format!("{}~{}", q.state_name(u / 2), u % 2))
        .collect();
    let finals = (0..2 * n).map(|u| u % 2 == 1).collect();
    let automaton = Automaton::from_parts(alphabet, names, 2 * q.initial(), transitions, finals)?;
    Ok(CompressedQa {
        automaton,
        expansion: Some(expansion),
    })
}

fn spell(pred: &[Option<(usize, Letter)>], mut u: usize) -> Vec<Letter> {
    let mut word = Vec::new();
    while let Some((p, a)) = pred[u] {
        word.push(a);
        u = p;
    }
    word.reverse();
    word
}

/// Value of a lasso word under a silent QA: the best accepting run with infinitely many
/// counted transitions, or `-inf` if there is none.
pub fn silent_qa_eval_lasso(q: &SilentQa, f: InfiniteValueFn, lasso: &Lasso) -> Result<ExtValue> {
    let positions = lasso.num_positions();
    let id = |s: StateId, p: usize| s * positions + p;
    let mut transitions = Vec::new();
    for t in q.transitions() {
        for p in 0..positions {
            if lasso.letter_at(p) == t.letter {
                transitions.push(Transition {
                    source: id(t.source, p),
                    letter: 0,
                    target: id(t.target, lasso.next_position(p)),
                    weight: t.weight.clone(),
                });
            }
        }
    }
    let n = q.num_states() * positions;
    let names = (0..n).map(|i| format!("x{i}")).collect();
    let finals = (0..n).map(|i| q.is_final(i / positions)).collect();
    let product = Automaton::from_parts(
        vec!["a".into()],
        names,
        id(q.initial(), 0),
        transitions,
        finals,
    )?;
    let c = eliminate_silent(&product, f, true)?;
    Ok(top_value_ext(&c.automaton, f)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qa(transitions: &[(usize, usize, FlatWeight)], n: usize, finals: &[usize]) -> SilentQa {
        let ts = transitions
            .iter()
            .map(|(s, t, w)| Transition {
                source: *s,
                letter: 0,
                target: *t,
                weight: w.clone(),
            })
            .collect();
        let names = (0..n).map(|i| format!("q{i}")).collect();
        let fin = (0..n).map(|i| finals.contains(&i)).collect();
        Automaton::from_parts(vec!["a".into()], names, 0, ts, fin).unwrap()
    }

    fn v(x: i64) -> FlatWeight {
        FlatWeight::value(Weight::from_int(x))
    }

    #[test]
    fn compression_of_silent_edge() {
        // p -_-> q -5-> p
        let q = qa(&[(0, 1, FlatWeight::Silent), (1, 0, v(5))], 2, &[0]);
        for opt in [true, false] {
            let c = eliminate_silent(&q, InfiniteValueFn::LimSupAvg, opt).unwrap();
            let top = top_value_ext(&c.automaton, InfiniteValueFn::LimSupAvg).unwrap();
            assert_eq!(top.value, ExtValue::from(5));
            let w = top.witness.map(|l| c.expand(&l));
            if let Some(w) = w {
                assert_eq!(
                    silent_qa_eval_lasso(&q, InfiniteValueFn::LimSupAvg, &w).unwrap(),
                    ExtValue::from(5)
                );
            }
        }
    }

    #[test]
    fn silent_only_cycles_are_rejected() {
        // an accepting silent self-loop after one counted transition
        let q = qa(&[(0, 1, v(7)), (1, 1, FlatWeight::Silent)], 2, &[1]);
        for f in InfiniteValueFn::ALL {
            for opt in [true, false] {
                let c = eliminate_silent(&q, f, opt).unwrap();
                let top = top_value_ext(&c.automaton, f).unwrap().value;
                assert_eq!(top, ExtValue::NegInf, "{f:?} opt={opt}");
            }
        }
    }

    #[test]
    fn extremal_neutral_elements() {
        // silent transitions between counted ones do not affect Inf or Sup
        let q = qa(&[(0, 1, v(3)), (1, 0, FlatWeight::Silent)], 2, &[0]);
        for f in InfiniteValueFn::ALL {
            let c = eliminate_silent(&q, f, true).unwrap();
            assert_eq!(
                top_value_ext(&c.automaton, f).unwrap().value,
                ExtValue::from(3),
                "{f:?}"
            );
        }
    }

    #[test]
    fn carries_fold_into_next_value() {
        // counted 0 then a carry of -2: average -1 per counted transition
        let q = qa(
            &[
                (0, 1, v(0)),
                (1, 0, FlatWeight::Carry(Weight::from_int(-2))),
            ],
            2,
            &[0],
        );
        let c = eliminate_silent(&q, InfiniteValueFn::LimInfAvg, false).unwrap();
        assert_eq!(
            top_value_ext(&c.automaton, InfiniteValueFn::LimInfAvg)
                .unwrap()
                .value,
            ExtValue::from(-2)
        );
    }
}
