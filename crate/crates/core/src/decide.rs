//! Threshold decision procedures on quantitative automata.
//!
//! Procedures run on automata with [`ExtValue`] weights so that flattened automata whose
//! silent transitions were replaced by infinite neutral weights are handled directly.
//! Public entry points over [`Weight`] reject incomplete automata; the `*_ext` variants
//! accept incomplete ones, treating missing transitions as rejecting.

use std::collections::{HashMap, VecDeque};

use crate::automaton::{Automaton, Letter, StateId};
use crate::error::{Error, Result};
use crate::graph::{self, Components};
use crate::lasso::Lasso;
use crate::limits::Limits;
use crate::value::InfiniteValueFn;
use crate::weight::{ExtValue, Weight};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopValueReport {
    pub value: ExtValue,
    pub witness: Option<Lasso>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Universality {
    Universal,
    Counterexample(Lasso),
}

impl Universality {
    pub fn is_universal(&self) -> bool {
        matches!(self, Universality::Universal)
    }
}

pub(crate) fn require_complete<W>(a: &Automaton<W>) -> Result<()> {
    match a.missing_transition() {
        None => Ok(()),
        Some((q, l)) => Err(Error::Incomplete {
            state: a.state_name(q).to_string(),
            letter: a.letter_name(l).to_string(),
        }),
    }
}

pub fn to_ext(a: &Automaton<Weight>) -> Automaton<ExtValue> {
    a.map_weights(|w| ExtValue::Finite(w.clone()))
}

/// Edge-indexed view of an automaton.
struct Graph<'a> {
    a: &'a Automaton<ExtValue>,
    n: usize,
}

impl<'a> Graph<'a> {
    fn new(a: &'a Automaton<ExtValue>) -> Self {
        Graph {
            a,
            n: a.num_states(),
        }
    }

    fn adj(&self, allowed: &dyn Fn(usize) -> bool) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, t) in self.a.transitions().iter().enumerate() {
            if allowed(i) {
                adj[t.source].push(t.target);
            }
        }
        adj
    }

    fn weight(&self, e: usize) -> &ExtValue {
        &self.a.transitions()[e].weight
    }

    /// Accepting components of the `allowed` subgraph: a final state and an internal edge.
    fn accepting(&self, comps: &Components, allowed: &dyn Fn(usize) -> bool) -> Vec<bool> {
        let mut acc = vec![false; comps.len()];
        for (i, t) in self.a.transitions().iter().enumerate() {
            let c = comps.comp_of[t.source];
            if allowed(i)
                && c == comps.comp_of[t.target]
                && comps.members[c].iter().any(|&q| self.a.is_final(q))
            {
                acc[c] = true;
            }
        }
        acc
    }

    /// Shortest edge path from any of `sources` to a vertex satisfying `goal`, using
    /// allowed edges. An empty path when a source already satisfies `goal`.
    fn path(
        &self,
        sources: &[StateId],
        allowed: &dyn Fn(usize) -> bool,
        goal: &dyn Fn(StateId) -> bool,
    ) -> Option<Vec<usize>> {
        let mut pred: Vec<Option<Option<usize>>> = vec![None; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if pred[s].is_none() {
                pred[s] = Some(None);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            if goal(v) {
                let mut path = Vec::new();
                let mut cur = v;
                while let Some(Some(e)) = pred[cur] {
                    path.push(e);
                    cur = self.a.transitions()[e].source;
                }
                path.reverse();
                return Some(path);
            }
            for &e in self.a.outgoing_ids(v) {
                if allowed(e) {
                    let w = self.a.transitions()[e].target;
                    if pred[w].is_none() {
                        pred[w] = Some(Some(e));
                        queue.push_back(w);
                    }
                }
            }
        }
        None
    }

    /// A cycle through `x` using allowed edges, starting with edge `first` if given.
    fn cycle_through(
        &self,
        x: StateId,
        allowed: &dyn Fn(usize) -> bool,
        first: Option<usize>,
    ) -> Option<Vec<usize>> {
        let starts: Vec<usize> = match first {
            Some(e) => vec![e],
            None => self
                .a
                .outgoing_ids(x)
                .iter()
                .copied()
                .filter(|&e| allowed(e))
                .collect(),
        };
        let mut best: Option<Vec<usize>> = None;
        for e in starts {
            let t = self.a.transitions()[e].target;
            if let Some(rest) = self.path(&[t], allowed, &|v| v == x) {
                let mut c = vec![e];
                c.extend(rest);
                if best.as_ref().is_none_or(|b| c.len() < b.len()) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn letters(&self, edges: &[usize]) -> Vec<Letter> {
        edges
            .iter()
            .map(|&e| self.a.transitions()[e].letter)
            .collect()
    }

    fn lasso(&self, stem: &[usize], cycle: &[usize]) -> Lasso {
        Lasso::new(self.letters(stem), self.letters(cycle)).expect("cycle is nonempty")
    }
}

/// Supremum of `f` over accepting runs, with a witness lasso whenever some lasso attains
/// a finite value. Rejects incomplete automata.
pub fn top_value(a: &Automaton<Weight>, f: InfiniteValueFn) -> Result<TopValueReport> {
    require_complete(a)?;
    top_value_ext(&to_ext(a), f)
}

pub fn top_value_ext(a: &Automaton<ExtValue>, f: InfiniteValueFn) -> Result<TopValueReport> {
    let g = Graph::new(a);
    let all = |_: usize| true;
    let full = g.adj(&all);
    let comps = graph::tarjan(&full);
    let acc = g.accepting(&comps, &all);
    let reach = graph::forward_reachable(&full, [a.initial()]);
    let in_acc = |q: StateId| acc[comps.comp_of[q]];
    let none = TopValueReport {
        value: ExtValue::NegInf,
        witness: None,
    };
    let init = [a.initial()];
    let final_in_acc = |q: StateId| a.is_final(q) && in_acc(q);

    match f {
        InfiniteValueFn::Sup => {
            let goal: Vec<bool> = (0..g.n).map(in_acc).collect();
            let live =
                graph::forward_reachable(&graph::transpose(&full), (0..g.n).filter(|&q| goal[q]));
            let best = a
                .transitions()
                .iter()
                .enumerate()
                .filter(|(_, t)| reach[t.source] && live[t.target])
                .max_by(|x, y| x.1.weight.cmp(&y.1.weight).then(y.0.cmp(&x.0)));
            let Some((e, t)) = best else { return Ok(none) };
            let mut stem = g.path(&init, &all, &|v| v == t.source).unwrap();
            stem.push(e);
            stem.extend(g.path(&[t.target], &all, &final_in_acc).unwrap());
            let f_state = a.transitions()[*stem.last().unwrap()].target;
            let cf = comps.comp_of[f_state];
            let in_cf = |e: usize| {
                let t = &a.transitions()[e];
                comps.comp_of[t.source] == cf && comps.comp_of[t.target] == cf
            };
            let cycle = g.cycle_through(f_state, &in_cf, None).unwrap();
            Ok(TopValueReport {
                value: t.weight.clone(),
                witness: Some(g.lasso(&stem, &cycle)),
            })
        }
        InfiniteValueFn::LimSup => {
            let internal = |e: usize| {
                let t = &a.transitions()[e];
                comps.comp_of[t.source] == comps.comp_of[t.target]
            };
            let best = (0..a.num_transitions())
                .filter(|&e| {
                    let t = &a.transitions()[e];
                    internal(e) && reach[t.source] && in_acc(t.source)
                })
                .max_by(|&x, &y| g.weight(x).cmp(g.weight(y)).then(y.cmp(&x)));
            let Some(e) = best else { return Ok(none) };
            let t = &a.transitions()[e];
            let c = comps.comp_of[t.source];
            let in_c = |e: usize| {
                let t = &a.transitions()[e];
                comps.comp_of[t.source] == c && comps.comp_of[t.target] == c
            };
            let stem = g.path(&init, &all, &|v| v == t.source).unwrap();
            let mut cycle = vec![e];
            let to_final = g.path(&[t.target], &in_c, &|v| a.is_final(v)).unwrap();
            let f_state = to_final
                .last()
                .map_or(t.target, |&x| a.transitions()[x].target);
            cycle.extend(to_final);
            cycle.extend(g.path(&[f_state], &in_c, &|v| v == t.source).unwrap());
            Ok(TopValueReport {
                value: t.weight.clone(),
                witness: Some(g.lasso(&stem, &cycle)),
            })
        }
        InfiniteValueFn::Inf | InfiniteValueFn::LimInf => {
            let mut distinct: Vec<ExtValue> =
                a.transitions().iter().map(|t| t.weight.clone()).collect();
            distinct.sort();
            distinct.dedup();
            for c in distinct.iter().rev() {
                let allowed = |e: usize| g.weight(e) >= c;
                let sub = g.adj(&allowed);
                let sc = graph::tarjan(&sub);
                let sacc = g.accepting(&sc, &allowed);
                let sreach = if f == InfiniteValueFn::Inf {
                    graph::forward_reachable(&sub, init)
                } else {
                    reach.clone()
                };
                let target = (0..g.n).find(|&q| sreach[q] && a.is_final(q) && sacc[sc.comp_of[q]]);
                if let Some(x) = target {
                    let stem_allowed: &dyn Fn(usize) -> bool = if f == InfiniteValueFn::Inf {
                        &allowed
                    } else {
                        &all
                    };
                    let stem = g.path(&init, stem_allowed, &|v| v == x).unwrap();
                    let cx = sc.comp_of[x];
                    let in_c = |e: usize| {
                        let t = &a.transitions()[e];
                        allowed(e) && sc.comp_of[t.source] == cx && sc.comp_of[t.target] == cx
                    };
                    let cycle = g.cycle_through(x, &in_c, None).unwrap();
                    return Ok(TopValueReport {
                        value: c.clone(),
                        witness: Some(g.lasso(&stem, &cycle)),
                    });
                }
            }
            Ok(none)
        }
        InfiniteValueFn::LimInfAvg | InfiniteValueFn::LimSupAvg => {
            let mut best: Option<(Weight, usize)> = None;
            for c in 0..comps.len() {
                if !acc[c] || !reach[comps.members[c][0]] {
                    continue;
                }
                let arcs = component_arcs(a, &comps, c)?;
                let mean = karp_max_mean(comps.members[c].len(), &arcs)
                    .expect("accepting component has a cycle");
                if best.as_ref().is_none_or(|(b, _)| &mean > b) {
                    best = Some((mean, c));
                }
            }
            let Some((mean, _)) = best else {
                return Ok(none);
            };
            // witness: a mean-optimal cycle through a final state in some optimal component
            let mut witness = None;
            for c in 0..comps.len() {
                if !acc[c] || !reach[comps.members[c][0]] {
                    continue;
                }
                if let Some(cycle) = tight_final_cycle(&g, &comps, c, &mean)? {
                    let x = a.transitions()[cycle[0]].source;
                    let stem = g.path(&init, &all, &|v| v == x).unwrap();
                    witness = Some(g.lasso(&stem, &cycle));
                    break;
                }
            }
            Ok(TopValueReport {
                value: ExtValue::Finite(mean),
                witness,
            })
        }
    }
}

/// Internal arcs of component `c` as `(local source, local target, weight, edge id)`.
fn component_arcs(
    a: &Automaton<ExtValue>,
    comps: &Components,
    c: usize,
) -> Result<Vec<(usize, usize, Weight, usize)>> {
    let local: HashMap<StateId, usize> = comps.members[c]
        .iter()
        .enumerate()
        .map(|(i, &q)| (q, i))
        .collect();
    let mut arcs = Vec::new();
    for (e, t) in a.transitions().iter().enumerate() {
        if comps.comp_of[t.source] == c && comps.comp_of[t.target] == c {
            let w = t.weight.finite().ok_or(Error::InfiniteWeight)?.clone();
            arcs.push((local[&t.source], local[&t.target], w, e));
        }
    }
    Ok(arcs)
}

/// Karp's maximum cycle mean on a strongly connected graph with `n` vertices. `None`
/// when there is no arc.
pub fn karp_max_mean<E>(n: usize, arcs: &[(usize, usize, Weight, E)]) -> Option<Weight> {
    if arcs.is_empty() || n == 0 {
        return None;
    }
    // d[k][v]: maximum weight of a k-arc walk from vertex 0 to v
    let mut d: Vec<Vec<Option<Weight>>> = vec![vec![None; n]; n + 1];
    d[0][0] = Some(Weight::zero());
    for k in 1..=n {
        for (u, v, w, _) in arcs {
            if let Some(du) = &d[k - 1][*u] {
                let cand = du + w;
                if d[k][*v].as_ref().is_none_or(|x| &cand > x) {
                    d[k][*v] = Some(cand);
                }
            }
        }
    }
    let mut best: Option<Weight> = None;
    for v in 0..n {
        let Some(dn) = &d[n][v] else { continue };
        let mut worst: Option<Weight> = None;
        for (k, row) in d.iter().enumerate().take(n) {
            if let Some(dk) = &row[v] {
                let r = (dn - dk) / Weight::from_int((n - k) as i64);
                if worst.as_ref().is_none_or(|x| &r < x) {
                    worst = Some(r);
                }
            }
        }
        if let Some(w) = worst {
            if best.as_ref().is_none_or(|b| &w > b) {
                best = Some(w);
            }
        }
    }
    best
}

/// Longest-path potentials for `w - mean` on the component (no positive cycle exists
/// when `mean` is the maximum cycle mean).
fn potentials(n: usize, arcs: &[(usize, usize, Weight, usize)], mean: &Weight) -> Vec<Weight> {
    let mut pot = vec![Weight::zero(); n];
    for _ in 0..n {
        let mut changed = false;
        for (u, v, w, _) in arcs {
            let cand = &(&pot[*u] + w) - mean;
            if cand > pot[*v] {
                pot[*v] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    pot
}

/// Tight arcs (`pot[u] + w - mean == pot[v]`) form exactly the cycles of mean `mean`.
fn tight_arcs(n: usize, arcs: &[(usize, usize, Weight, usize)], mean: &Weight) -> Vec<usize> {
    let pot = potentials(n, arcs, mean);
    arcs.iter()
        .filter(|(u, v, w, _)| &(&pot[*u] + w) - mean == pot[*v])
        .map(|a| a.3)
        .collect()
}

/// A cycle of mean `mean` through a final state inside component `c`, if any.
fn tight_final_cycle(
    g: &Graph,
    comps: &Components,
    c: usize,
    mean: &Weight,
) -> Result<Option<Vec<usize>>> {
    let arcs = component_arcs(g.a, comps, c)?;
    let n = comps.members[c].len();
    if karp_max_mean(n, &arcs).as_ref() != Some(mean) {
        return Ok(None);
    }
    let tight = tight_arcs(n, &arcs, mean);
    let mut is_tight = vec![false; g.a.num_transitions()];
    for &e in &tight {
        is_tight[e] = true;
    }
    let sub = g.adj(&|e| is_tight[e]);
    let sc = graph::tarjan(&sub);
    for &q in &comps.members[c] {
        if g.a.is_final(q) && sc.cyclic[sc.comp_of[q]] {
            let cq = sc.comp_of[q];
            let in_c = |e: usize| {
                let t = &g.a.transitions()[e];
                is_tight[e] && sc.comp_of[t.source] == cq && sc.comp_of[t.target] == cq
            };
            return Ok(g.cycle_through(q, &in_c, None));
        }
    }
    Ok(None)
}

/// A tight cycle and a return detour through a final state in component `c`:
/// `(cycle, detour)` both starting and ending at the same vertex.
fn tight_cycle_with_detour(
    g: &Graph,
    comps: &Components,
    c: usize,
    mean: &Weight,
) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    let arcs = component_arcs(g.a, comps, c)?;
    let n = comps.members[c].len();
    let tight = tight_arcs(n, &arcs, mean);
    let mut is_tight = vec![false; g.a.num_transitions()];
    for &e in &tight {
        is_tight[e] = true;
    }
    let sub = g.adj(&|e| is_tight[e]);
    let sc = graph::tarjan(&sub);
    let Some(&x) = comps.members[c].iter().find(|&&q| sc.cyclic[sc.comp_of[q]]) else {
        return Ok(None);
    };
    let cx = sc.comp_of[x];
    let cycle = g
        .cycle_through(
            x,
            &|e| {
                let t = &g.a.transitions()[e];
                is_tight[e] && sc.comp_of[t.source] == cx && sc.comp_of[t.target] == cx
            },
            None,
        )
        .expect("cyclic tight component");
    let in_c = |e: usize| {
        let t = &g.a.transitions()[e];
        comps.comp_of[t.source] == c && comps.comp_of[t.target] == c
    };
    let mut detour = g
        .path(&[x], &in_c, &|v| g.a.is_final(v))
        .expect("accepting component");
    let f = detour.last().map_or(x, |&e| g.a.transitions()[e].target);
    if detour.is_empty() {
        // x itself is final: the tight cycle already visits F
        return Ok(Some((cycle.clone(), cycle)));
    }
    detour.extend(
        g.path(&[f], &in_c, &|v| v == x)
            .expect("strongly connected"),
    );
    Ok(Some((cycle, detour)))
}

/// Does some word have value at least `lambda`? Rejects incomplete automata.
pub fn qa_emptiness(
    a: &Automaton<Weight>,
    f: InfiniteValueFn,
    lambda: &Weight,
) -> Result<(bool, Option<Lasso>)> {
    require_complete(a)?;
    qa_emptiness_ext(&to_ext(a), f, lambda)
}

pub fn qa_emptiness_ext(
    a: &Automaton<ExtValue>,
    f: InfiniteValueFn,
    lambda: &Weight,
) -> Result<(bool, Option<Lasso>)> {
    let report = top_value_ext(a, f)?;
    let lam = ExtValue::Finite(lambda.clone());
    if report.value < lam {
        return Ok((false, None));
    }
    if report.witness.is_some() || !f.is_limit_average() {
        return Ok((true, report.witness));
    }
    let top = report.value.finite().expect("averages are finite").clone();
    if &top == lambda {
        // the value is only approached by runs that are not ultimately periodic
        return Ok((true, None));
    }
    // pump a mean-optimal cycle C around a detour D through F: mean(C^m D) >= lambda
    let g = Graph::new(a);
    let all = |_: usize| true;
    let full = g.adj(&all);
    let comps = graph::tarjan(&full);
    let acc = g.accepting(&comps, &all);
    let reach = graph::forward_reachable(&full, [a.initial()]);
    for c in 0..comps.len() {
        if !acc[c] || !reach[comps.members[c][0]] {
            continue;
        }
        let arcs = component_arcs(a, &comps, c)?;
        if karp_max_mean(comps.members[c].len(), &arcs).as_ref() != Some(&top) {
            continue;
        }
        if let Some((cycle, detour)) = tight_cycle_with_detour(&g, &comps, c, &top)? {
            let sum = |es: &[usize]| -> Weight {
                es.iter()
                    .map(|&e| g.weight(e).finite().unwrap().clone())
                    .sum()
            };
            let (wc, lc) = (sum(&cycle), Weight::from_int(cycle.len() as i64));
            let (wd, ld) = (sum(&detour), Weight::from_int(detour.len() as i64));
            // (m wc + wd) / (m lc + ld) >= lambda  <=>  m (wc - lambda lc) >= lambda ld - wd
            let gain = &wc - &(lambda * &lc);
            let need = &(lambda * &ld) - &wd;
            let m = if need.is_positive() {
                let q = &need / &gain;
                q.ceil_to(&Weight::one())
            } else {
                Weight::zero()
            };
            let m: usize = m.to_string().parse().unwrap_or(0);
            let x = a.transitions()[cycle[0]].source;
            let stem = g.path(&[a.initial()], &all, &|v| v == x).unwrap();
            let mut body = Vec::new();
            for _ in 0..m {
                body.extend(cycle.iter().copied());
            }
            body.extend(detour.iter().copied());
            return Ok((true, Some(g.lasso(&stem, &body))));
        }
    }
    Ok((true, None))
}

/// Best value of the accepting runs on a lasso word (NegInf if there is none).
pub fn qa_eval_lasso(
    a: &Automaton<ExtValue>,
    f: InfiniteValueFn,
    lasso: &Lasso,
) -> Result<ExtValue> {
    let positions = lasso.num_positions();
    let id = |q: StateId, p: usize| q * positions + p;
    let mut transitions = Vec::new();
    for t in a.transitions() {
        for p in 0..positions {
            let letter = if p < lasso.stem.len() {
                lasso.stem[p]
            } else {
                lasso.cycle[p - lasso.stem.len()]
            };
            if t.letter == letter {
                transitions.push(crate::automaton::Transition {
                    source: id(t.source, p),
                    letter: 0,
                    target: id(t.target, lasso.next_position(p)),
                    weight: t.weight.clone(),
                });
            }
        }
    }
    let n = a.num_states() * positions;
    let names = (0..n).map(|i| format!("x{i}")).collect();
    let finals = (0..n).map(|i| a.is_final(i / positions)).collect();
    let product = Automaton::from_parts(
        vec!["_".into()],
        names,
        id(a.initial(), 0),
        transitions,
        finals,
    )?;
    Ok(top_value_ext(&product, f)?.value)
}

/// Context bits per state pair: bit `2*acc + lev` set when some run has at least that
/// (accepting visit, level) pair; sets are kept downward closed.
type Mask = u8;

fn closure(acc: bool, lev: bool) -> Mask {
    let top = 2 * acc as u8 + lev as u8;
    // all (a, l) <= (acc, lev)
    let mut m = 0u8;
    for a in 0..=acc as u8 {
        for l in 0..=lev as u8 {
            m |= 1 << (2 * a + l);
        }
    }
    debug_assert!(m & (1 << top) != 0);
    m
}

fn options(m: Mask) -> impl Iterator<Item = (bool, bool)> {
    (0..4u8)
        .filter(move |b| m & (1 << b) != 0)
        .map(|b| (b >= 2, b & 1 == 1))
}

/// Sequential composition of two masks; `or` joins levels disjunctively (Sup-like) or
/// conjunctively (Inf-like).
fn compose_masks(x: Mask, y: Mask, or: bool) -> Mask {
    let mut m = 0;
    for (a1, l1) in options(x) {
        for (a2, l2) in options(y) {
            let l = if or { l1 || l2 } else { l1 && l2 };
            m |= closure(a1 || a2, l);
        }
    }
    m
}

/// Finite-word summary: sorted `((p, q), mask)` entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Context(Vec<((u32, u32), Mask)>);

impl Context {
    fn compose(&self, other: &Context, or: bool) -> Context {
        let mut by_src: HashMap<u32, Vec<(u32, Mask)>> = HashMap::new();
        for &((p, q), m) in &other.0 {
            by_src.entry(p).or_default().push((q, m));
        }
        let mut out: HashMap<(u32, u32), Mask> = HashMap::new();
        for &((p, q), m1) in &self.0 {
            if let Some(next) = by_src.get(&q) {
                for &(r, m2) in next {
                    *out.entry((p, r)).or_default() |= compose_masks(m1, m2, or);
                }
            }
        }
        let mut v: Vec<_> = out.into_iter().collect();
        v.sort_unstable();
        Context(v)
    }

    /// `self ⊑ other`: every run summary of `self` is matched or beaten in `other`.
    fn below(&self, other: &Context) -> bool {
        let mut j = 0;
        for &(pair, m) in &self.0 {
            while j < other.0.len() && other.0[j].0 < pair {
                j += 1;
            }
            if j == other.0.len() || other.0[j].0 != pair || m & !other.0[j].1 != 0 {
                return false;
            }
        }
        true
    }
}

/// Antichain of ⊑-minimal contexts with the word that produced each.
///
/// Contexts are bucketed by their pair set. While every stored context is a function
/// on one common set of sources, `⊑` can only relate contexts with equal pair sets, so
/// a functional newcomer with those sources is compared within its bucket alone.
struct Antichain {
    items: Vec<Option<(Context, Vec<Letter>)>>,
    buckets: HashMap<Vec<(u32, u32)>, Vec<usize>>,
    shape: Option<Vec<u32>>,
    mixed: bool,
}

impl Context {
    fn pairs(&self) -> Vec<(u32, u32)> {
        self.0.iter().map(|&(pq, _)| pq).collect()
    }

    /// Sources, if every source has exactly one pair.
    fn functional_sources(&self) -> Option<Vec<u32>> {
        let src: Vec<u32> = self.0.iter().map(|&((p, _), _)| p).collect();
        src.windows(2).all(|w| w[0] < w[1]).then_some(src)
    }
}

impl Antichain {
    fn new() -> Self {
        Antichain {
            items: Vec::new(),
            buckets: HashMap::new(),
            shape: None,
            mixed: false,
        }
    }

    /// Inserts unless subsumed; returns the new slot.
    fn insert(&mut self, c: Context, word: Vec<Letter>) -> Option<usize> {
        let pairs = c.pairs();
        let src = c.functional_sources();
        if !self.mixed {
            match (&self.shape, &src) {
                (_, None) => self.mixed = true,
                (None, Some(s)) => self.shape = Some(s.clone()),
                (Some(shape), Some(s)) if shape != s => self.mixed = true,
                _ => {}
            }
        }
        let candidates: Vec<usize> = if self.mixed {
            (0..self.items.len()).collect()
        } else {
            self.buckets.get(&pairs).cloned().unwrap_or_default()
        };
        if candidates
            .iter()
            .any(|&i| self.items[i].as_ref().is_some_and(|(d, _)| d.below(&c)))
        {
            return None;
        }
        for &i in &candidates {
            if self.items[i].as_ref().is_some_and(|(d, _)| c.below(d)) {
                self.items[i] = None;
            }
        }
        let slot = self.items.len();
        self.items.push(Some((c, word)));
        let bucket = self.buckets.entry(pairs).or_default();
        bucket.retain(|&i| self.items[i].is_some());
        bucket.push(slot);
        Some(slot)
    }

    fn live(&self) -> impl Iterator<Item = &(Context, Vec<Letter>)> {
        self.items.iter().flatten()
    }
}

/// Is there an accepting run on `u v^ω` whose value reaches the level, given the row
/// context of `u` (pairs from the initial state) and the context of `v`?
fn good_lasso_run(f: InfiniteValueFn, n: usize, stem: &Context, cycle: &Context) -> bool {
    let edges: Vec<(usize, usize, bool, bool)> = cycle
        .0
        .iter()
        .flat_map(|&((p, q), m)| options(m).map(move |(a, l)| (p as usize, q as usize, a, l)))
        .collect();
    let starts: Vec<(usize, bool)> = stem
        .0
        .iter()
        .map(|&((_, q), m)| (q as usize, options(m).any(|(_, l)| l)))
        .collect();
    match f {
        InfiniteValueFn::Sup => {
            // nodes (state, seen-level)
            let mut adj = vec![Vec::new(); 2 * n];
            for &(p, q, _, l) in &edges {
                adj[2 * p].push(2 * q + l as usize);
                adj[2 * p + 1].push(2 * q + 1);
            }
            let comps = graph::tarjan(&adj);
            let mut good = vec![false; comps.len()];
            for &(p, q, a, l) in &edges {
                if a {
                    for s in [0usize, 1] {
                        let (u, v) = (2 * p + s, 2 * q + (s | l as usize));
                        if comps.comp_of[u] == comps.comp_of[v] && s == 1 {
                            good[comps.comp_of[u]] = true;
                        }
                    }
                }
            }
            let reach =
                graph::forward_reachable(&adj, starts.iter().map(|&(q, l)| 2 * q + l as usize));
            (0..2 * n).any(|v| reach[v] && good[comps.comp_of[v]])
        }
        InfiniteValueFn::LimSup => {
            let mut adj = vec![Vec::new(); n];
            for &(p, q, _, _) in &edges {
                adj[p].push(q);
            }
            let comps = graph::tarjan(&adj);
            let mut marks = vec![(false, false); comps.len()];
            for &(p, q, a, l) in &edges {
                let c = comps.comp_of[p];
                if c == comps.comp_of[q] {
                    marks[c].0 |= a;
                    marks[c].1 |= l;
                }
            }
            let reach = graph::forward_reachable(&adj, starts.iter().map(|&(q, _)| q));
            (0..n).any(|v| reach[v] && marks[comps.comp_of[v]] == (true, true))
        }
        InfiniteValueFn::Inf | InfiniteValueFn::LimInf => {
            let mut full = vec![Vec::new(); n];
            let mut sub = vec![Vec::new(); n];
            for &(p, q, _, l) in &edges {
                full[p].push(q);
                if l {
                    sub[p].push(q);
                }
            }
            let comps = graph::tarjan(&sub);
            let mut good = vec![false; comps.len()];
            for &(p, q, a, l) in &edges {
                if a && l && comps.comp_of[p] == comps.comp_of[q] {
                    good[comps.comp_of[p]] = true;
                }
            }
            let reach = if f == InfiniteValueFn::Inf {
                graph::forward_reachable(&sub, starts.iter().filter(|s| s.1).map(|&(q, _)| q))
            } else {
                graph::forward_reachable(&full, starts.iter().map(|&(q, _)| q))
            };
            (0..n).any(|v| reach[v] && good[comps.comp_of[v]])
        }
        _ => unreachable!("limit averages are rejected before the search"),
    }
}

/// Does every word have value at least `lambda`? Antichain search over finite-word
/// contexts; rejects incomplete automata and limit-average functions.
pub fn qa_universality(
    a: &Automaton<Weight>,
    f: InfiniteValueFn,
    lambda: &Weight,
) -> Result<Universality> {
    require_complete(a)?;
    qa_universality_ext(&to_ext(a), f, lambda, &Limits::none())
}

pub fn qa_universality_ext(
    a: &Automaton<ExtValue>,
    f: InfiniteValueFn,
    lambda: &Weight,
    limits: &Limits,
) -> Result<Universality> {
    if f.is_limit_average() {
        return Err(Error::Undecidable(format!(
            "{f} universality is undecidable"
        )));
    }
    let or = f.is_sup_like();
    let lam = ExtValue::Finite(lambda.clone());
    let n = a.num_states();
    let k = a.num_letters();
    let letter_ctx: Vec<Context> = (0..k)
        .map(|l| {
            let mut m: HashMap<(u32, u32), Mask> = HashMap::new();
            for t in a.transitions().iter().filter(|t| t.letter == l) {
                *m.entry((t.source as u32, t.target as u32)).or_default() |=
                    closure(a.is_final(t.target), t.weight >= lam);
            }
            let mut v: Vec<_> = m.into_iter().collect();
            v.sort_unstable();
            Context(v)
        })
        .collect();
    let init = a.initial() as u32;
    let row = |c: &Context| {
        Context(
            c.0.iter()
                .filter(|((p, _), _)| *p == init)
                .cloned()
                .collect(),
        )
    };

    // loops: contexts of nonempty words, explored breadth-first in length-lexicographic order
    let mut loops = Antichain::new();
    let mut queue = VecDeque::new();
    for (l, c) in letter_ctx.iter().enumerate() {
        if let Some(i) = loops.insert(c.clone(), vec![l]) {
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        limits.check()?;
        let Some((c, w)) = loops.items[i].clone() else {
            continue;
        };
        for (l, lc) in letter_ctx.iter().enumerate() {
            let next = c.compose(lc, or);
            let mut word = w.clone();
            word.push(l);
            if let Some(j) = loops.insert(next, word) {
                queue.push_back(j);
            }
        }
    }

    // stems: rows from the initial state, including the empty word
    let mut stems = Antichain::new();
    let eps = Context(vec![((init, init), closure(false, !or))]);
    let mut queue = VecDeque::new();
    if let Some(i) = stems.insert(eps, Vec::new()) {
        queue.push_back(i);
    }
    while let Some(i) = queue.pop_front() {
        limits.check()?;
        let Some((c, w)) = stems.items[i].clone() else {
            continue;
        };
        for (l, lc) in letter_ctx.iter().enumerate() {
            let next = row(&c.compose(lc, or));
            let mut word = w.clone();
            word.push(l);
            if let Some(j) = stems.insert(next, word) {
                queue.push_back(j);
            }
        }
    }

    let mut best: Option<Lasso> = None;
    let key = |l: &Lasso| {
        (
            l.stem.len() + l.cycle.len(),
            l.stem.len(),
            l.stem.clone(),
            l.cycle.clone(),
        )
    };
    for (sc, sw) in stems.live() {
        for (lc, lw) in loops.live() {
            limits.check()?;
            if !good_lasso_run(f, n, sc, lc) {
                let cand = Lasso::new(sw.clone(), lw.clone()).unwrap();
                if best.as_ref().is_none_or(|b| key(&cand) < key(b)) {
                    best = Some(cand);
                }
            }
        }
    }
    Ok(match best {
        Some(l) => Universality::Counterexample(l),
        None => Universality::Universal,
    })
}

/// Infimum over all words of the value of the unique run of a deterministic complete
/// automaton; words whose run is not accepting contribute NegInf.
pub fn bottom_value_det(a: &Automaton<Weight>, f: InfiniteValueFn) -> Result<ExtValue> {
    require_complete(a)?;
    if !a.is_deterministic() {
        return Err(Error::Nondeterministic(
            "bottom value needs a deterministic automaton".into(),
        ));
    }
    let adj = a.adjacency();
    let reach = graph::forward_reachable(&adj, [a.initial()]);
    // a reachable cycle avoiding F gives a rejected word
    let nonfinal: Vec<Vec<usize>> = (0..a.num_states())
        .map(|q| {
            if a.is_final(q) {
                Vec::new()
            } else {
                adj[q].iter().copied().filter(|&r| !a.is_final(r)).collect()
            }
        })
        .collect();
    let nc = graph::tarjan(&nonfinal);
    if (0..a.num_states()).any(|q| reach[q] && !a.is_final(q) && nc.cyclic[nc.comp_of[q]]) {
        return Ok(ExtValue::NegInf);
    }
    let mut distinct: Vec<Weight> = a.transitions().iter().map(|t| t.weight.clone()).collect();
    distinct.sort();
    distinct.dedup();
    let sub = |v: &Weight| -> Vec<Vec<usize>> {
        let mut s = vec![Vec::new(); a.num_states()];
        for t in a.transitions().iter().filter(|t| &t.weight <= v) {
            s[t.source].push(t.target);
        }
        s
    };
    let has_cycle_from = |adj: &[Vec<usize>], r: &[bool]| {
        let c = graph::tarjan(adj);
        (0..adj.len()).any(|q| r[q] && c.cyclic[c.comp_of[q]])
    };
    let fin = |w: &Weight| ExtValue::Finite(w.clone());
    Ok(match f {
        InfiniteValueFn::Inf => fin(a
            .transitions()
            .iter()
            .filter(|t| reach[t.source])
            .map(|t| &t.weight)
            .min()
            .unwrap()),
        InfiniteValueFn::Sup => {
            let v = distinct.iter().find(|v| {
                let s = sub(v);
                let r = graph::forward_reachable(&s, [a.initial()]);
                has_cycle_from(&s, &r)
            });
            fin(v.expect("complete automaton has a cycle"))
        }
        InfiniteValueFn::LimSup => {
            let v = distinct.iter().find(|v| has_cycle_from(&sub(v), &reach));
            fin(v.expect("complete automaton has a cycle"))
        }
        InfiniteValueFn::LimInf => {
            let comps = a.sccs();
            let v = a
                .transitions()
                .iter()
                .filter(|t| reach[t.source] && comps.scc_of[t.source] == comps.scc_of[t.target])
                .map(|t| &t.weight)
                .min();
            fin(v.expect("complete automaton has a cycle"))
        }
        InfiniteValueFn::LimInfAvg | InfiniteValueFn::LimSupAvg => {
            let comps = graph::tarjan(&adj);
            let ext = to_ext(a);
            let mut best: Option<Weight> = None;
            for c in 0..comps.len() {
                if !comps.cyclic[c] || !reach[comps.members[c][0]] {
                    continue;
                }
                let arcs: Vec<_> = component_arcs(&ext, &comps, c)?
                    .into_iter()
                    .map(|(u, v, w, e)| (u, v, -w, e))
                    .collect();
                let m = -karp_max_mean(comps.members[c].len(), &arcs).unwrap();
                if best.as_ref().is_none_or(|b| &m < b) {
                    best = Some(m);
                }
            }
            fin(&best.expect("complete automaton has a cycle"))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::build_automaton;
    use crate::value::{eval_lasso, PeriodicSeq};
    use proptest::prelude::*;

    fn w(x: i64) -> Weight {
        Weight::from_int(x)
    }

    fn qa(
        alphabet: &[&str],
        ts: &[(&str, &str, &str, i64)],
        init: &str,
        finals: &[&str],
    ) -> Automaton<Weight> {
        let ts: Vec<(&str, &str, &str, Weight)> =
            ts.iter().map(|&(s, l, t, x)| (s, l, t, w(x))).collect();
        build_automaton(alphabet, &ts, init, finals).unwrap()
    }

    /// Weight sequence of the unique run of a deterministic automaton on a lasso,
    /// unrolled until state and position repeat.
    fn det_run_value(a: &Automaton<Weight>, f: InfiniteValueFn, l: &Lasso) -> ExtValue {
        let mut q = a.initial();
        let mut seen = HashMap::new();
        let mut ws = Vec::new();
        let mut fin = Vec::new();
        let mut t = 0;
        loop {
            if t >= l.stem.len() {
                if let Some(&s) = seen.get(&(q, l.position(t))) {
                    let cycle: Vec<Weight> = ws[s..].to_vec();
                    if !fin[s..].iter().any(|&b| b) {
                        return ExtValue::NegInf;
                    }
                    return eval_lasso(f, &PeriodicSeq::new(ws[..s].to_vec(), cycle).unwrap());
                }
                seen.insert((q, l.position(t)), t);
            }
            let tr = a.successors(q, l.letter_at(t)).next().unwrap();
            ws.push(tr.weight.clone());
            fin.push(a.is_final(tr.target));
            q = tr.target;
            t += 1;
        }
    }

    #[test]
    fn top_value_examples() {
        let a = qa(
            &["a", "b"],
            &[("q", "a", "q", 1), ("q", "b", "q", 2)],
            "q",
            &["q"],
        );
        assert_eq!(
            top_value(&a, InfiniteValueFn::Sup).unwrap().value,
            ExtValue::from(2)
        );
        assert_eq!(
            top_value(&a, InfiniteValueFn::LimSupAvg).unwrap().value,
            ExtValue::from(2)
        );
        let b = qa(
            &["a"],
            &[("q0", "a", "q1", 3), ("q1", "a", "q1", 1)],
            "q0",
            &["q1"],
        );
        assert_eq!(
            top_value(&b, InfiniteValueFn::LimSupAvg).unwrap().value,
            ExtValue::from(1)
        );
        assert_eq!(
            top_value(&b, InfiniteValueFn::Sup).unwrap().value,
            ExtValue::from(3)
        );
        assert_eq!(
            top_value(&b, InfiniteValueFn::Inf).unwrap().value,
            ExtValue::from(1)
        );
        let inc = qa(&["a", "b"], &[("q", "a", "q", 1)], "q", &["q"]);
        assert!(matches!(
            top_value(&inc, InfiniteValueFn::Sup),
            Err(Error::Incomplete { .. })
        ));
    }

    #[test]
    fn emptiness_examples() {
        let a = qa(&["a"], &[("q", "a", "q", 2)], "q", &["q"]);
        assert!(qa_emptiness(&a, InfiniteValueFn::Sup, &w(2)).unwrap().0);
        assert!(
            !qa_emptiness(&a, InfiniteValueFn::Sup, &Weight::ratio(5, 2).unwrap())
                .unwrap()
                .0
        );
        let c = qa(
            &["a"],
            &[("p", "a", "q", 1), ("q", "a", "p", 3)],
            "p",
            &["p"],
        );
        let (yes, wit) = qa_emptiness(&c, InfiniteValueFn::LimSupAvg, &w(2)).unwrap();
        assert!(yes);
        assert!(wit.is_some());
        assert!(
            !qa_emptiness(
                &c,
                InfiniteValueFn::LimSupAvg,
                &Weight::ratio(9, 4).unwrap()
            )
            .unwrap()
            .0
        );
    }

    #[test]
    fn average_witness_pumps_cycle() {
        // best cycle (weight 4 self-loop on x) does not visit F; F is reached via y
        let a = qa(
            &["a", "b"],
            &[
                ("x", "a", "x", 4),
                ("x", "b", "y", 0),
                ("y", "a", "x", 0),
                ("y", "b", "x", 0),
            ],
            "x",
            &["y"],
        );
        let top = top_value(&a, InfiniteValueFn::LimSupAvg).unwrap();
        assert_eq!(top.value, ExtValue::from(4));
        assert!(top.witness.is_none());
        let (yes, wit) = qa_emptiness(
            &a,
            InfiniteValueFn::LimSupAvg,
            &Weight::ratio(7, 2).unwrap(),
        )
        .unwrap();
        assert!(yes);
        let wit = wit.unwrap();
        let v = qa_eval_lasso(&to_ext(&a), InfiniteValueFn::LimSupAvg, &wit).unwrap();
        assert!(v >= ExtValue::Finite(Weight::ratio(7, 2).unwrap()), "{v}");
        assert_eq!(
            qa_emptiness(&a, InfiniteValueFn::LimSupAvg, &w(4)).unwrap(),
            (true, None)
        );
    }

    #[test]
    fn universality_examples() {
        let a = qa(&["a"], &[("q", "a", "q", 1)], "q", &["q"]);
        assert_eq!(
            qa_universality(&a, InfiniteValueFn::Sup, &w(1)).unwrap(),
            Universality::Universal
        );
        assert_eq!(
            qa_universality(&a, InfiniteValueFn::Sup, &w(2)).unwrap(),
            Universality::Counterexample(Lasso::new(vec![], vec![0]).unwrap())
        );
        let b = qa(
            &["a", "b"],
            &[
                ("q", "a", "q", 5),
                ("q", "b", "s", 5),
                ("s", "a", "s", 5),
                ("s", "b", "s", 5),
            ],
            "q",
            &["q"],
        );
        for lam in [-100, 0, 5] {
            let Universality::Counterexample(l) =
                qa_universality(&b, InfiniteValueFn::Inf, &w(lam)).unwrap()
            else {
                panic!("expected counterexample");
            };
            assert_eq!(
                qa_eval_lasso(&to_ext(&b), InfiniteValueFn::Inf, &l).unwrap(),
                ExtValue::NegInf
            );
        }
        assert!(matches!(
            qa_universality(&a, InfiniteValueFn::LimSupAvg, &w(1)),
            Err(Error::Undecidable(_))
        ));
    }

    #[test]
    fn bottom_value_examples() {
        let a = qa(&["a"], &[("q", "a", "q", 1)], "q", &["q"]);
        assert_eq!(
            bottom_value_det(&a, InfiniteValueFn::Sup).unwrap(),
            ExtValue::from(1)
        );
        let b = qa(
            &["a", "b"],
            &[
                ("q", "a", "q", 5),
                ("q", "b", "s", 5),
                ("s", "a", "s", 5),
                ("s", "b", "s", 5),
            ],
            "q",
            &["q"],
        );
        assert_eq!(
            bottom_value_det(&b, InfiniteValueFn::Sup).unwrap(),
            ExtValue::NegInf
        );
        let c = qa(
            &["a", "b"],
            &[("q", "a", "q", 1), ("q", "b", "q", 3)],
            "q",
            &["q"],
        );
        assert_eq!(
            bottom_value_det(&c, InfiniteValueFn::LimInfAvg).unwrap(),
            ExtValue::from(1)
        );
    }

    fn brute_max_mean(n: usize, arcs: &[(usize, usize, Weight, ())]) -> Option<Weight> {
        // all simple cycles by DFS from their minimum vertex
        let mut best: Option<Weight> = None;
        fn dfs(
            start: usize,
            v: usize,
            arcs: &[(usize, usize, Weight, ())],
            on: &mut Vec<bool>,
            sum: Weight,
            len: i64,
            best: &mut Option<Weight>,
        ) {
            for (u, x, w, _) in arcs {
                if *u != v {
                    continue;
                }
                let s = &sum + w;
                if *x == start {
                    let m = &s / &Weight::from_int(len + 1);
                    if best.as_ref().is_none_or(|b| &m > b) {
                        *best = Some(m);
                    }
                } else if *x > start && !on[*x] {
                    on[*x] = true;
                    dfs(start, *x, arcs, on, s, len + 1, best);
                    on[*x] = false;
                }
            }
        }
        for s in 0..n {
            let mut on = vec![false; n];
            on[s] = true;
            dfs(s, s, arcs, &mut on, Weight::zero(), 0, &mut best);
        }
        best
    }

    fn random_qa(
        n: usize,
        k: usize,
        edges: &[(usize, usize, usize, i64)],
        finals: &[bool],
        det: bool,
    ) -> Automaton<Weight> {
        let alphabet: Vec<String> = (0..k).map(|i| format!("l{i}")).collect();
        let mut ts = Vec::new();
        for q in 0..n {
            for l in 0..k {
                // complete: a default transition for every (state, letter)
                let pick = edges
                    .iter()
                    .filter(|e| e.0 % n == q && e.1 % k == l)
                    .collect::<Vec<_>>();
                if pick.is_empty() {
                    ts.push(crate::automaton::Transition {
                        source: q,
                        letter: l,
                        target: (q + l + 1) % n,
                        weight: w(0),
                    });
                } else {
                    let take = if det { 1 } else { pick.len() };
                    for e in pick.into_iter().take(take) {
                        ts.push(crate::automaton::Transition {
                            source: q,
                            letter: l,
                            target: e.2 % n,
                            weight: w(e.3),
                        });
                    }
                }
            }
        }
        let names = (0..n).map(|i| format!("s{i}")).collect();
        Automaton::from_parts(alphabet, names, 0, ts, finals[..n].to_vec()).unwrap()
    }

    proptest! {
        #[test]
        fn karp_matches_brute_force(
            n in 1usize..=7,
            raw in proptest::collection::vec((0usize..7, 0usize..7, -5i64..6), 1..20)
        ) {
            let arcs: Vec<(usize, usize, Weight, ())> = raw.iter().filter(|e| e.0 < n && e.1 < n).map(|&(u, v, x)| (u, v, w(x), ())).collect();
            prop_assume!(!arcs.is_empty());
            let adj = {
                let mut a = vec![Vec::new(); n];
                for (u, v, _, _) in &arcs { a[*u].push(*v); }
                a
            };
            let comps = graph::tarjan(&adj);
            for (c, members) in comps.members.iter().enumerate() {
                if !comps.cyclic[c] { continue; }
                let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &q)| (q, i)).collect();
                let sub: Vec<_> = arcs.iter().filter(|a| comps.comp_of[a.0] == c && comps.comp_of[a.1] == c)
                    .map(|(u, v, x, _)| (local[u], local[v], x.clone(), ())).collect();
                prop_assert_eq!(karp_max_mean(members.len(), &sub), brute_max_mean(members.len(), &sub));
            }
        }

        #[test]
        fn universality_matches_deterministic_bottom(
            n in 1usize..=5,
            k in 1usize..=3,
            edges in proptest::collection::vec((0usize..5, 0usize..3, 0usize..5, -2i64..3), 0..15),
            finals in proptest::collection::vec(any::<bool>(), 5),
            fi in 0usize..4,
            lam in -2i64..4,
        ) {
            let a = random_qa(n, k, &edges, &finals, true);
            let f = [InfiniteValueFn::Inf, InfiniteValueFn::Sup, InfiniteValueFn::LimInf, InfiniteValueFn::LimSup][fi];
            let bottom = bottom_value_det(&a, f).unwrap();
            let verdict = qa_universality(&a, f, &w(lam)).unwrap();
            prop_assert_eq!(verdict.is_universal(), bottom >= ExtValue::from(lam));
            if let Universality::Counterexample(l) = verdict {
                prop_assert!(det_run_value(&a, f, &l) < ExtValue::from(lam));
            }
        }

        #[test]
        fn top_value_witness_and_monotonicity(
            n in 1usize..=5,
            k in 1usize..=2,
            edges in proptest::collection::vec((0usize..5, 0usize..2, 0usize..5, -3i64..4), 0..14),
            extra in (0usize..5, 0usize..2, 0usize..5, -3i64..4),
            finals in proptest::collection::vec(any::<bool>(), 5),
            fi in 0usize..6,
        ) {
            let f = InfiniteValueFn::ALL[fi];
            let a = random_qa(n, k, &edges, &finals, false);
            let r = top_value(&a, f).unwrap();
            if let Some(l) = &r.witness {
                prop_assert_eq!(qa_eval_lasso(&to_ext(&a), f, l).unwrap(), r.value.clone());
            } else if !f.is_limit_average() {
                prop_assert_eq!(r.value.clone(), ExtValue::NegInf);
            }
            let mut more = edges.clone();
            more.push(extra);
            let b = random_qa(n, k, &more, &finals, false);
            // adding a transition for an already-covered pair keeps the old ones
            if edges.iter().any(|e| e.0 % n == extra.0 % n && e.1 % k == extra.1 % k) {
                prop_assert!(top_value(&b, f).unwrap().value >= r.value);
            }
        }
    }
}
