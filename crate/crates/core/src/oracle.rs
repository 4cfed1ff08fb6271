//! Direct evaluation of an NQA on a lasso word by simulating its run(s).
//!
//! These evaluators do not use any flattening and serve as reference semantics.

use std::collections::{HashMap, VecDeque};

use crate::automaton::StateId;
use crate::error::{Error, Result};
use crate::graph;
use crate::lasso::Lasso;
use crate::nested::NestedAutomaton;
use crate::value::{eval_lasso, Accumulator, FiniteValueFn, InfiniteValueFn, PeriodicSeq};
use crate::weight::{ExtValue, Weight};

/// Default cap on stored configurations.
pub const DEFAULT_CAPACITY: usize = 1_000_000;

/// Exact value of the unique run of a deterministic NQA on `lasso`.
pub fn nqa_eval_lasso(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    lasso: &Lasso,
) -> Result<ExtValue> {
    nqa_eval_lasso_capped(n, f, g, lasso, DEFAULT_CAPACITY)
}

struct Inst {
    child: usize,
    state: StateId,
    acc: Accumulator,
    spawn: usize,
    born: usize,
}

/// Deterministic simulation with repetition detection on
/// `(parent state, position, multiset of active children)`.
pub fn nqa_eval_lasso_capped(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    lasso: &Lasso,
    capacity: usize,
) -> Result<ExtValue> {
    n.require_deterministic()?;
    let parent = n.parent();
    let stem = lasso.stem.len();
    // A child alive longer than this repeats (state, loop position) and never accepts.
    let lifetime: Vec<usize> = n
        .children()
        .iter()
        .map(|c| stem + c.num_states() * lasso.cycle.len() + 1)
        .collect();

    let mut q = parent.initial();
    let mut active: Vec<Inst> = Vec::new();
    let mut returns: Vec<Option<Weight>> = Vec::new();
    let mut final_at: Vec<bool> = Vec::new();
    let mut seen: HashMap<(StateId, usize, Vec<(usize, StateId, Accumulator)>), (usize, usize)> =
        HashMap::new();
    let mut period: Option<(usize, usize, usize)> = None;
    let mut t = 0usize;

    loop {
        if period.is_none() && t >= stem {
            let mut multiset: Vec<(usize, StateId, Accumulator)> = active
                .iter()
                .map(|i| (i.child, i.state, i.acc.clone()))
                .collect();
            multiset.sort();
            let key = (q, lasso.position(t), multiset);
            if let Some(&(t1, c1)) = seen.get(&key) {
                let c2 = returns.len();
                if c2 == c1 || !final_at[t1..t].iter().any(|&b| b) {
                    return Ok(ExtValue::NegInf);
                }
                period = Some((t1, c1, c2));
            } else {
                if seen.len() >= capacity {
                    return Err(Error::OracleCapacity(capacity));
                }
                seen.insert(key, (t, returns.len()));
            }
        }
        if let Some((_, _, c2)) = period {
            if returns[..c2].iter().all(Option::is_some) {
                break;
            }
        }

        final_at.push(parent.is_final(q));
        let a = lasso.letter_at(t);
        let Some(tr) = parent.successors(q, a).next() else {
            return Ok(ExtValue::NegInf);
        };
        q = tr.target;
        if let Some(j) = tr.weight.child() {
            active.push(Inst {
                child: j,
                state: n.child(j).base().initial(),
                acc: g.start(),
                spawn: returns.len(),
                born: t,
            });
            returns.push(None);
        }
        let mut next = Vec::with_capacity(active.len());
        for inst in active {
            let b = n.child(inst.child).base();
            let Some(ct) = b.successors(inst.state, a).next() else {
                return Ok(ExtValue::NegInf);
            };
            let acc = g.step(&inst.acc, &ct.weight);
            if b.is_final(ct.target) {
                returns[inst.spawn] = g.finish(&acc);
            } else if t + 1 - inst.born > lifetime[inst.child] {
                return Ok(ExtValue::NegInf);
            } else {
                next.push(Inst {
                    state: ct.target,
                    acc,
                    ..inst
                });
            }
        }
        active = next;
        t += 1;
    }

    let (_, c1, c2) = period.expect("loop exits after a period is found");
    let values: Vec<Weight> = returns[..c2].iter().map(|v| v.clone().unwrap()).collect();
    let seq = PeriodicSeq::new(values[..c1].to_vec(), values[c1..c2].to_vec())
        .expect("period contains a spawn");
    Ok(eval_lasso(f, &seq))
}

/// Edge of the explored configuration graph.
struct ConfigEdge {
    from: usize,
    to: usize,
    values: Vec<Weight>,
    parent_final: bool,
    spawn: bool,
    /// The oldest active child terminated, or none was active.
    fair: bool,
}

type Config = (StateId, usize, Vec<(usize, StateId, Accumulator)>);

/// Best value over accepting runs of a possibly nondeterministic NQA on `lasso`,
/// exploring at most `budget` configurations. Exhausting the budget yields
/// [`Error::BudgetExhausted`] carrying the best value found in the explored part,
/// which is a lower bound on the true value.
pub fn nqa_eval_lasso_nondet(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    lasso: &Lasso,
    budget: usize,
) -> Result<ExtValue> {
    if budget == 0 {
        return Err(Error::BudgetExhausted {
            bound: ExtValue::NegInf,
        });
    }
    let parent = n.parent();
    let mut ids: HashMap<Config, usize> = HashMap::new();
    let mut configs: Vec<Config> = Vec::new();
    let mut edges: Vec<ConfigEdge> = Vec::new();
    let start: Config = (parent.initial(), 0, Vec::new());
    ids.insert(start.clone(), 0);
    configs.push(start);
    let mut queue = VecDeque::from([0usize]);
    let mut exhausted = false;

    while let Some(u) = queue.pop_front() {
        let (q, pos, list) = configs[u].clone();
        let a = lasso.letter_at(pos);
        let next_pos = lasso.next_position(pos);
        for tr in parent.successors(q, a) {
            let mut insts = list.clone();
            let spawn = tr.weight.child().is_some();
            if let Some(j) = tr.weight.child() {
                insts.push((j, n.child(j).base().initial(), g.start()));
            }
            // Per instance: Ok(value) terminates, Err((state, acc)) continues.
            let mut options: Vec<Vec<std::result::Result<Weight, (StateId, Accumulator)>>> =
                Vec::with_capacity(insts.len());
            for (j, s, acc) in &insts {
                let child = n.child(*j);
                let b = child.base();
                let mut opts = Vec::new();
                for ct in b.successors(*s, a) {
                    let acc2 = g.step(acc, &ct.weight);
                    if b.is_final(ct.target) {
                        opts.push(Ok(g.finish(&acc2).unwrap()));
                    }
                    if child.has_outgoing(ct.target) {
                        opts.push(Err((ct.target, acc2)));
                    }
                }
                opts.sort_by(|x, y| match (x, y) {
                    (Ok(v), Ok(w)) => v.cmp(w),
                    (Ok(_), Err(_)) => std::cmp::Ordering::Less,
                    (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
                    (Err(x), Err(y)) => x.cmp(y),
                });
                opts.dedup();
                options.push(opts);
            }
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            let mut choice = vec![0usize; insts.len()];
            loop {
                let mut values = Vec::new();
                let mut rest = Vec::new();
                for (i, opts) in options.iter().enumerate() {
                    match &opts[choice[i]] {
                        Ok(v) => values.push(v.clone()),
                        Err((s, acc)) => rest.push((insts[i].0, *s, acc.clone())),
                    }
                }
                let fair = list.is_empty() || options[0][choice[0]].is_ok();
                let target: Config = (tr.target, next_pos, rest);
                let v = match ids.get(&target) {
                    Some(&v) => Some(v),
                    None if configs.len() < budget => {
                        let v = configs.len();
                        ids.insert(target.clone(), v);
                        configs.push(target);
                        queue.push_back(v);
                        Some(v)
                    }
                    None => {
                        exhausted = true;
                        None
                    }
                };
                if let Some(v) = v {
                    edges.push(ConfigEdge {
                        from: u,
                        to: v,
                        values,
                        parent_final: parent.is_final(q),
                        spawn,
                        fair,
                    });
                }
                // advance the mixed-radix choice vector
                let mut i = 0;
                while i < choice.len() {
                    choice[i] += 1;
                    if choice[i] < options[i].len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
                if i == choice.len() {
                    break;
                }
            }
        }
    }

    let best = best_run_value(configs.len(), &edges, f);
    if exhausted {
        Err(Error::BudgetExhausted { bound: best })
    } else {
        Ok(best)
    }
}

/// Nodes lying in an SCC (of the `allowed` subgraph) whose internal edges carry all
/// three acceptance marks.
fn good_nodes(
    num: usize,
    edges: &[ConfigEdge],
    allowed: &dyn Fn(&ConfigEdge) -> bool,
) -> (Vec<bool>, graph::Components) {
    let mut adj = vec![Vec::new(); num];
    for e in edges.iter().filter(|e| allowed(e)) {
        adj[e.from].push(e.to);
    }
    let comps = graph::tarjan(&adj);
    let mut marks = vec![[false; 3]; comps.len()];
    for e in edges.iter().filter(|e| allowed(e)) {
        let c = comps.comp_of[e.from];
        if c == comps.comp_of[e.to] {
            marks[c][0] |= e.parent_final;
            marks[c][1] |= e.spawn;
            marks[c][2] |= e.fair;
        }
    }
    let good = (0..num)
        .map(|v| marks[comps.comp_of[v]] == [true; 3])
        .collect();
    (good, comps)
}

fn adjacency(
    num: usize,
    edges: &[ConfigEdge],
    allowed: &dyn Fn(&ConfigEdge) -> bool,
) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); num];
    for e in edges.iter().filter(|e| allowed(e)) {
        adj[e.from].push(e.to);
    }
    adj
}

/// Vertices that can reach some marked vertex.
fn can_reach(adj: &[Vec<usize>], marked: &[bool]) -> Vec<bool> {
    let rev = graph::transpose(adj);
    graph::forward_reachable(&rev, (0..adj.len()).filter(|&v| marked[v]))
}

fn best_run_value(num: usize, edges: &[ConfigEdge], f: InfiniteValueFn) -> ExtValue {
    let all = |_: &ConfigEdge| true;
    let full_adj = adjacency(num, edges, &all);
    let reach = graph::forward_reachable(&full_adj, [0]);
    let mut distinct: Vec<Weight> = edges
        .iter()
        .flat_map(|e| e.values.iter().cloned())
        .collect();
    distinct.sort();
    distinct.dedup();
    match f {
        InfiniteValueFn::Sup => {
            let (good, _) = good_nodes(num, edges, &all);
            let live = can_reach(&full_adj, &good);
            edges
                .iter()
                .filter(|e| reach[e.from] && live[e.to])
                .flat_map(|e| e.values.iter())
                .max()
                .map_or(ExtValue::NegInf, |v| ExtValue::Finite(v.clone()))
        }
        InfiniteValueFn::LimSup => {
            let (good, comps) = good_nodes(num, edges, &all);
            edges
                .iter()
                .filter(|e| {
                    reach[e.from] && good[e.from] && comps.comp_of[e.from] == comps.comp_of[e.to]
                })
                .flat_map(|e| e.values.iter())
                .max()
                .map_or(ExtValue::NegInf, |v| ExtValue::Finite(v.clone()))
        }
        InfiniteValueFn::Inf | InfiniteValueFn::LimInf => {
            for c in distinct.iter().rev() {
                let allowed = |e: &ConfigEdge| e.values.iter().all(|v| v >= c);
                let (good, _) = good_nodes(num, edges, &allowed);
                let ok = if f == InfiniteValueFn::Inf {
                    let r = graph::forward_reachable(&adjacency(num, edges, &allowed), [0]);
                    (0..num).any(|v| r[v] && good[v])
                } else {
                    (0..num).any(|v| reach[v] && good[v])
                };
                if ok {
                    return ExtValue::Finite(c.clone());
                }
            }
            ExtValue::NegInf
        }
        InfiniteValueFn::LimInfAvg | InfiniteValueFn::LimSupAvg => {
            let (good, comps) = good_nodes(num, edges, &all);
            let mut best = ExtValue::NegInf;
            for (c, members) in comps.members.iter().enumerate() {
                let v0 = members[0];
                if !good[v0] || !reach[v0] {
                    continue;
                }
                let internal: Vec<&ConfigEdge> = edges
                    .iter()
                    .filter(|e| comps.comp_of[e.from] == c && comps.comp_of[e.to] == c)
                    .collect();
                if let Some(r) = max_ratio_cycle(members, &internal) {
                    best = best.max(ExtValue::Finite(r));
                }
            }
            best
        }
    }
}

/// Maximum of `sum(values) / count(values)` over cycles with a positive count, by
/// Dinkelbach iteration with Bellman-Ford positive-cycle detection.
fn max_ratio_cycle(members: &[usize], edges: &[&ConfigEdge]) -> Option<Weight> {
    let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let m = members.len();
    let arcs: Vec<(usize, usize, Weight, i64)> = edges
        .iter()
        .map(|e| {
            (
                local[&e.from],
                local[&e.to],
                e.values.iter().cloned().sum::<Weight>(),
                e.values.len() as i64,
            )
        })
        .collect();
    let min = edges.iter().flat_map(|e| e.values.iter()).min()?.clone();
    let mut lambda = min - Weight::one();
    let mut found = None;
    loop {
        let w: Vec<Weight> = arcs
            .iter()
            .map(|(_, _, s, c)| s - &(&lambda * &Weight::from_int(*c)))
            .collect();
        let Some(cycle) = positive_cycle(m, &arcs, &w) else {
            return found;
        };
        let (sum, cnt) = cycle.iter().fold((Weight::zero(), 0i64), |(s, c), &i| {
            (s + &arcs[i].2, c + arcs[i].3)
        });
        debug_assert!(cnt > 0);
        let ratio = sum / Weight::from_int(cnt);
        if found.as_ref().is_some_and(|f| &ratio <= f) {
            return found;
        }
        lambda = ratio.clone();
        found = Some(ratio);
    }
}

/// Arc indices of some cycle of positive total weight, if one exists.
fn positive_cycle(
    m: usize,
    arcs: &[(usize, usize, Weight, i64)],
    w: &[Weight],
) -> Option<Vec<usize>> {
    let mut dist = vec![Weight::zero(); m];
    let mut pred: Vec<Option<usize>> = vec![None; m];
    let mut last = None;
    for _ in 0..m {
        last = None;
        for (i, (u, v, _, _)) in arcs.iter().enumerate() {
            let cand = &dist[*u] + &w[i];
            if cand > dist[*v] {
                dist[*v] = cand;
                pred[*v] = Some(i);
                last = Some(*v);
            }
        }
        last?;
    }
    let mut v = last?;
    for _ in 0..m {
        v = arcs[pred[v]?].0;
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let i = pred[v]?;
        cycle.push(i);
        v = arcs[i].0;
        if v == start {
            break;
        }
    }
    cycle.reverse();
    let total: Weight = cycle.iter().map(|&i| w[i].clone()).sum();
    total.is_positive().then_some(cycle)
}
