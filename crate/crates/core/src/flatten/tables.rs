//! Child × tracker product tables used by the obligation-based flattenings.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use crate::automaton::{Letter, StateId};
use crate::error::Result;
use crate::limits::Limits;
use crate::nested::ChildAutomaton;
use crate::weight::Weight;

/// Nodes are `(child state, tracker tag)` pairs reachable from the start node, which
/// has read nothing yet. A node is terminal for goal `g` when its child state is final
/// and the tag classifies to `goal_keys[g]`.
#[derive(Clone, Debug)]
pub struct ProductTable {
    pub child_state: Vec<StateId>,
    succ: Vec<Vec<Vec<u32>>>,
    pub start: u32,
    goal: Vec<Option<u32>>,
    live: Vec<Vec<bool>>,
    pub goal_keys: Vec<Weight>,
}

/// Result of advancing a frontier by one letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Advance {
    Dead,
    Discharged,
    Alive(Vec<u32>),
}

impl ProductTable {
    /// `step` returns `None` when the tracker rejects; `classify` gives the goal key of a
    /// tag at a final child state.
    pub fn build<T: Clone + Eq + Hash>(
        child: &ChildAutomaton,
        start: T,
        step: impl Fn(&T, &Weight) -> Option<T>,
        classify: impl Fn(&T) -> Option<Weight>,
        limits: &Limits,
    ) -> Result<Self> {
        let b = child.base();
        let k = b.num_letters();
        let mut ids: HashMap<(StateId, T, bool), u32> = HashMap::new();
        let mut nodes: Vec<(StateId, T, bool)> = Vec::new();
        let mut succ: Vec<Vec<Vec<u32>>> = Vec::new();
        let root = (b.initial(), start, false);
        ids.insert(root.clone(), 0);
        nodes.push(root);
        let mut queue = VecDeque::from([0u32]);
        while let Some(u) = queue.pop_front() {
            limits.check_states(nodes.len())?;
            let (s, tag, _) = nodes[u as usize].clone();
            let mut row = vec![Vec::new(); k];
            for t in b.outgoing(s) {
                let Some(tag2) = step(&tag, &t.weight) else {
                    continue;
                };
                let key = (t.target, tag2, true);
                let v = match ids.get(&key) {
                    Some(&v) => v,
                    None => {
                        let v = nodes.len() as u32;
                        ids.insert(key.clone(), v);
                        nodes.push(key);
                        queue.push_back(v);
                        v
                    }
                };
                row[t.letter].push(v);
            }
            for r in &mut row {
                r.sort_unstable();
                r.dedup();
            }
            if succ.len() <= u as usize {
                succ.resize(u as usize + 1, Vec::new());
            }
            succ[u as usize] = row;
        }
        succ.resize(nodes.len(), vec![Vec::new(); k]);

        let keys_of: Vec<Option<Weight>> = nodes
            .iter()
            .map(|(s, tag, read)| {
                if *read && b.is_final(*s) {
                    classify(tag)
                } else {
                    None
                }
            })
            .collect();
        let mut goal_keys: Vec<Weight> = keys_of.iter().flatten().cloned().collect();
        goal_keys.sort();
        goal_keys.dedup();
        let goal: Vec<Option<u32>> = keys_of
            .iter()
            .map(|k| {
                k.as_ref()
                    .map(|k| goal_keys.binary_search(k).unwrap() as u32)
            })
            .collect();

        let mut rev = vec![Vec::new(); nodes.len()];
        for (u, row) in succ.iter().enumerate() {
            for list in row {
                for &v in list {
                    rev[v as usize].push(u);
                }
            }
        }
        let live = (0..goal_keys.len())
            .map(|g| {
                let sources = (0..nodes.len()).filter(|&v| goal[v] == Some(g as u32));
                crate::graph::forward_reachable(&rev, sources)
            })
            .collect();
        Ok(ProductTable {
            child_state: nodes.iter().map(|n| n.0).collect(),
            succ,
            start: 0,
            goal,
            live,
            goal_keys,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.child_state.len()
    }

    pub fn goal_of_key(&self, key: &Weight) -> Option<u32> {
        self.goal_keys.binary_search(key).ok().map(|g| g as u32)
    }

    pub fn successors(&self, node: u32, a: Letter) -> &[u32] {
        &self.succ[node as usize][a]
    }

    pub fn goal(&self, node: u32) -> Option<u32> {
        self.goal[node as usize]
    }

    pub fn can_realize(&self, node: u32, goal: u32) -> bool {
        self.live[goal as usize][node as usize]
    }

    /// Advances a frontier towards `goal`; discharges as soon as a node realizes it.
    pub fn advance(&self, frontier: &[u32], goal: u32, a: Letter) -> Advance {
        let mut next: Vec<u32> = frontier
            .iter()
            .flat_map(|&x| self.successors(x, a).iter().copied())
            .filter(|&y| self.can_realize(y, goal))
            .collect();
        if next.is_empty() {
            return Advance::Dead;
        }
        if next.iter().any(|&y| self.goal(y) == Some(goal)) {
            return Advance::Discharged;
        }
        next.sort_unstable();
        next.dedup();
        Advance::Alive(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::build_automaton;
    use crate::value::FiniteValueFn;

    #[test]
    fn sum_b_table_for_step_counter() {
        let c = build_automaton(
            &["r", "g", "o"],
            &[
                ("c0", "r", "c0", Weight::from_int(1)),
                ("c0", "o", "c0", Weight::from_int(1)),
                ("c0", "g", "c1", Weight::from_int(0)),
            ],
            "c0",
            &["c1"],
        )
        .unwrap();
        let child = ChildAutomaton::new(c);
        let g = FiniteValueFn::SumB(Weight::from_int(2));
        let t = ProductTable::build(
            &child,
            g.start(),
            |acc, w| Some(g.step(acc, w)),
            |acc| g.finish(acc),
            &Limits::none(),
        )
        .unwrap();
        let keys: Vec<String> = t.goal_keys.iter().map(|w| w.to_string()).collect();
        assert_eq!(keys, ["0", "1", "2"]);
        let two = t.goal_of_key(&Weight::from_int(2)).unwrap();
        // r o g returns 2
        let Advance::Alive(f1) = t.advance(&[t.start], two, 0) else {
            panic!()
        };
        let Advance::Alive(f2) = t.advance(&f1, two, 2) else {
            panic!()
        };
        assert_eq!(t.advance(&f2, two, 1), Advance::Discharged);
        // r g cannot return 2
        let one = t.goal_of_key(&Weight::from_int(1)).unwrap();
        assert_eq!(t.advance(&f1, one, 1), Advance::Discharged);
        assert_eq!(t.advance(&f2, one, 1), Advance::Dead);
    }
}
