//! Value-function-free automata and their structural algorithms.
//!
//! An [`Automaton`] is generic over the payload `W` carried by each transition: exact
//! [`Weight`](crate::Weight)s for quantitative automata, child labels for NQA parents,
//! and extended or silent weights for flattened automata. Construction prunes states
//! unreachable from the initial state, renumbers the remaining states densely in BFS
//! order (so the initial state is always `0`), deduplicates identical transitions and
//! caches adjacency lists together with the SCC decomposition.

use std::collections::{HashMap, VecDeque};
use std::fmt::Debug;

use crate::error::AutomatonError;
use crate::graph::{self, Components};

pub type StateId = usize;
pub type Letter = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition<W> {
    pub source: StateId,
    pub letter: Letter,
    pub target: StateId,
    pub weight: W,
}

/// SCCs of an automaton's transition graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccDecomposition {
    pub scc_of: Vec<usize>,
    pub members: Vec<Vec<StateId>>,
    /// Component ids in reverse topological order (sinks first).
    pub order: Vec<usize>,
    /// Component contains an internal cycle.
    pub cyclic: Vec<bool>,
    /// Component contains a final state and an internal cycle.
    pub accepting: Vec<bool>,
}

impl SccDecomposition {
    pub fn compute(adj: &[Vec<usize>], finals: &[bool]) -> Self {
        let Components {
            comp_of,
            members,
            cyclic,
        } = graph::tarjan(adj);
        let accepting = members
            .iter()
            .zip(&cyclic)
            .map(|(m, &c)| c && m.iter().any(|&q| finals[q]))
            .collect();
        let order = (0..members.len()).collect();
        SccDecomposition {
            scc_of: comp_of,
            members,
            order,
            cyclic,
            accepting,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn in_accepting(&self, q: StateId) -> bool {
        self.accepting[self.scc_of[q]]
    }
}

#[derive(Clone, Debug)]
pub struct Automaton<W> {
    alphabet: Vec<String>,
    state_names: Vec<String>,
    initial: StateId,
    transitions: Vec<Transition<W>>,
    finals: Vec<bool>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    sccs: SccDecomposition,
}

impl<W: Clone + Ord + Debug> Automaton<W> {
    /// Builds an automaton from index-based parts, pruning unreachable states.
    ///
    /// An empty transition list is accepted here (flattening constructions may produce
    /// one); the named [`AutomatonBuilder`] rejects it.
    pub fn from_parts(
        alphabet: Vec<String>,
        state_names: Vec<String>,
        initial: StateId,
        transitions: Vec<Transition<W>>,
        finals: Vec<bool>,
    ) -> Result<Self, AutomatonError> {
        if alphabet.is_empty() {
            return Err(AutomatonError::EmptyAlphabet);
        }
        let n = state_names.len();
        if initial >= n {
            return Err(AutomatonError::UnknownStateId(initial));
        }
        if finals.len() != n {
            return Err(AutomatonError::UnknownStateId(finals.len()));
        }
        for t in &transitions {
            if t.source >= n {
                return Err(AutomatonError::UnknownStateId(t.source));
            }
            if t.target >= n {
                return Err(AutomatonError::UnknownStateId(t.target));
            }
            if t.letter >= alphabet.len() {
                return Err(AutomatonError::UnknownLetter(format!("#{}", t.letter)));
            }
        }

        let mut out_raw: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            out_raw[t.source].push(i);
        }
        // BFS renumbering from the initial state; successors visited in transition order
        // sorted by (letter, target) so that the numbering is canonical.
        for list in &mut out_raw {
            list.sort_by(|&a, &b| {
                let (ta, tb) = (&transitions[a], &transitions[b]);
                (ta.letter, ta.target, &ta.weight).cmp(&(tb.letter, tb.target, &tb.weight))
            });
        }
        let mut new_id = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        new_id[initial] = 0;
        order.push(initial);
        let mut queue = VecDeque::from([initial]);
        while let Some(q) = queue.pop_front() {
            for &i in &out_raw[q] {
                let t = transitions[i].target;
                if new_id[t] == usize::MAX {
                    new_id[t] = order.len();
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }

        let mut kept: Vec<Transition<W>> = transitions
            .into_iter()
            .filter(|t| new_id[t.source] != usize::MAX)
            .map(|t| Transition {
                source: new_id[t.source],
                letter: t.letter,
                target: new_id[t.target],
                weight: t.weight,
            })
            .collect();
        kept.sort();
        kept.dedup();

        let names: Vec<String> = order.iter().map(|&q| state_names[q].clone()).collect();
        let fin: Vec<bool> = order.iter().map(|&q| finals[q]).collect();
        Ok(Self::assemble(alphabet, names, kept, fin))
    }

    fn assemble(
        alphabet: Vec<String>,
        state_names: Vec<String>,
        transitions: Vec<Transition<W>>,
        finals: Vec<bool>,
    ) -> Self {
        let n = state_names.len();
        let mut outgoing = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.source].push(i);
            incoming[t.target].push(i);
        }
        let adj: Vec<Vec<usize>> = outgoing
            .iter()
            .map(|ts| ts.iter().map(|&i| transitions[i].target).collect())
            .collect();
        let sccs = SccDecomposition::compute(&adj, &finals);
        Automaton {
            alphabet,
            state_names,
            initial: 0,
            transitions,
            finals,
            outgoing,
            incoming,
            sccs,
        }
    }

    /// Same structure with transformed payloads. States are not re-pruned.
    pub fn map_weights<V: Clone + Ord + Debug>(&self, mut f: impl FnMut(&W) -> V) -> Automaton<V> {
        let mut transitions: Vec<Transition<V>> = self
            .transitions
            .iter()
            .map(|t| Transition {
                source: t.source,
                letter: t.letter,
                target: t.target,
                weight: f(&t.weight),
            })
            .collect();
        transitions.sort();
        transitions.dedup();
        Automaton::assemble(
            self.alphabet.clone(),
            self.state_names.clone(),
            transitions,
            self.finals.clone(),
        )
    }

    /// Same structure with a different accepting set.
    pub fn with_finals(&self, finals: Vec<bool>) -> Self {
        assert_eq!(finals.len(), self.num_states());
        Automaton::assemble(
            self.alphabet.clone(),
            self.state_names.clone(),
            self.transitions.clone(),
            finals,
        )
    }

    /// Same structure over another alphabet with identical letter indices, e.g. to give a
    /// child automaton its parent's alphabet.
    pub fn with_alphabet(&self, alphabet: Vec<String>) -> Self {
        assert!(alphabet.len() >= self.alphabet.len());
        Automaton::assemble(
            alphabet,
            self.state_names.clone(),
            self.transitions.clone(),
            self.finals.clone(),
        )
    }
}

impl<W> Automaton<W> {
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_letters(&self) -> usize {
        self.alphabet.len()
    }

    pub fn letter_name(&self, a: Letter) -> &str {
        &self.alphabet[a]
    }

    pub fn letter_index(&self, name: &str) -> Option<Letter> {
        self.alphabet.iter().position(|l| l == name)
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition<W>] {
        &self.transitions
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> &[bool] {
        &self.finals
    }

    pub fn all_final(&self) -> bool {
        self.finals.iter().all(|&f| f)
    }

    pub fn outgoing(&self, q: StateId) -> impl Iterator<Item = &Transition<W>> + '_ {
        self.outgoing[q].iter().map(move |&i| &self.transitions[i])
    }

    /// Indices into [`Automaton::transitions`] of the transitions leaving `q`.
    pub fn outgoing_ids(&self, q: StateId) -> &[usize] {
        &self.outgoing[q]
    }

    pub fn incoming(&self, q: StateId) -> impl Iterator<Item = &Transition<W>> + '_ {
        self.incoming[q].iter().map(move |&i| &self.transitions[i])
    }

    /// Outgoing transitions of `q` on letter `a`.
    pub fn successors(&self, q: StateId, a: Letter) -> impl Iterator<Item = &Transition<W>> + '_ {
        self.outgoing(q).filter(move |t| t.letter == a)
    }

    pub fn sccs(&self) -> &SccDecomposition {
        &self.sccs
    }

    /// Successor lists (targets only, duplicates possible).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.outgoing
            .iter()
            .map(|ts| ts.iter().map(|&i| self.transitions[i].target).collect())
            .collect()
    }

    /// First `(state, letter)` pair without an outgoing transition, if any.
    pub fn missing_transition(&self) -> Option<(StateId, Letter)> {
        let k = self.alphabet.len();
        for q in 0..self.num_states() {
            let mut seen = vec![false; k];
            for t in self.outgoing(q) {
                seen[t.letter] = true;
            }
            if let Some(a) = seen.iter().position(|&s| !s) {
                return Some((q, a));
            }
        }
        None
    }

    /// Every state has at least one outgoing transition per letter.
    pub fn is_complete(&self) -> bool {
        self.missing_transition().is_none()
    }

    /// No state has two outgoing transitions on the same letter.
    pub fn is_deterministic(&self) -> bool {
        let k = self.alphabet.len();
        (0..self.num_states()).all(|q| {
            let mut seen = vec![false; k];
            self.outgoing(q)
                .all(|t| !std::mem::replace(&mut seen[t.letter], true))
        })
    }

    fn check_states(&self, set: &[StateId]) -> Result<(), AutomatonError> {
        match set.iter().find(|&&q| q >= self.num_states()) {
            Some(&q) => Err(AutomatonError::UnknownStateId(q)),
            None => Ok(()),
        }
    }

    /// Whether some state of `to` is reachable (in zero or more steps) from some state of `from`.
    pub fn reachable_between(
        &self,
        from: &[StateId],
        to: &[StateId],
    ) -> Result<bool, AutomatonError> {
        self.check_states(from)?;
        self.check_states(to)?;
        let seen = graph::forward_reachable(&self.adjacency(), from.iter().copied());
        Ok(to.iter().any(|&q| seen[q]))
    }

    /// Marks every state from which some target is reachable (targets included).
    pub fn reverse_reachability_table(
        &self,
        targets: &[StateId],
    ) -> Result<Vec<bool>, AutomatonError> {
        self.check_states(targets)?;
        let rev = graph::transpose(&self.adjacency());
        Ok(graph::forward_reachable(&rev, targets.iter().copied()))
    }

    /// States from which an accepting SCC is reachable.
    pub fn can_reach_accepting(&self) -> Vec<bool> {
        let targets: Vec<StateId> = (0..self.num_states())
            .filter(|&q| self.sccs.in_accepting(q))
            .collect();
        let rev = graph::transpose(&self.adjacency());
        graph::forward_reachable(&rev, targets)
    }
}

/// Builds automata from state and letter names.
#[derive(Clone, Debug)]
pub struct AutomatonBuilder<W> {
    alphabet: Vec<String>,
    letter_ids: HashMap<String, Letter>,
    states: Vec<String>,
    state_ids: HashMap<String, StateId>,
    initial: Option<StateId>,
    transitions: Vec<Transition<W>>,
    finals: Option<Vec<StateId>>,
}

impl<W: Clone + Ord + Debug> AutomatonBuilder<W> {
    pub fn new<S: AsRef<str>>(alphabet: &[S]) -> Self {
        let alphabet: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
        let letter_ids = alphabet
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        AutomatonBuilder {
            alphabet,
            letter_ids,
            states: Vec::new(),
            state_ids: HashMap::new(),
            initial: None,
            transitions: Vec::new(),
            finals: None,
        }
    }

    /// Returns the id of `name`, declaring it if needed.
    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.state_ids.get(name) {
            return id;
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.state_ids.insert(name.to_string(), id);
        id
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.state_ids.contains_key(name)
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        let id = self.state(name);
        self.initial = Some(id);
        self
    }

    pub fn transition(
        &mut self,
        source: &str,
        letter: &str,
        target: &str,
        weight: W,
    ) -> Result<&mut Self, AutomatonError> {
        let letter = *self
            .letter_ids
            .get(letter)
            .ok_or_else(|| AutomatonError::UnknownLetter(letter.to_string()))?;
        let source = self.state(source);
        let target = self.state(target);
        self.transitions.push(Transition {
            source,
            letter,
            target,
            weight,
        });
        Ok(self)
    }

    /// Declares a final state; states must already be known. Without any call every
    /// state is final.
    pub fn final_state(&mut self, name: &str) -> Result<&mut Self, AutomatonError> {
        let id = *self
            .state_ids
            .get(name)
            .ok_or_else(|| AutomatonError::UnknownState(name.to_string()))?;
        self.finals.get_or_insert_with(Vec::new).push(id);
        Ok(self)
    }

    /// Declares an explicit (possibly empty) accepting set.
    pub fn no_finals(&mut self) -> &mut Self {
        self.finals.get_or_insert_with(Vec::new);
        self
    }

    pub fn build(self) -> Result<Automaton<W>, AutomatonError> {
        if self.alphabet.is_empty() {
            return Err(AutomatonError::EmptyAlphabet);
        }
        if self.transitions.is_empty() {
            return Err(AutomatonError::EmptyTransitions);
        }
        let initial = self.initial.ok_or(AutomatonError::NoInitial)?;
        let n = self.states.len();
        let finals = match &self.finals {
            None => vec![true; n],
            Some(list) => {
                let mut f = vec![false; n];
                for &q in list {
                    f[q] = true;
                }
                f
            }
        };
        Automaton::from_parts(
            self.alphabet,
            self.states,
            initial,
            self.transitions,
            finals,
        )
    }
}

/// Convenience constructor from names: `(source, letter, target, weight)` tuples.
pub fn build_automaton<W: Clone + Ord + Debug>(
    alphabet: &[&str],
    transitions: &[(&str, &str, &str, W)],
    initial: &str,
    finals: &[&str],
) -> Result<Automaton<W>, AutomatonError> {
    let mut b = AutomatonBuilder::new(alphabet);
    b.initial(initial);
    for (s, a, t, w) in transitions {
        b.transition(s, a, t, w.clone())?;
    }
    b.no_finals();
    for f in finals {
        b.final_state(f)?;
    }
    b.build()
}
