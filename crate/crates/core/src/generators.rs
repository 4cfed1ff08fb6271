//! Benchmark families: response time `A(n, k)` and resource consumption `B(n, k)`.

use crate::automaton::AutomatonBuilder;
use crate::error::{Error, Result};
use crate::nested::{Label, NestedAutomaton};
use crate::weight::Weight;

/// `n` bounds the pending requests, `k >= n` the response time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RtParams {
    pub n: usize,
    pub k: usize,
}

impl RtParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k < n {
            return Err(Error::InvalidArgument(format!(
                "response-time family needs 1 <= n <= k, got n = {n}, k = {k}"
            )));
        }
        Ok(RtParams { n, k })
    }

    /// `n(2k - n + 1)/2 + 2`
    pub fn parent_states(&self) -> usize {
        self.n * (2 * self.k - self.n + 1) / 2 + 2
    }
}

/// `n` processes sharing `k` resources.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RcParams {
    pub n: usize,
    pub k: usize,
}

impl RcParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!(
                "resource family needs n, k >= 1, got n = {n}, k = {k}"
            )));
        }
        if k > 16 {
            return Err(Error::InvalidArgument(format!(
                "k = {k} is too large (2^k child states)"
            )));
        }
        Ok(RcParams { n, k })
    }

    /// `2^k + 3`
    pub fn child_states(&self) -> usize {
        (1 << self.k) + 3
    }

    /// `n(k + 2)`
    pub fn alphabet_size(&self) -> usize {
        self.n * (self.k + 2)
    }
}

fn pending(p: usize, a: usize) -> String {
    format!("p{p}a{a}")
}

/// Parent state `(p, a)` records the number of pending requests and the age of the
/// oldest one. A grant answers all of them at once, so nothing else is needed; there
/// are `k - p + 1` ages for each `p`, which sums to `n(2k - n + 1)/2`.
pub fn gen_response(p: RtParams) -> NestedAutomaton {
    let RtParams { n, k } = p;
    let spawn = Label(1);
    let silent = Label::SILENT;
    let mut b = AutomatonBuilder::new(&["r", "g", "o"]);
    b.initial("idle");
    let mut t = |s: &str, l: &str, d: &str, w: Label| {
        b.transition(s, l, d, w).expect("letters are fixed");
    };
    t("idle", "r", &pending(1, 1), spawn);
    t("idle", "g", "idle", silent);
    t("idle", "o", "idle", silent);
    for pc in 1..=n {
        for age in pc..=k {
            let s = pending(pc, age);
            let older = if age < k {
                pending(pc, age + 1)
            } else {
                "sink".into()
            };
            t(&s, "o", &older, silent);
            let more = if pc < n && age < k {
                pending(pc + 1, age + 1)
            } else {
                "sink".into()
            };
            t(&s, "r", &more, spawn);
            t(&s, "g", "idle", silent);
        }
    }
    for l in ["r", "g", "o"] {
        t("sink", l, "sink", silent);
    }
    b.no_finals();
    b.final_state("idle").unwrap();
    for pc in 1..=n {
        for age in pc..=k {
            b.final_state(&pending(pc, age)).unwrap();
        }
    }
    let parent = b.build().expect("generator output is well-formed");

    let mut c = AutomatonBuilder::new(&["r", "g", "o"]);
    c.initial("c0");
    c.transition("c0", "r", "c0", Weight::one()).unwrap();
    c.transition("c0", "o", "c0", Weight::one()).unwrap();
    c.transition("c0", "g", "c1", Weight::zero()).unwrap();
    c.no_finals();
    c.final_state("c1").unwrap();
    let child = c.build().unwrap();
    NestedAutomaton::new(parent, vec![child]).unwrap()
}

/// Letter names of process `i` (1-based): `s_i`, `a_{i,1..k}`, `t_i`.
pub fn resource_letters(n: usize, k: usize, i: usize) -> (String, Vec<String>, String) {
    let sep = if n > 9 || k > 9 { "_" } else { "" };
    (
        format!("s{i}"),
        (1..=k).map(|j| format!("a{i}{sep}{j}")).collect(),
        format!("t{i}"),
    )
}

fn subset_name(mask: usize, k: usize) -> String {
    let members: Vec<String> = (1..=k)
        .filter(|j| mask & (1 << (j - 1)) != 0)
        .map(|j| j.to_string())
        .collect();
    format!("u{}", members.join("_"))
}

/// Child `i` tracks the set of resources process `i` used between its start `s_i`
/// and its termination `t_i`; letters of other processes are ignored. Resource edges
/// carry the size of the updated set, so `Max` returns the number of distinct
/// resources.
pub fn gen_resource(p: RcParams) -> NestedAutomaton {
    let RcParams { n, k } = p;
    let mut alphabet = Vec::with_capacity(p.alphabet_size());
    for i in 1..=n {
        let (s, a, t) = resource_letters(n, k, i);
        alphabet.push(s);
        alphabet.extend(a);
        alphabet.push(t);
    }
    let mut b = AutomatonBuilder::new(&alphabet);
    b.initial("ctl");
    for i in 1..=n {
        let (s, a, t) = resource_letters(n, k, i);
        b.transition("ctl", &s, "ctl", Label(i as u32)).unwrap();
        for l in a.iter().chain(std::iter::once(&t)) {
            b.transition("ctl", l, "ctl", Label::SILENT).unwrap();
        }
    }
    let parent = b.build().unwrap();

    let mut children = Vec::with_capacity(n);
    for i in 1..=n {
        let (s, a, t) = resource_letters(n, k, i);
        let own = |l: &String| *l == s || *l == t || a.contains(l);
        let mut c = AutomatonBuilder::new(&alphabet);
        c.initial("init");
        for l in &alphabet {
            let target = if *l == s {
                subset_name(0, k)
            } else {
                "fail".into()
            };
            c.transition("init", l, &target, Weight::zero()).unwrap();
            c.transition("fail", l, "fail", Weight::zero()).unwrap();
        }
        for mask in 0..(1usize << k) {
            let here = subset_name(mask, k);
            for l in &alphabet {
                if !own(l) {
                    c.transition(&here, l, &here, Weight::zero()).unwrap();
                }
            }
            for (j, l) in a.iter().enumerate() {
                let next = mask | (1 << j);
                let w = Weight::from_int(next.count_ones() as i64);
                c.transition(&here, l, &subset_name(next, k), w).unwrap();
            }
            c.transition(&here, &t, "done", Weight::zero()).unwrap();
            c.transition(&here, &s, "fail", Weight::zero()).unwrap();
        }
        c.no_finals();
        c.final_state("done").unwrap();
        children.push(c.build().unwrap());
    }
    NestedAutomaton::new(parent, children).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nested::{has_errors, monitor_prefix, validate_deterministic_nqa};
    use crate::value::FiniteValueFn;

    #[test]
    fn response_state_counts() {
        let a = gen_response(RtParams::new(2, 2).unwrap());
        assert_eq!(a.parent().num_states(), 5);
        assert_eq!(a.child(0).num_states(), 2);
        let a = gen_response(RtParams::new(4, 8).unwrap());
        assert_eq!(a.parent().num_states(), 28);
        assert!(RtParams::new(3, 2).is_err());
        assert!(RtParams::new(0, 2).is_err());
    }

    #[test]
    fn response_is_valid_and_deterministic() {
        for n in 1..=3 {
            for k in n..=4 {
                let a = gen_response(RtParams::new(n, k).unwrap());
                assert!(!has_errors(&validate_deterministic_nqa(&a)));
                assert!(a.parent().is_complete());
                let sccs = a.parent().sccs();
                let sink = a.parent().state_index("sink").unwrap();
                assert!(!sccs.in_accepting(sink));
                assert_eq!(sccs.members[sccs.scc_of[sink]], vec![sink]);
            }
        }
    }

    #[test]
    fn response_monitor() {
        let a = gen_response(RtParams::new(2, 2).unwrap());
        let w: Vec<usize> = ["r", "o", "g"]
            .iter()
            .map(|l| a.parent().letter_index(l).unwrap())
            .collect();
        let r = monitor_prefix(&a, &FiniteValueFn::SumPlus, &w).unwrap();
        assert_eq!(r.returned, vec![(1, Weight::from_int(2))]);
        assert_eq!(r.still_active, 0);
    }

    #[test]
    fn resource_counts() {
        let b = gen_resource(RcParams::new(1, 2).unwrap());
        assert_eq!(b.child(0).num_states(), 7);
        assert_eq!(b.num_letters(), 4);
        assert_eq!(b.parent().num_states(), 1);
        assert!(b.parent().is_complete());
        let b = gen_resource(RcParams::new(2, 3).unwrap());
        assert_eq!(b.num_children(), 2);
        assert!(b.children().iter().all(|c| c.num_states() == 11));
        assert_eq!(b.num_letters(), 10);
        assert!(!has_errors(&validate_deterministic_nqa(&b)));
    }

    #[test]
    fn resource_reverse_table_marks_non_sink() {
        let b = gen_resource(RcParams::new(1, 2).unwrap());
        let c = b.child(0).base();
        let done = c.state_index("done").unwrap();
        let table = c.reverse_reachability_table(&[done]).unwrap();
        for q in 0..c.num_states() {
            assert_eq!(table[q], c.state_name(q) != "fail", "{}", c.state_name(q));
        }
    }
}
