#![allow(dead_code)]

use nqa_core::{Automaton, AutomatonBuilder, Label, Lasso, NestedAutomaton, Weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random deterministic NQA; the initial parent and child states move on every letter.
pub fn random_nqa(
    rng: &mut ChaCha8Rng,
    letters: usize,
    max_parent: usize,
    max_child: usize,
    weights: i64,
) -> NestedAutomaton {
    random_nqa_with(rng, letters, max_parent, max_child, weights, false)
}

/// Random deterministic NQA that passes validation: complete parent, and children
/// complete outside their final states.
pub fn random_valid_nqa(
    rng: &mut ChaCha8Rng,
    letters: usize,
    max_parent: usize,
    max_child: usize,
    weights: i64,
) -> NestedAutomaton {
    loop {
        let n = random_nqa_with(rng, letters, max_parent, max_child, weights, true);
        if !nqa_core::nested::has_errors(&nqa_core::validate_nqa(&n)) {
            return n;
        }
    }
}

fn random_nqa_with(
    rng: &mut ChaCha8Rng,
    letters: usize,
    max_parent: usize,
    max_child: usize,
    weights: i64,
    complete: bool,
) -> NestedAutomaton {
    let fill = if complete { 1.0 } else { 0.85 };
    loop {
        let alphabet = names("l", letters);
        let np = rng.gen_range(1..=max_parent);
        let kids = rng.gen_range(1..=2u32);
        let ps = names("q", np);
        let mut pb = AutomatonBuilder::<Label>::new(&alphabet);
        pb.initial(&ps[0]);
        for q in &ps {
            pb.state(q);
        }
        for (i, q) in ps.iter().enumerate() {
            for a in &alphabet {
                if i == 0 || rng.gen_bool(fill) {
                    let t = &ps[rng.gen_range(0..np)];
                    let label = if rng.gen_bool(0.3) {
                        0
                    } else {
                        rng.gen_range(1..=kids)
                    };
                    pb.transition(q, a, t, Label(label)).unwrap();
                }
            }
        }
        pb.no_finals();
        for q in &ps {
            if rng.gen_bool(0.6) {
                pb.final_state(q).unwrap();
            }
        }
        let Ok(parent) = pb.build() else { continue };
        let children: Result<Vec<_>, _> = (0..kids)
            .map(|_| {
                let nc = rng.gen_range(1..=max_child);
                let cs = names("c", nc);
                let mut cb = AutomatonBuilder::<Weight>::new(&alphabet);
                cb.initial(&cs[0]);
                for c in &cs {
                    cb.state(c);
                }
                for (i, c) in cs.iter().enumerate() {
                    for a in &alphabet {
                        if i == 0 || rng.gen_bool(if complete { 1.0 } else { 0.7 }) {
                            let t = &cs[rng.gen_range(0..nc)];
                            cb.transition(
                                c,
                                a,
                                t,
                                Weight::from_int(rng.gen_range(-weights..=weights)),
                            )
                            .unwrap();
                        }
                    }
                }
                cb.no_finals();
                for (i, c) in cs.iter().enumerate() {
                    if i + 1 == nc || rng.gen_bool(0.4) {
                        cb.final_state(c).unwrap();
                    }
                }
                cb.build()
            })
            .collect();
        let Ok(children) = children else { continue };
        if let Ok(n) = NestedAutomaton::new(parent, children) {
            if n.is_deterministic() {
                return n;
            }
        }
    }
}

/// Random QA, possibly nondeterministic; `complete` puts a transition in every slot.
pub fn random_qa(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    letters: usize,
    complete: bool,
) -> Automaton<Weight> {
    loop {
        let ns = rng.gen_range(1..=max_states);
        let alphabet = names("l", letters);
        let st = names("s", ns);
        let mut b = AutomatonBuilder::<Weight>::new(&alphabet);
        b.initial(&st[0]);
        for s in &st {
            b.state(s);
        }
        for s in &st {
            for a in &alphabet {
                let count = rng.gen_range(if complete { 1 } else { 0 }..=2);
                for _ in 0..count {
                    let t = &st[rng.gen_range(0..ns)];
                    b.transition(
                        s,
                        a,
                        t,
                        Weight::ratio(rng.gen_range(-6..=6), rng.gen_range(1..=2)).unwrap(),
                    )
                    .unwrap();
                }
            }
        }
        b.no_finals();
        for s in &st {
            if rng.gen_bool(0.6) {
                b.final_state(s).unwrap();
            }
        }
        if let Ok(a) = b.build() {
            if a.num_transitions() > 0 {
                return a;
            }
        }
    }
}

pub fn random_lasso(rng: &mut ChaCha8Rng, letters: usize) -> Lasso {
    let stem = (0..rng.gen_range(0..=3))
        .map(|_| rng.gen_range(0..letters))
        .collect();
    let cycle = (0..rng.gen_range(1..=3))
        .map(|_| rng.gen_range(0..letters))
        .collect();
    Lasso::new(stem, cycle).unwrap()
}
