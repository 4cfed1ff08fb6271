mod common;

use common::{random_lasso, random_nqa, rng};
use nqa_core::{
    build_automaton, monitor_prefix, nqa_eval_lasso, ExtValue, FiniteValueFn, InfiniteValueFn,
    Label, Lasso, NestedAutomaton, Weight,
};
use proptest::prelude::*;

fn finite_fns() -> Vec<FiniteValueFn> {
    vec![
        FiniteValueFn::Min,
        FiniteValueFn::Max,
        FiniteValueFn::SumPlus,
        FiniteValueFn::SumMinus,
        FiniteValueFn::sum_b(Weight::from_int(2)).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_is_invariant_under_unrolling(seed in any::<u64>()) {
        let mut r = rng(seed);
        let letters = 1 + (seed % 3) as usize;
        let n = random_nqa(&mut r, letters, 3, 3, 3);
        let l = random_lasso(&mut r, letters);
        let doubled = Lasso::new(l.stem.clone(), [l.cycle.clone(), l.cycle.clone()].concat()).unwrap();
        let shifted = Lasso::new([l.stem.clone(), l.cycle.clone()].concat(), l.cycle.clone()).unwrap();
        for g in finite_fns() {
            for f in InfiniteValueFn::ALL {
                let v = nqa_eval_lasso(&n, f, &g, &l).unwrap();
                prop_assert_eq!(&v, &nqa_eval_lasso(&n, f, &g, &doubled).unwrap());
                prop_assert_eq!(&v, &nqa_eval_lasso(&n, f, &g, &shifted).unwrap());
            }
        }
    }

    #[test]
    fn silent_loops_are_rejected(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = random_nqa(&mut r, 2, 3, 3, 3);
        let silent = n.parent().map_weights(|_| Label(0));
        let children = n.children().iter().map(|c| c.base().clone()).collect();
        let m = NestedAutomaton::new(silent, children).unwrap();
        let l = random_lasso(&mut r, 2);
        for f in InfiniteValueFn::ALL {
            prop_assert_eq!(nqa_eval_lasso(&m, f, &FiniteValueFn::Max, &l).unwrap(), ExtValue::NegInf);
        }
    }

}

/// Returned values over `stem · loop^N` repeat with some period of loop copies; the
/// mean over one period is the limit average.
#[test]
fn monitor_agrees_with_limit_average() {
    let g = FiniteValueFn::SumPlus;
    let mut checked = 0;
    for seed in 0..1000 {
        let mut r = rng(seed);
        let n = random_nqa(&mut r, 2, 3, 3, 3);
        let l = random_lasso(&mut r, 2);
        let v = nqa_eval_lasso(&n, InfiniteValueFn::LimSupAvg, &g, &l).unwrap();
        let Some(v) = v.finite().cloned() else {
            continue;
        };
        assert_eq!(
            ExtValue::Finite(v.clone()),
            nqa_eval_lasso(&n, InfiniteValueFn::LimInfAvg, &g, &l).unwrap()
        );

        const COPIES: usize = 80;
        let word: Vec<usize> = l
            .stem
            .iter()
            .chain(l.cycle.iter().cycle().take(l.cycle.len() * COPIES))
            .copied()
            .collect();
        let report = monitor_prefix(&n, &g, &word).unwrap();
        let mut per_copy: Vec<Vec<Weight>> = vec![Vec::new(); COPIES];
        for (pos, x) in &report.returned {
            if *pos > l.stem.len() {
                per_copy[(pos - 1 - l.stem.len()) / l.cycle.len()].push(x.clone());
            }
        }
        let (from, to) = (30, 60);
        let period = (1..=12)
            .find(|&p| (from..to).all(|j| per_copy[j] == per_copy[j + p]))
            .expect("returned values become periodic");
        let window: Vec<Weight> = per_copy[from..from + period].concat();
        let mean = window.iter().cloned().sum::<Weight>() / Weight::from_int(window.len() as i64);
        assert_eq!(mean, v, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 30, "only {checked} lassos had a finite value");
}

/// `a` spawns a child that waits for `b`; `b` is silent.
fn waiting_child() -> NestedAutomaton {
    let parent = build_automaton(
        &["a", "b"],
        &[("q", "a", "q", Label(1)), ("q", "b", "q", Label(0))],
        "q",
        &["q"],
    )
    .unwrap();
    let child = build_automaton(
        &["a", "b"],
        &[
            ("c0", "a", "c0", Weight::from_int(1)),
            ("c0", "b", "c1", Weight::from_int(1)),
        ],
        "c0",
        &["c1"],
    )
    .unwrap();
    NestedAutomaton::new(parent, vec![child]).unwrap()
}

#[test]
fn unterminated_children_reject() {
    let n = waiting_child();
    for l in nqa_core::lasso::enumerate_lassos(2, 6) {
        let has = |x| l.cycle.contains(&x);
        for f in InfiniteValueFn::ALL {
            let v = nqa_eval_lasso(&n, f, &FiniteValueFn::SumPlus, &l).unwrap();
            // a loop without `b` strands its children; one without `a` is silent
            assert_eq!(v.is_finite(), has(0) && has(1), "{l:?} {f:?} {v}");
        }
    }
}
