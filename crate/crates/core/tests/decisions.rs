mod common;

use common::{random_nqa, random_qa, rng};
use nqa_core::lasso::enumerate_lassos;
use nqa_core::{
    flatten_extremal_threshold, nqa_emptiness, nqa_eval_lasso, nqa_universality, qa_emptiness,
    DecisionOptions, Error, ExtValue, FiniteValueFn, FlatWeight, InfiniteValueFn, Limits,
    NestedAutomaton, Weight,
};
use proptest::prelude::*;

const LAMBDAS: [i64; 6] = [-2, -1, 0, 1, 2, 3];
const ORACLE_LEN: usize = 5;

fn finite_fns() -> Vec<FiniteValueFn> {
    vec![
        FiniteValueFn::Min,
        FiniteValueFn::Max,
        FiniteValueFn::SumPlus,
        FiniteValueFn::SumMinus,
        FiniteValueFn::sum_b(Weight::from_int(2)).unwrap(),
    ]
}

fn oracle_values(n: &NestedAutomaton, f: InfiniteValueFn, g: &FiniteValueFn) -> Vec<ExtValue> {
    enumerate_lassos(n.num_letters(), ORACLE_LEN)
        .map(|l| nqa_eval_lasso(n, f, g, &l).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qa_emptiness_is_antitone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_qa(&mut r, 5, 2, true);
        for f in InfiniteValueFn::ALL {
            let verdicts: Vec<bool> = (-8..=8)
                .map(|x| qa_emptiness(&a, f, &Weight::ratio(x, 2).unwrap()).unwrap().0)
                .collect();
            prop_assert!(verdicts.windows(2).all(|w| w[0] >= w[1]), "{f:?}: {verdicts:?}");
        }
    }

    /// Emptiness and universality agree with the oracle: witnesses and counterexamples
    /// replay, negative answers hold on every short lasso, and both are antitone in the
    /// threshold.
    #[test]
    fn nqa_decisions_match_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = random_nqa(&mut r, 2, 3, 2, 2);
        let opts = DecisionOptions::default();
        for g in finite_fns() {
            for f in InfiniteValueFn::ALL {
                let values = oracle_values(&n, f, &g);
                let mut prev_e = true;
                let mut prev_u = true;
                for x in LAMBDAS {
                    let lam = Weight::from_int(x);
                    let at = ExtValue::Finite(lam.clone());
                    match nqa_emptiness(&n, f, &g, &lam, &opts) {
                        Err(Error::Unsupported(_)) => {
                            prop_assert_eq!((f, &g), (InfiniteValueFn::LimInfAvg, &FiniteValueFn::SumPlus));
                        }
                        Err(e) => return Err(TestCaseError::fail(format!("{f:?} {g:?}: {e}"))),
                        Ok(rep) => {
                            prop_assert!(prev_e || !rep.nonempty, "emptiness not antitone");
                            prev_e = rep.nonempty;
                            if let Some(l) = &rep.witness {
                                prop_assert!(rep.nonempty);
                                prop_assert!(nqa_eval_lasso(&n, f, &g, l).unwrap() >= at, "{f:?} {g:?} {x}: bad witness");
                            } else if rep.nonempty {
                                // only a non-lasso word may attain the supremum of an average
                                prop_assert!(f.is_limit_average(), "{f:?} {g:?} {x}: no witness");
                            }
                            if !rep.nonempty {
                                prop_assert!(values.iter().all(|v| *v < at), "{f:?} {g:?} {x}: missed a lasso");
                            }
                        }
                    }
                    if f.is_limit_average() {
                        continue;
                    }
                    let rep = nqa_universality(&n, f, &g, &lam, &opts).unwrap();
                    prop_assert!(prev_u || !rep.universal, "universality not antitone");
                    prev_u = rep.universal;
                    match &rep.counterexample {
                        Some(l) => prop_assert!(nqa_eval_lasso(&n, f, &g, l).unwrap() < at),
                        None => prop_assert!(values.iter().all(|v| *v >= at), "{f:?} {g:?} {x}: universal?"),
                    }
                }
            }
        }
    }

    #[test]
    fn threshold_flattening_emits_bits(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = random_nqa(&mut r, 2, 3, 3, 3);
        for f in [InfiniteValueFn::Inf, InfiniteValueFn::Sup, InfiniteValueFn::LimInf, InfiniteValueFn::LimSup] {
            for g in [FiniteValueFn::Min, FiniteValueFn::Max, FiniteValueFn::SumPlus, FiniteValueFn::SumMinus] {
                let q = flatten_extremal_threshold(&n, f, &g, &Weight::from_int(1), &Limits::none()).unwrap();
                for t in q.transitions() {
                    let ok = match &t.weight {
                        FlatWeight::Silent => true,
                        FlatWeight::Value(ExtValue::Finite(v)) => v.is_zero() || *v == Weight::one(),
                        _ => false,
                    };
                    prop_assert!(ok, "{f:?} {g:?}: weight {:?}", t.weight);
                }
            }
        }
    }
}
