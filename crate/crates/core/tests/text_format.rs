mod common;

use std::collections::BTreeSet;

use common::{random_qa, random_valid_nqa, rng};
use nqa_core::{
    gen_resource, gen_response, parse_nqa, parse_qa, serialize_nqa, serialize_qa, validate_nqa,
    Automaton, RcParams, RtParams, Severity,
};
use proptest::prelude::*;

type Shape = (
    String,
    BTreeSet<String>,
    BTreeSet<(String, String, String, String)>,
);

/// Names are kept by the serializer, so isomorphism reduces to equality of named parts.
fn shape<W: Clone + Ord + std::fmt::Debug + std::fmt::Display>(a: &Automaton<W>) -> Shape {
    let finals = (0..a.num_states())
        .filter(|&q| a.is_final(q))
        .map(|q| a.state_name(q).to_string())
        .collect();
    let ts = a
        .transitions()
        .iter()
        .map(|t| {
            (
                a.state_name(t.source).to_string(),
                a.letter_name(t.letter).to_string(),
                a.state_name(t.target).to_string(),
                t.weight.to_string(),
            )
        })
        .collect();
    (a.state_name(a.initial()).to_string(), finals, ts)
}

fn nqa_shapes(n: &nqa_core::NestedAutomaton) -> Vec<Shape> {
    let labels = n.parent().map_weights(|l| l.0);
    std::iter::once(shape(&labels))
        .chain(n.children().iter().map(|c| shape(c.base())))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn qa_round_trip(seed in any::<u64>(), complete in any::<bool>()) {
        let mut r = rng(seed);
        let a = random_qa(&mut r, 5, 3, complete);
        let text = serialize_qa(&a);
        let b = parse_qa(&text).unwrap();
        prop_assert_eq!(shape(&a), shape(&b));
        prop_assert_eq!(b.num_states(), a.num_states());
        let again = serialize_qa(&b);
        prop_assert_eq!(serialize_qa(&parse_qa(&again).unwrap()), again);
    }

    #[test]
    fn nqa_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = random_valid_nqa(&mut r, 3, 3, 3, 4);
        let text = serialize_nqa(&n);
        let m = parse_nqa(&text).unwrap();
        prop_assert_eq!(nqa_shapes(&n), nqa_shapes(&m));
        let again = serialize_nqa(&m);
        prop_assert_eq!(serialize_nqa(&parse_nqa(&again).unwrap()), again);
    }
}

#[test]
fn benchmark_families_round_trip_and_validate() {
    for k in 1..=4 {
        for n in 1..=k {
            let a = gen_response(RtParams::new(n, k).unwrap());
            let b = parse_nqa(&serialize_nqa(&a)).unwrap();
            assert_eq!(nqa_shapes(&a), nqa_shapes(&b));
            assert!(validate_nqa(&b)
                .iter()
                .all(|d| d.severity != Severity::Error));
        }
    }
    for n in 1..=3 {
        for k in 1..=3 {
            let a = gen_resource(RcParams::new(n, k).unwrap());
            let b = parse_nqa(&serialize_nqa(&a)).unwrap();
            assert_eq!(nqa_shapes(&a), nqa_shapes(&b));
            assert!(validate_nqa(&b)
                .iter()
                .all(|d| d.severity != Severity::Error));
        }
    }
}

#[test]
fn invalid_inputs_are_rejected_with_positions() {
    let cases = [
        // label beyond the children
        "@PARENT\na : 2, q -> q\n@CHILD 1\na : 1, c -> d\nfinal: d\n",
        // child block without a parent
        "@CHILD 1\na : 1, c -> d\n",
        // duplicate child index
        "@PARENT\na : 1, q -> q\n@CHILD 1\na : 1, c -> d\nfinal: d\n@CHILD 1\na : 1, c -> d\nfinal: d\n",
        // gap in child indices
        "@PARENT\na : 1, q -> q\n@CHILD 2\na : 1, c -> d\nfinal: d\n",
        // unknown final state
        "@PARENT\na : 1, q -> q\nfinal: z\n@CHILD 1\na : 1, c -> d\nfinal: d\n",
        // zero denominator
        "@PARENT\na : 1, q -> q\n@CHILD 1\na : 1/0, c -> d\nfinal: d\n",
        // malformed transition
        "@PARENT\na 1, q -> q\n@CHILD 1\na : 1, c -> d\nfinal: d\n",
    ];
    for text in cases {
        let err = parse_nqa(text).expect_err(text);
        assert!(err.to_string().contains("line"), "{text:?}: {err}");
    }
    assert!(parse_qa("").is_err());
}
