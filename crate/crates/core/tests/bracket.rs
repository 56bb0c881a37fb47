#[path = "../../tests/src/oracle.rs"]
#[allow(dead_code)]
mod oracle;

use knotwork::bracket::{
    bracket, bracket_by_contraction, bracket_with, enumerate_states, is_bracket_trivial, normalized_invariant,
    state_weight, unlink_value, BracketConfig,
};
use knotwork::knot::{parse_braid, parse_pd, BraidLetter, BraidWord, LinkDiagram};
use knotwork::LaurentPoly;
use oracle::{as_poly, skein_bracket};
use proptest::prelude::*;

fn braid_strategy(max_strands: usize, max_len: usize) -> impl Strategy<Value = BraidWord> {
    (2..=max_strands).prop_flat_map(move |n| {
        prop::collection::vec((1..n, prop::bool::ANY), 0..=max_len).prop_map(move |ls| {
            let letters = ls
                .into_iter()
                .map(|(i, pos)| BraidLetter::new(i, if pos { 1 } else { -1 }))
                .collect();
            BraidWord::new(n, letters).unwrap()
        })
    })
}

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn shipped_diagrams_match_skein_oracle() {
    for f in ["hopf.pd", "trefoil.pd", "flat_trefoil.pd", "flat_hopf.pd", "borromean.pd", "link_l.pd"] {
        let d = parse_pd(&data(f)).unwrap();
        assert_eq!(as_poly(&bracket(&d).unwrap()), skein_bracket(&d), "{f}");
    }
}

#[test]
fn known_values() {
    let hopf = parse_pd(&data("hopf.pd")).unwrap();
    assert_eq!(bracket(&hopf).unwrap().to_string(), "-A^4 - A^-4");
    let tref = parse_pd(&data("trefoil.pd")).unwrap();
    assert_eq!(bracket(&tref).unwrap().to_string(), "-A^5 - A^-3 + A^-7");
    assert_eq!(normalized_invariant(&tref).unwrap().to_jones_string(), "t + t^3 - t^4");
    let fig8 = parse_braid("n=3: s1 s2^-1 s1 s2^-1").unwrap().closure();
    assert_eq!(
        normalized_invariant(&fig8).unwrap().to_jones_string(),
        "t^-2 - t^-1 + 1 - t + t^2"
    );
    assert_eq!(bracket(&LinkDiagram::unlink(3)).unwrap(), unlink_value(3));
    let kink = parse_pd("X[1,1,2,2]").unwrap();
    assert_eq!(bracket(&kink).unwrap().to_string(), "-A^3");
}

#[test]
fn states_sum_to_bracket() {
    let b = parse_braid("n=3: s1 s2^-1 s1 s2 s1").unwrap().closure();
    let states: Vec<_> = enumerate_states(&b).unwrap().collect();
    assert_eq!(states.len(), 32);
    let total: LaurentPoly = states.iter().map(state_weight).sum();
    assert_eq!(total, bracket(&b).unwrap());
}

#[test]
fn cap_is_enforced() {
    let d = parse_braid("n=2: s1 s1 s1 s1 s1").unwrap().closure();
    let cfg = BracketConfig { cap: 4, parallel: false };
    assert!(bracket_with(&d, &cfg).unwrap_err().is_cap_overflow());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn state_sum_matches_skein(b in braid_strategy(4, 6), loops in 0usize..2) {
        let mut d = b.closure();
        if loops > 0 {
            d = d.disjoint_union(&LinkDiagram::unlink(loops));
        }
        prop_assert_eq!(as_poly(&bracket(&d).unwrap()), skein_bracket(&d));
    }

    #[test]
    fn sweep_matches_state_sum(b in braid_strategy(5, 12)) {
        let d = b.closure();
        prop_assert_eq!(bracket_by_contraction(&d), bracket(&d).unwrap());
    }

    #[test]
    fn parallel_equals_serial(b in braid_strategy(4, 14)) {
        let d = b.closure();
        let par = bracket_with(&d, &BracketConfig::default()).unwrap();
        let ser = bracket_with(&d, &BracketConfig::default().serial()).unwrap();
        prop_assert_eq!(par, ser);
    }

    #[test]
    fn disjoint_union_multiplies(x in braid_strategy(3, 5), y in braid_strategy(3, 5)) {
        let (a, b) = (x.closure(), y.closure());
        let u = bracket(&a.disjoint_union(&b)).unwrap();
        prop_assert_eq!(u, LaurentPoly::delta() * bracket(&a).unwrap() * bracket(&b).unwrap());
    }

    #[test]
    fn mirror_inverts_variable(b in braid_strategy(4, 7)) {
        let d = b.closure();
        prop_assert_eq!(bracket(&d.mirror()).unwrap(), bracket(&d).unwrap().invert_variable());
    }

    #[test]
    fn braid_and_inverse_cancel(b in braid_strategy(4, 5)) {
        let d = b.concat(&b.inverse()).unwrap().closure();
        prop_assert!(is_bracket_trivial(&d).unwrap());
    }
}
