mod common;

use proptest::prelude::*;
use twobase::classify::{classify_omega_words, Classification};
use twobase::oracle::{block_count, brute_classify, BlockCountTable, GrowthClass};
use twobase::spectral::build_automaton;
use twobase::EpWord;

fn arb_bound(first: u8) -> impl Strategy<Value = EpWord> {
    (proptest::collection::vec(0u8..2, 0..=4), proptest::collection::vec(0u8..2, 1..=3)).prop_map(move |(mut p, q)| {
        p.insert(0, first);
        EpWord::new(p, q).unwrap()
    })
}

#[test]
fn spec_counts() {
    let w = |s: &str| EpWord::parse(s).unwrap();
    let t = BlockCountTable::compute(&w("(01)"), &w("1(0)"), 12).unwrap();
    let m = build_automaton(&w("(01)"), &w("1(0)")).unwrap();
    assert_eq!(t.counts.iter().map(|&c| c as u128).collect::<Vec<_>>(), m.path_counts(12)[1..].to_vec());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn automaton_counts_match_oracle(a in arb_bound(0), b in arb_bound(1)) {
        let m = build_automaton(&a, &b).unwrap();
        let paths = m.path_counts(12);
        for n in 1..=12 {
            prop_assert_eq!(paths[n], block_count(&a, &b, n).unwrap() as u128, "n = {}", n);
        }
    }

    #[test]
    fn trivial_label_matches_oracle(a in arb_bound(0), b in arb_bound(1)) {
        let label = classify_omega_words(&a, &b, 64).unwrap();
        let brute = brute_classify(&a, &b, 16).unwrap();
        prop_assert_eq!(label == Classification::Trivial, brute == GrowthClass::TrivialLike);
    }
}
