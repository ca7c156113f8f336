//! Evaluation metrics against hand counts and brute-force oracles.

use eacm::corpus::{Emotion, EipMatrix, NUM_EMOTIONS};
use eacm::eval::{distinct_n, distinct_n_with, response_quality, DistinctDenominator};
use proptest::prelude::*;
use std::collections::HashSet;

fn toks(rs: &[&'static str]) -> Vec<Vec<&'static str>> {
    rs.iter().map(|r| r.split_whitespace().collect()).collect()
}

#[test]
fn hand_counted_examples() {
    assert_eq!(distinct_n(&toks(&["a b a", "a c"]), 1), 0.6);
    assert_eq!(distinct_n(&toks(&["a b a", "a c"]), 2), 1.0);
    assert_eq!(distinct_n(&toks(&["a", "a", "a"]), 1), 1.0 / 3.0);
}

#[test]
fn token_denominator() {
    // Three distinct bigrams over five tokens.
    let rs = toks(&["a b a", "a c"]);
    assert_eq!(distinct_n_with(&rs, 2, DistinctDenominator::Tokens), 0.6);
}

#[test]
fn quality_truth_table() {
    for (s, m, q) in [(1, 1, 1), (1, 0, 0), (0, 1, 0), (0, 0, 0)] {
        assert_eq!(response_quality(s, m), q, "S={s} M={m}");
    }
}

fn responses() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..6, 0..8), 0..10)
}

fn brute_distinct(rs: &[Vec<u8>], n: usize) -> f64 {
    let grams: Vec<&[u8]> = rs.iter().flat_map(|r| r.windows(n)).collect();
    let unique: HashSet<&[u8]> = grams.iter().copied().collect();
    if grams.is_empty() {
        0.0
    } else {
        unique.len() as f64 / grams.len() as f64
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn distinct_matches_brute_force(rs in responses(), n in 1usize..4) {
        let d = distinct_n(&rs, n);
        prop_assert_eq!(d, brute_distinct(&rs, n));
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn repeating_the_corpus_halves_distinct(rs in responses(), n in 1usize..3) {
        let twice: Vec<Vec<u8>> = rs.iter().chain(&rs).cloned().collect();
        prop_assert!((distinct_n(&twice, n) - distinct_n(&rs, n) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn eip_matches_brute_force(labels in prop::collection::vec((0..NUM_EMOTIONS, 0..NUM_EMOTIONS), 0..300)) {
        let pairs: Vec<(Emotion, Emotion)> = labels.iter().map(|&(p, r)| (Emotion::ALL[p], Emotion::ALL[r])).collect();
        let m = EipMatrix::from_label_pairs(pairs.iter().copied());
        prop_assert_eq!(m.total(), pairs.len() as u64);
        for p in Emotion::ALL {
            for r in Emotion::ALL {
                let n = pairs.iter().filter(|&&x| x == (p, r)).count() as u64;
                prop_assert_eq!(m.get(p, r), n);
            }
        }
    }
}
