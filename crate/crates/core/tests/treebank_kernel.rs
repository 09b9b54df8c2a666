//! Treebank parsing and kernel differences over a small fixture treebank.

use btdiv_core::grouper::signature_histogram;
use btdiv_core::synkernel::{kernel_difference, normalized_similarity, sst_kernel, KernelConfig};
use btdiv_core::treebank::{
    first_split_signature, mask_terminals, parse_bracketed, render_bracketed, ParseTree, DEFAULT_DUMMY,
};

fn fixture() -> Vec<ParseTree> {
    include_str!("fixtures/trees.txt")
        .lines()
        .map(|l| parse_bracketed(l).unwrap())
        .collect()
}

#[test]
fn fixture_roundtrips() {
    for line in include_str!("fixtures/trees.txt").lines() {
        let t = parse_bracketed(line).unwrap();
        let once = render_bracketed(&t);
        assert_eq!(once, line);
        assert_eq!(render_bracketed(&parse_bracketed(&once).unwrap()), once);
    }
}

#[test]
fn word_choice_pairs_mask_identically() {
    let t = fixture();
    for (a, b) in [(0, 1), (2, 3), (5, 6)] {
        assert_ne!(t[a], t[b]);
        assert_eq!(
            render_bracketed(&mask_terminals(&t[a], DEFAULT_DUMMY)),
            render_bracketed(&mask_terminals(&t[b], DEFAULT_DUMMY))
        );
    }
}

#[test]
fn signatures_look_through_root() {
    let t = fixture();
    let sig = |i: usize| first_split_signature(&t[i]).unwrap().to_string();
    assert_eq!(sig(0), "S -> NP VP .");
    assert_eq!(sig(2), "S -> PP , NP VP .");
    assert_eq!(sig(4), "S -> PP NP VP .");
    assert_eq!(sig(7), "SQ -> VBZ NP ADJP .");
    let h = signature_histogram(&t, 3);
    assert_eq!(h[0], ("S -> NP VP .".to_string(), 8));
}

#[test]
fn kernel_is_symmetric_and_bounded_on_fixture() {
    let t = fixture();
    let c = KernelConfig::default();
    for a in &t {
        for b in &t {
            assert_eq!(sst_kernel(a, b, &c), sst_kernel(b, a, &c));
            let s = normalized_similarity(a, b, &c).unwrap();
            assert!((0.0..=1.0).contains(&s));
        }
        assert_eq!(normalized_similarity(a, a, &c).unwrap(), 1.0);
    }
}

#[test]
fn word_choice_does_not_count_as_syntactic_difference() {
    let t = fixture();
    let c = KernelConfig::default();
    let same = kernel_difference("same", &[t[0].clone(), t[1].clone(), t[0].clone()], &c).unwrap();
    assert_eq!(same.difference, 0.0);
    let mixed = kernel_difference("mixed", &[t[0].clone(), t[1].clone(), t[9].clone()], &c).unwrap();
    // one of three pairs is identical after masking
    assert!(mixed.difference > 0.0 && mixed.difference < 100.0 * 2.0 / 3.0 + 1e-9);
    assert_eq!(mixed.pairwise_similarity[&(0, 1)], 1.0);
}
