mod common;

use fo2inv::dendroid::{
    class_invariance_experiment, dendroid_depth, deep_dendroid_similarity, find_zigzag, make_dendroid,
    phi_even_zigzag, Dendroid, DendroidError, Parity,
};
use fo2inv::eval::evaluate_sentence;
use fo2inv::games::Winner;
use fo2inv::solver::InvarianceVerdict;
use fo2inv::{find_isomorphism, LinearOrder, Structure};
use rand::seq::SliceRandom;

fn count(s: &Structure, name: &str) -> usize {
    s.tuple_count(s.signature().relation_index(name).unwrap())
}

fn random_order(n: usize, seed: u64) -> LinearOrder {
    let mut seq: Vec<usize> = (0..n).collect();
    seq.shuffle(&mut common::rng(seed));
    LinearOrder::from_sequence(seq).unwrap()
}

#[test]
fn small_dendroids_have_the_expected_sizes() {
    // (depth, elements, T, S, D): D counts ancestor pairs, sum of level * 2^level.
    for (depth, size, t, s, d) in [(1, 3, 2, 2, 2), (2, 7, 6, 6, 10), (3, 15, 14, 14, 34)] {
        let dd = make_dendroid(depth).unwrap();
        assert_eq!(dd.size(), size);
        assert_eq!(count(&dd.structure, "T"), t);
        assert_eq!(count(&dd.structure, "S"), s);
        assert_eq!(count(&dd.structure, "D"), d);
    }
    assert_eq!(make_dendroid(0), Err(DendroidError::DepthZero));
}

#[test]
fn descendant_is_the_transitive_closure_of_child() {
    for depth in 1..=4 {
        let d = make_dendroid(depth).unwrap();
        let n = d.size();
        let mut reach = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                reach[a][b] = d.structure.holds("T", &[a, b]).unwrap();
            }
        }
        for m in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if reach[a][m] && reach[m][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                assert_eq!(reach[a][b], d.structure.holds("D", &[a, b]).unwrap(), "{a} {b}");
                let siblings = a != b && a > 0 && b > 0 && (a - 1) / 2 == (b - 1) / 2;
                assert_eq!(siblings, d.structure.holds("S", &[a, b]).unwrap());
            }
        }
    }
}

#[test]
fn shallower_dendroids_are_restrictions() {
    for depth in 1..=4 {
        let small = make_dendroid(depth).unwrap();
        let big = make_dendroid(depth + 1).unwrap();
        let prefix: Vec<usize> = (0..small.size()).collect();
        let restricted = big.structure.induced(&prefix);
        let shuffled = common::shuffled(&restricted, depth as u64);
        assert!(find_isomorphism(&small.structure, &shuffled).is_some());
    }
}

#[test]
fn words_round_trip() {
    let d = make_dendroid(4).unwrap();
    for e in 0..d.size() {
        let w = Dendroid::word(e);
        assert_eq!(w.len(), Dendroid::level(e));
        assert_eq!(Dendroid::element(&w), Some(e));
    }
    assert_eq!(Dendroid::word(5), "10");
    assert_eq!(Dendroid::element("2"), None);
}

#[test]
fn membership_recognises_relabelled_dendroids() {
    for depth in 1..=4 {
        let d = make_dendroid(depth).unwrap();
        assert_eq!(dendroid_depth(&common::shuffled(&d.structure, 7)), Some(depth));
        let mut broken = d.structure.clone();
        let s = broken.signature().relation_index("S").unwrap();
        broken.remove_at(s, &[1, 2]).unwrap();
        assert_eq!(dendroid_depth(&broken), None);
    }
    assert_eq!(dendroid_depth(&common::path(3)), None);
}

#[test]
fn zigzag_examples_under_dictionary_order() {
    let d1 = make_dendroid(1).unwrap();
    let z = find_zigzag(&d1, &d1.lex_order()).unwrap();
    assert_eq!(z.path, vec![0, 2]);
    assert_eq!(z.parity, Parity::Odd);

    let d2 = make_dendroid(2).unwrap();
    let z = find_zigzag(&d2, &d2.lex_order()).unwrap();
    assert_eq!(z.path, vec![0, 2, 5]);
    assert_eq!(z.parity, Parity::Even);

    // Reversing the order swaps left and right at every step.
    let z = find_zigzag(&d2, &d2.lex_order().reversed()).unwrap();
    assert_eq!(z.path, vec![0, 1, 4]);
}

#[test]
fn sentence_tracks_parity_under_random_orders() {
    let phi = phi_even_zigzag();
    for depth in 1..=5 {
        let d = make_dendroid(depth).unwrap();
        for seed in 0..8 {
            let order = random_order(d.size(), seed * 31 + depth as u64);
            let s = d.ordered(&order).unwrap();
            let truth = evaluate_sentence(&s, &phi).unwrap();
            let parity = find_zigzag(&d, &order).unwrap().parity;
            assert_eq!(truth, depth % 2 == 0, "depth {depth} seed {seed}");
            assert_eq!(parity == Parity::Even, depth % 2 == 0);
        }
    }
}

#[test]
fn experiment_is_consistent_and_finds_a_small_witness() {
    let report = class_invariance_experiment(1..=4, 10, 3, 4).unwrap();
    assert!(report.consistent());
    // Depth 1 is exhaustive over 3! orders.
    assert_eq!(report.rows.iter().filter(|r| r.depth == 1).count(), 6);
    assert_eq!(report.rows.iter().filter(|r| r.depth == 3).count(), 12);
    let tsv = report.to_tsv();
    assert_eq!(tsv.lines().count(), report.rows.len() + 1);
    let Some(InvarianceVerdict::NotInvariant { structure, order0, order1 }) = report.witness else {
        panic!("expected a witness of non-invariance");
    };
    assert!(structure.size() <= 4);
    assert_eq!(dendroid_depth(&structure), None);
    let phi = phi_even_zigzag();
    let t0 = evaluate_sentence(&structure.clone().with_order("<", order0).unwrap(), &phi).unwrap();
    let t1 = evaluate_sentence(&structure.with_order("<", order1).unwrap(), &phi).unwrap();
    assert_ne!(t0, t1);
}

#[test]
fn deep_dendroids_are_one_round_similar() {
    let report = deep_dendroid_similarity(1, None).unwrap();
    assert!(report.passed());
    assert_eq!(report.rows[0].depths, (4, 5));
    assert_eq!(report.rows[0].winner, Some(Winner::Duplicator));
    assert_eq!(report.rows[1].winner, Some(Winner::Spoiler));
    assert_eq!(report.rows.len(), 3);
}

#[test]
fn two_rounds_report_the_cap() {
    let report = deep_dendroid_similarity(2, Some(200_000)).unwrap();
    assert_eq!(report.rows[0].depths, (8, 9));
    assert_eq!(report.rows[0].winner, None);
    assert!(report.to_tsv().contains("cap-exceeded"));
}
