mod common;

use common::{graph, path, random_ep, rng, shuffled};
use fo2inv::dendroid::make_dendroid;
use fo2inv::structure::OrderAtom;
use fo2inv::{
    canonical_key, enumerate_structures, is_isomorphic, parse_structure, print_structure, LinearOrder,
    PointedStructure, Signature, Structure, StructureError,
};
use itertools::Itertools;
use proptest::prelude::*;

/// Brute-force isomorphism: some bijection maps relations, orders and the optional centers onto each other.
fn brute_isomorphic(a: &Structure, b: &Structure, centers: Option<(usize, usize)>, with_orders: bool) -> bool {
    let n = a.size();
    if n != b.size() {
        return false;
    }
    let rels = a.signature().relations().len();
    (0..n).permutations(n).any(|p| {
        if let Some((ca, cb)) = centers {
            if p[ca] != cb {
                return false;
            }
        }
        let rel_ok = (0..rels).all(|r| {
            let mapped: Vec<Vec<usize>> = a.tuples(r).iter().map(|t| t.iter().map(|&e| p[e]).collect()).sorted().collect();
            mapped == b.tuples(r).into_iter().sorted().collect::<Vec<_>>()
        });
        let ord_ok = !with_orders
            || a.orders().iter().all(|(name, oa)| match b.order(name) {
                Some(ob) => (0..n).cartesian_product(0..n).all(|(u, v)| oa.less(u, v) == ob.less(p[u], p[v])),
                None => false,
            });
        rel_ok && ord_ok
    })
}

fn pointed(s: &Structure, center: usize) -> PointedStructure {
    PointedStructure {
        structure: s.clone(),
        center,
    }
}

#[test]
fn load_smallest_structure() {
    let s = parse_structure("signature P/1\ndomain 1\nrel P 0").unwrap();
    assert_eq!(s.size(), 1);
    assert!(s.holds("P", &[0]).unwrap());
}

#[test]
fn load_depth_one_dendroid_file() {
    let text = print_structure(&make_dendroid(1).unwrap().structure);
    let s = parse_structure(&text).unwrap();
    assert_eq!(s.size(), 3);
    for (name, count) in [("T", 2), ("D", 2), ("S", 2)] {
        let rel = s.signature().relation_index(name).unwrap();
        assert_eq!(s.tuple_count(rel), count, "{name}");
    }
}

#[test]
fn load_permutation_order() {
    let s = parse_structure("domain 2\norder <0 : 1 0").unwrap();
    let o = s.order("<0").unwrap();
    assert!(o.less(1, 0));
    assert!(!o.less(0, 1));
}

#[test]
fn load_errors() {
    let bad = [
        "signature P/1\ndomain 2\nrel P 0 1",
        "domain 2\nrel E 0 5",
        "domain 2\norder <0 : 0 1\norder <0 : 1 0",
        "domain 3\norder < : 0 0 1",
        "domain 2\nfrobnicate",
    ];
    for text in bad {
        assert!(parse_structure(text).is_err(), "{text}");
    }
    match parse_structure("domain 2\n\nfrobnicate") {
        Err(e) => assert!(e.to_string().contains('3'), "{e}"),
        Ok(_) => panic!("accepted"),
    }
}

#[test]
fn print_parse_round_trip() {
    let mut r = rng(5);
    for n in 1..6 {
        let s = random_ep(n, 0.3, &mut r, true);
        let back = parse_structure(&print_structure(&s)).unwrap();
        for (r, sym) in s.signature().relations().iter().enumerate() {
            let br = back.signature().relation_index(&sym.name).unwrap();
            assert_eq!(s.tuples(r), back.tuples(br));
        }
        assert_eq!(s.orders(), back.orders());
    }
}

#[test]
fn gaifman_examples() {
    let sig = Signature::new().with_relation("P", 1);
    let mut s = Structure::new(sig, 3).unwrap();
    s.insert("P", &[1]).unwrap();
    assert_eq!(s.gaifman().max_degree(), 0);

    let d = make_dendroid(1).unwrap().structure;
    let g = d.gaifman();
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        assert!(g.adjacent(a, b));
    }

    let loop_only = graph(2, &[(0, 0)]);
    assert_eq!(loop_only.gaifman().max_degree(), 0);
}

#[test]
fn orders_do_not_contribute_to_gaifman() {
    let s = Structure::new(Signature::new(), 4)
        .unwrap()
        .with_order("<", LinearOrder::identity(4))
        .unwrap();
    assert_eq!(s.degree(), 0);
}

#[test]
fn distance_examples() {
    let p = path(3);
    assert_eq!(p.distance(1, 1).unwrap(), Some(0));
    assert_eq!(p.distance(0, 2).unwrap(), Some(2));
    let iso = Structure::new(Signature::new(), 2).unwrap();
    assert_eq!(iso.distance(0, 1).unwrap(), None);
    assert!(matches!(iso.distance(0, 7), Err(StructureError::OutOfRange { .. })));
}

#[test]
fn atomic_type_examples() {
    let s = parse_structure("signature P/1\ndomain 1\nrel P 0").unwrap();
    assert_eq!(s.atomic_type1(0).unwrap().bits, vec![true]);

    let sig = Signature::new().with_relation("E", 2);
    let mut s = Structure::new(sig, 2).unwrap();
    s.insert("E", &[0, 1]).unwrap();
    let s = s.with_order("<0", LinearOrder::identity(2)).unwrap();
    let (_, _, t) = s.atomic_types(0, 1).unwrap();
    // E(x,x), E(x,y), E(y,x), E(y,y), x = y
    assert_eq!(t.vocab, vec![false, true, false, false, false]);
    assert_eq!(t.orders, vec![("<0".to_string(), OrderAtom::Less)]);
    let (_, _, diag) = s.atomic_types(1, 1).unwrap();
    assert_eq!(diag.orders[0].1, OrderAtom::Equal);
}

#[test]
fn atomic_types_reject_ternary() {
    let sig = Signature::new().with_relation("R", 3);
    let s = Structure::new(sig, 2).unwrap();
    assert!(matches!(s.atomic_types(0, 1), Err(StructureError::ArityTooLarge(_))));
}

#[test]
fn canonical_key_examples() {
    let sig = Signature::new().with_relation("P", 1);
    let mut a = Structure::new(sig.clone(), 1).unwrap();
    let mut b = Structure::new(sig, 1).unwrap();
    a.insert("P", &[0]).unwrap();
    b.insert("P", &[0]).unwrap();
    assert_eq!(canonical_key(&pointed(&a, 0)), canonical_key(&pointed(&b, 0)));

    let p = path(3);
    assert_ne!(canonical_key(&pointed(&p, 1)), canonical_key(&pointed(&p, 0)));
    assert!(!brute_isomorphic(&p, &p, Some((1, 0)), true));

    let o1 = p.clone().with_order("<", LinearOrder::from_sequence(vec![0, 1, 2]).unwrap()).unwrap();
    let o2 = p.clone().with_order("<", LinearOrder::from_sequence(vec![1, 0, 2]).unwrap()).unwrap();
    assert!(!brute_isomorphic(&o1, &o2, Some((1, 1)), true));
    assert_ne!(canonical_key(&pointed(&o1, 1)), canonical_key(&pointed(&o2, 1)));
    assert_eq!(
        canonical_key(&pointed(&o1.without_orders(), 1)),
        canonical_key(&pointed(&o2.without_orders(), 1))
    );
}

/// Number of isomorphism classes among all labelled structures of size `n`.
fn labelled_quotient(sig: &Signature, n: usize) -> usize {
    let atoms: Vec<(String, Vec<usize>)> = sig
        .relations()
        .iter()
        .flat_map(|r| {
            (0..r.arity)
                .map(|_| 0..n)
                .multi_cartesian_product()
                .map(move |t| (r.name.clone(), t))
        })
        .collect();
    let mut reps: Vec<Structure> = Vec::new();
    for mask in 0u64..(1 << atoms.len()) {
        let mut s = Structure::new(sig.clone(), n).unwrap();
        for (i, (name, t)) in atoms.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s.insert(name, t).unwrap();
            }
        }
        if !reps.iter().any(|r| brute_isomorphic(r, &s, None, true)) {
            reps.push(s);
        }
    }
    reps.len()
}

#[test]
fn enumeration_counts() {
    let p = Signature::new().with_relation("P", 1);
    assert_eq!(enumerate_structures(p.clone(), 1, None).unwrap().len(), 2);
    let two = enumerate_structures(p.clone(), 2, None).unwrap();
    assert_eq!(two.len(), labelled_quotient(&p, 1) + labelled_quotient(&p, 2));
    assert_eq!(two.len(), 5);
    assert_eq!(enumerate_structures(Signature::new(), 3, None).unwrap().len(), 3);

    let e = Signature::new().with_relation("E", 2);
    let cat = enumerate_structures(e.clone(), 3, None).unwrap();
    for n in 1..=3 {
        assert_eq!(cat.count_of_size(n), labelled_quotient(&e, n), "n = {n}");
    }
    let all: Vec<Structure> = cat.iter().collect();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            assert!(!is_isomorphic(a, b));
        }
    }
}

#[test]
fn enumeration_degree_bound() {
    let e = Signature::new().with_relation("E", 2);
    let cat = enumerate_structures(e, 3, Some(1)).unwrap();
    assert!(cat.iter().all(|s| s.degree() <= 1));
    assert!(cat.iter().any(|s| s.size() == 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_key_matches_brute_force(seed in any::<u64>(), n in 1usize..6, ca in 0usize..6, cb in 0usize..6, ordered in any::<bool>()) {
        let mut r = rng(seed);
        let a = random_ep(n, 0.3, &mut r, ordered);
        let b = if seed % 2 == 0 { shuffled(&a, seed) } else { random_ep(n, 0.3, &mut r, ordered) };
        let (ca, cb) = (ca % n, cb % n);
        let same = brute_isomorphic(&a, &b, Some((ca, cb)), true);
        prop_assert_eq!(canonical_key(&pointed(&a, ca)) == canonical_key(&pointed(&b, cb)), same);
        prop_assert_eq!(is_isomorphic(&a, &b), brute_isomorphic(&a, &b, None, true));
    }

    #[test]
    fn distance_is_a_metric(seed in any::<u64>(), n in 1usize..9) {
        let s = random_ep(n, 0.15, &mut rng(seed), false);
        let d = |a, b| s.distance(a, b).unwrap();
        for a in 0..n {
            prop_assert_eq!(d(a, a), Some(0));
            for b in 0..n {
                prop_assert_eq!(d(a, b), d(b, a));
                if let Some(x) = d(a, b) {
                    prop_assert!(x < n);
                    for c in 0..n {
                        if let (Some(y), Some(z)) = (d(b, c), d(a, c)) {
                            prop_assert!(z <= x + y);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_two_type_collapses_to_one_type(seed in any::<u64>(), n in 1usize..5) {
        let s = random_ep(n, 0.4, &mut rng(seed), true);
        for a in 0..n {
            let (t1, _, t2) = s.atomic_types(a, a).unwrap();
            prop_assert!(t2.agrees_with_diagonal(s.signature(), &t1));
            prop_assert_eq!(t2.swapped_vocab(s.signature()), t2.vocab.clone());
        }
    }
}
