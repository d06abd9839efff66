mod common;

use common::{close, naive_eval, naive_sentence, random_ep, random_formula, rng};
use fo2inv::eval::{assignment, evaluate, evaluate_sentence, holds_under_orders, EvalError, OrderMode, OrderVerdict};
use fo2inv::{parse_formula, Formula, Fragment, LinearOrder, Signature, Structure, Var};
use proptest::prelude::*;
use std::collections::HashMap;

fn c2(s: &str) -> Formula {
    parse_formula(s, Fragment::C2, None).unwrap()
}

fn psi_max() -> Formula {
    c2("exists x. (P(x) & forall y. y <= x)")
}

fn chain_with_p(p: usize) -> Structure {
    let sig = Signature::new().with_relation("P", 1);
    let mut s = Structure::new(sig, 2).unwrap();
    s.insert("P", &[p]).unwrap();
    s
}

#[test]
fn trivially_true_sentence() {
    let s = Structure::new(Signature::new(), 3).unwrap();
    assert!(evaluate_sentence(&s, &c2("exists x. x = x")).unwrap());
}

#[test]
fn maximum_in_predicate_on_chain() {
    let ord = LinearOrder::identity(2);
    let top = chain_with_p(1).with_order("<", ord.clone()).unwrap();
    let bottom = chain_with_p(0).with_order("<", ord).unwrap();
    assert!(evaluate_sentence(&top, &psi_max()).unwrap());
    assert!(!evaluate_sentence(&bottom, &psi_max()).unwrap());
}

#[test]
fn counting_forces_cardinality() {
    let s = Structure::new(Signature::new(), 5).unwrap();
    assert!(evaluate_sentence(&s, &c2("exists>=3 x. true")).unwrap());
    assert!(!evaluate_sentence(&s, &c2("exists>=6 x. true")).unwrap());
}

#[test]
fn assignments_and_errors() {
    let mut s = chain_with_p(1);
    assert!(evaluate(&s, &c2("P(x)"), &assignment(&[("x", 1)])).unwrap());
    assert!(!evaluate(&s, &c2("P(x)"), &assignment(&[("x", 0)])).unwrap());
    assert!(matches!(evaluate(&s, &c2("P(x)"), &[]), Err(EvalError::Unassigned(_))));
    assert!(matches!(
        evaluate_sentence(&s, &c2("exists x. Q(x)")),
        Err(EvalError::Uninterpreted(_))
    ));
    assert!(matches!(
        evaluate_sentence(&s, &c2("exists x. exists y. x < y")),
        Err(EvalError::Uninterpreted(_))
    ));
    s.set_order("<", LinearOrder::identity(2)).unwrap();
    assert!(evaluate_sentence(&s, &c2("exists x. exists y. x < y")).unwrap());
}

#[test]
fn order_free_sentences_never_vary() {
    let mut r = rng(3);
    for _ in 0..20 {
        let s = random_ep(4, 0.3, &mut r, false);
        let phi = close(random_formula(&mut r, 3, false, 0));
        let v = holds_under_orders(&s, &phi, "<", OrderMode::default()).unwrap();
        assert!(!matches!(v, OrderVerdict::Varies { .. }));
    }
}

#[test]
fn maximum_in_predicate_varies() {
    match holds_under_orders(&chain_with_p(0), &psi_max(), "<", OrderMode::default()).unwrap() {
        OrderVerdict::Varies {
            satisfying,
            falsifying,
        } => {
            assert_eq!(satisfying.sequence(), &[1, 0]);
            assert_eq!(falsifying.sequence(), &[0, 1]);
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn maxima_always_exist() {
    let mut r = rng(8);
    for n in 1..6 {
        let s = random_ep(n, 0.4, &mut r, false);
        let v = holds_under_orders(&s, &c2("exists x. forall y. y <= x"), "<", OrderMode::default()).unwrap();
        assert_eq!(v, OrderVerdict::ConstantTrue);
    }
}

#[test]
fn exhaustive_cap() {
    let s = Structure::new(Signature::new(), 9).unwrap();
    assert!(matches!(
        holds_under_orders(&s, &c2("exists x. forall y. y <= x"), "<", OrderMode::default()),
        Err(EvalError::CapExceeded { .. })
    ));
    let sampled = holds_under_orders(
        &s,
        &c2("exists x. forall y. y <= x"),
        "<",
        OrderMode::Sample { count: 5, seed: 1 },
    );
    assert_eq!(sampled.unwrap(), OrderVerdict::ConstantTrue);
}

#[test]
fn sample_mode_is_seeded() {
    let s = chain_with_p(0);
    let mode = OrderMode::Sample { count: 3, seed: 42 };
    let a = holds_under_orders(&s, &psi_max(), "<", mode).unwrap();
    let b = holds_under_orders(&s, &psi_max(), "<", mode).unwrap();
    assert_eq!(a, b);
    assert!(matches!(a, OrderVerdict::Varies { .. }));
}

#[test]
fn agrees_with_naive_evaluation_on_small_structures() {
    let mut r = rng(11);
    for i in 0..100 {
        let phi = random_formula(&mut r, 4, true, 3);
        for n in 1..=3 {
            let s = random_ep(n, 0.4, &mut r, true);
            for a in 0..n {
                for b in 0..n {
                    let asg = assignment(&[("x", a), ("y", b)]);
                    let mut env = HashMap::from([("x".to_string(), a), ("y".to_string(), b)]);
                    assert_eq!(
                        evaluate(&s, &phi, &asg).unwrap(),
                        naive_eval(&s, &phi, &mut env),
                        "formula {i}"
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluator_matches_naive(seed in any::<u64>(), n in 1usize..6, depth in 1usize..5) {
        let mut r = rng(seed);
        let s = random_ep(n, 0.3, &mut r, true);
        let phi = close(random_formula(&mut r, depth, true, 4));
        prop_assert_eq!(evaluate_sentence(&s, &phi).unwrap(), naive_sentence(&s, &phi));
    }

    #[test]
    fn count_one_is_exists(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let s = random_ep(n, 0.3, &mut r, true);
        let x = Var::x();
        let body = random_formula(&mut r, 3, true, 0);
        let a = close(Formula::count_exists(1, &x, body.clone()));
        let b = close(Formula::exists(&x, body));
        prop_assert_eq!(evaluate_sentence(&s, &a).unwrap(), evaluate_sentence(&s, &b).unwrap());
    }

    #[test]
    fn verdict_stable_under_relabelling(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let s = random_ep(n, 0.3, &mut r, false);
        let phi = close(random_formula(&mut r, 3, true, 0));
        let t = common::shuffled(&s, seed ^ 1);
        let a = holds_under_orders(&s, &phi, "<", OrderMode::default()).unwrap();
        let b = holds_under_orders(&t, &phi, "<", OrderMode::default()).unwrap();
        prop_assert_eq!(
            matches!(a, OrderVerdict::Varies { .. }),
            matches!(b, OrderVerdict::Varies { .. })
        );
        if !matches!(a, OrderVerdict::Varies { .. }) {
            prop_assert_eq!(a, b);
        }
    }
}
