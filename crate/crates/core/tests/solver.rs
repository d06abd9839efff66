mod common;

use common::{close, naive_sentence, random_ep, random_formula, rng};
use fo2inv::eval::evaluate_sentence;
use fo2inv::parser::{parse_formula, Fragment};
use fo2inv::solver::{
    check_invariance, check_invariance_brute_force, find_model, find_model_of_size, normal_form_of_sentence,
    scott_normal_form, shrink_model, validity_via_invariance, InvarianceVerdict, SolverError,
};
use fo2inv::{LinearOrder, Structure};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn fo2(s: &str) -> fo2inv::Formula {
    parse_formula(s, Fragment::Fo2, None).unwrap()
}

#[test]
fn maximum_exists_normal_form_shape() {
    let nf = scott_normal_form(&fo2("exists x. forall y. y <= x")).unwrap();
    for side in &nf.sides {
        assert_eq!(side.universal.len(), 1, "{}", nf.to_text());
        assert_eq!(side.existential.len(), 1, "{}", nf.to_text());
    }
}

#[test]
fn maximum_in_unary_predicate_is_not_invariant() {
    let phi = fo2("exists x. P(x) & forall y. y <= x");
    match check_invariance(&phi, 3).unwrap() {
        InvarianceVerdict::NotInvariant { structure, .. } => assert_eq!(structure.size(), 2),
        v => panic!("{v:?}"),
    }
}

#[test]
fn maximum_exists_is_invariant() {
    let phi = fo2("exists x. forall y. y <= x");
    assert!(check_invariance(&phi, 4).unwrap().is_invariant());
}

#[test]
fn validity_examples() {
    assert!(validity_via_invariance(&fo2("forall x. x = x"), 3).unwrap());
    assert!(!validity_via_invariance(&fo2("exists x. P(x)"), 3).unwrap());
    assert!(!validity_via_invariance(&fo2("exists x. exists y. !(x = y)"), 3).unwrap());
    assert!(validity_via_invariance(&fo2("forall x. forall y. (x < y | y < x | x = y)"), 3).unwrap());
}

#[test]
fn shrink_small_chain() {
    let nf = normal_form_of_sentence(&fo2("forall x. exists y. (x < y | x = y) & S(y)")).unwrap();
    let found = find_model(&nf, 3).unwrap();
    let model = found.model.unwrap();
    let (small, _) = shrink_model(&nf, &model).unwrap();
    assert!(nf.satisfied_by(&small).unwrap());
}

fn order_pair(s: Structure, o0: LinearOrder, o1: LinearOrder) -> Structure {
    s.with_order("<0", o0).unwrap().with_order("<1", o1).unwrap()
}

#[test]
fn universal_sentence_has_no_existential_part() {
    let nf = scott_normal_form(&fo2("forall x. forall y. (E(x, y) -> x < y)")).unwrap();
    let fresh_free = nf.sides.iter().filter(|s| s.existential.is_empty()).count();
    assert!(fresh_free >= 1, "{}", nf.to_text());
    assert!(!nf.sides[0].universal.is_empty());
}

#[test]
fn sides_never_mention_the_other_order() {
    let nf = scott_normal_form(&fo2("exists x. P(x) & forall y. y <= x")).unwrap();
    for (i, other) in [(0, "<1"), (1, "<0")] {
        assert!(nf.matrices(i).all(|m| !m.mentions(other) && m.is_quantifier_free()));
    }
    assert!(nf.signature.relations().iter().all(|r| r.arity <= 2));
}

#[test]
fn false_matrix_has_no_model() {
    let nf = normal_form_of_sentence(&fo2("forall x. forall y. false")).unwrap();
    let found = find_model(&nf, 4).unwrap();
    assert!(found.model.is_none());
    assert!(!found.complete);
}

#[test]
fn maximum_exists_has_one_element_model() {
    let nf = normal_form_of_sentence(&fo2("exists x. forall y. y <= x")).unwrap();
    let model = find_model(&nf, 3).unwrap().model.unwrap();
    assert_eq!(model.size(), 1);
    assert!(nf.satisfied_by(&model).unwrap());
}

#[test]
fn maximum_in_predicate_two_sided_model() {
    let phi = fo2("exists x. P(x) & forall y. y <= x");
    let nf = scott_normal_form(&phi).unwrap();
    let model = find_model(&nf, 3).unwrap().model.unwrap();
    assert_eq!(model.size(), 2);
    let s = nf.project(&model).unwrap();
    let on = |o: &str| evaluate_sentence(&s, &phi.substitute_symbol("<", o).unwrap()).unwrap();
    assert!(on("<0"));
    assert!(!on("<1"));
    let p = s.signature().relation_index("P").unwrap();
    let top0 = s.order("<0").unwrap().last().unwrap();
    let top1 = s.order("<1").unwrap().last().unwrap();
    assert!(s.contains(p, &[top0]));
    assert!(!s.contains(p, &[top1]));
}

#[test]
fn order_free_sentences_are_invariant() {
    assert!(check_invariance(&fo2("exists x. forall y. E(x, y) | P(y)"), 3).unwrap().is_invariant());
}

#[test]
fn order_implies_edge_is_not_invariant() {
    let phi = fo2("forall x. forall y. (x < y -> E(x, y))");
    match check_invariance(&phi, 3).unwrap() {
        InvarianceVerdict::NotInvariant {
            structure,
            order0,
            order1,
        } => {
            assert_eq!(structure.size(), 2);
            let e = structure.signature().relation_index("E").unwrap();
            let edges = structure.tuples(e);
            assert_eq!(edges.len(), 1);
            let (a, b) = (edges[0][0], edges[0][1]);
            assert_ne!(a, b);
            assert!(order0.less(a, b));
            assert!(order1.less(b, a));
        }
        v => panic!("{v:?}"),
    }
    assert!(!check_invariance_brute_force(&phi, 2).unwrap().is_invariant());
}

#[test]
fn shrink_long_chain_with_top_witness() {
    let nf = normal_form_of_sentence(&fo2("forall x. exists y. (x <0 y | x = y) & S(y)")).unwrap();
    let mut base = Structure::new(nf.base.clone(), 50).unwrap();
    base.insert("S", &[49]).unwrap();
    let base = order_pair(base, LinearOrder::identity(50), LinearOrder::identity(50));
    let model = nf.expand(&base).unwrap();
    assert!(nf.satisfied_by(&model).unwrap());
    let (small, trace) = shrink_model(&nf, &model).unwrap();
    assert!(small.size() < 50);
    assert!(nf.satisfied_by(&small).unwrap());
    assert_eq!(trace.kept.len(), small.size());
}

#[test]
fn shrink_keeps_small_models() {
    let nf = normal_form_of_sentence(&fo2("exists x. forall y. y <= x")).unwrap();
    let model = find_model(&nf, 2).unwrap().model.unwrap();
    let (small, trace) = shrink_model(&nf, &model).unwrap();
    assert_eq!(small.size(), model.size());
    assert!(trace.repairs.is_empty());
}

#[test]
fn shrink_rejects_non_models() {
    let nf = normal_form_of_sentence(&fo2("forall x. S(x)")).unwrap();
    let base = order_pair(Structure::new(nf.base.clone(), 2).unwrap(), LinearOrder::identity(2), LinearOrder::identity(2));
    let model = nf.expand(&base).unwrap();
    assert!(matches!(shrink_model(&nf, &model), Err(SolverError::NotAModel(_))));
}

fn random_order(n: usize, r: &mut rand_chacha::ChaCha8Rng) -> LinearOrder {
    let mut seq: Vec<usize> = (0..n).collect();
    seq.shuffle(r);
    LinearOrder::from_sequence(seq).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn shrink_output_is_a_bounded_model(seed in any::<u64>(), n in 8usize..24) {
        let mut r = rng(seed);
        let psi = close(random_formula(&mut r, 3, true, 0));
        let mut s = random_ep(n, 0.2, &mut r, false);
        s = order_pair(s, random_order(n, &mut r), random_order(n, &mut r));
        let psi0 = psi.substitute_symbol("<", "<0").unwrap();
        prop_assume!(naive_sentence(&s, &psi0));
        let nf = normal_form_of_sentence(&psi).unwrap();
        let model = nf.expand(&s.reduct(nf.base.clone()).unwrap()).unwrap();
        prop_assert!(nf.satisfied_by(&model).unwrap());
        let (small, trace) = shrink_model(&nf, &model).unwrap();
        prop_assert!(nf.satisfied_by(&small).unwrap());
        prop_assert!(naive_sentence(&nf.project(&small).unwrap(), &psi0));
        prop_assert!(BigUint::from(small.size()) <= nf.completeness_bound());
        prop_assert!(small.size() <= n);
        let sets = [&trace.w0, &trace.w1, &trace.w2];
        for i in 0..3 {
            for j in i + 1..3 {
                prop_assert!(sets[i].iter().all(|e| !sets[j].contains(e)));
            }
        }
        for o in ["<0", "<1"] {
            prop_assert_eq!(small.order(o).unwrap(), &model.order(o).unwrap().induced(&trace.kept));
        }
        for rep in &trace.repairs {
            prop_assert!(trace.w0.contains(&rep.partner));
            prop_assert_ne!(rep.partner, rep.element);
            let ord = model.order(["<0", "<1"][rep.side]).unwrap();
            prop_assert_eq!(ord.less(rep.element, rep.partner), ord.less(rep.element, rep.source));
        }
    }

    #[test]
    fn normal_form_expansion_and_projection(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let phi = close(random_formula(&mut r, 3, true, 0));
        let nf = scott_normal_form(&phi).unwrap();
        let s = order_pair(random_ep(n, 0.3, &mut r, false), random_order(n, &mut r), random_order(n, &mut r));
        let two_sided = naive_sentence(&s, &phi.substitute_symbol("<", "<0").unwrap())
            && !naive_sentence(&s, &phi.substitute_symbol("<", "<1").unwrap());
        let expanded = nf.expand(&s.reduct(nf.base.clone()).unwrap()).unwrap();
        prop_assert_eq!(nf.satisfied_by(&expanded).unwrap(), two_sided);
        if let Some(m) = find_model_of_size(&nf, n).unwrap() {
            let p = nf.project(&m).unwrap();
            prop_assert!(naive_sentence(&p, &phi.substitute_symbol("<", "<0").unwrap()));
            prop_assert!(!naive_sentence(&p, &phi.substitute_symbol("<", "<1").unwrap()));
        }
    }
}
