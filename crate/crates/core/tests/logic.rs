use fo2inv::{analyze, parse_formula, print_formula, substitute_symbol, Formula, Fragment, LogicError, Signature, Var};
use proptest::prelude::*;

fn v(name: &str) -> Var {
    Var::new(name)
}

fn fo2(s: &str) -> Formula {
    parse_formula(s, Fragment::Fo2, None).unwrap()
}

fn var_strategy() -> impl Strategy<Value = Var> {
    prop_oneof![Just(v("x")), Just(v("y")), Just(v("z"))]
}

fn leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        var_strategy().prop_map(|a| Formula::atom("P", &[&a])),
        (var_strategy(), var_strategy()).prop_map(|(a, b)| Formula::atom("E", &[&a, &b])),
        (var_strategy(), var_strategy(), 0..3usize).prop_map(|(a, b, i)| {
            Formula::atom(["<", "<0", "<1"][i], &[&a, &b])
        }),
        (var_strategy(), var_strategy()).prop_map(|(a, b)| Formula::eq(&a, &b)),
    ]
}

fn formula() -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
            (var_strategy(), inner.clone()).prop_map(|(x, b)| Formula::exists(&x, b)),
            (var_strategy(), inner.clone()).prop_map(|(x, b)| Formula::forall(&x, b)),
            (1..5usize, var_strategy(), inner).prop_map(|(k, x, b)| Formula::count_exists(k, &x, b)),
        ]
    })
}

#[test]
fn less_or_equal_desugars() {
    let (x, y) = (v("x"), v("y"));
    let expected = Formula::exists(
        &x,
        Formula::forall(&y, Formula::or(Formula::atom("<", &[&y, &x]), Formula::eq(&y, &x))),
    );
    assert_eq!(fo2("exists x. forall y. y <= x"), expected);
}

#[test]
fn counting_quantifier_parses() {
    let x = v("x");
    let f = parse_formula("exists>=3 x. P(x)", Fragment::C2, None).unwrap();
    assert_eq!(f, Formula::count_exists(3, &x, Formula::atom("P", &[&x])));
}

#[test]
fn precedence_and_associativity() {
    let p = |n: &str| Formula::atom(n, &[&v("x")]);
    assert_eq!(
        fo2("A(x) | B(x) & C(x)"),
        Formula::or(p("A"), Formula::and(p("B"), p("C")))
    );
    assert_eq!(
        fo2("A(x) -> B(x) -> C(x)"),
        Formula::implies(p("A"), Formula::implies(p("B"), p("C")))
    );
    assert_eq!(
        fo2("!A(x) & B(x) <-> C(x)"),
        Formula::iff(Formula::and(Formula::not(p("A")), p("B")), p("C"))
    );
    assert_eq!(
        fo2("exists x. A(x) & B(x)"),
        Formula::exists(&v("x"), Formula::and(p("A"), p("B")))
    );
}

#[test]
fn parse_errors() {
    assert!(matches!(
        parse_formula("exists z. P(z)", Fragment::Fo2, None),
        Err(LogicError::NotTwoVariable(_))
    ));
    assert!(parse_formula("exists z. P(z)", Fragment::Fo, None).is_ok());
    assert!(matches!(
        parse_formula("exists>=2 x. P(x)", Fragment::Fo2, None),
        Err(LogicError::CountingNotAllowed)
    ));
    assert!(matches!(parse_formula("P(x) &", Fragment::Fo2, None), Err(LogicError::Parse { .. })));
    let sig = Signature::new().with_relation("P", 1);
    assert!(matches!(
        parse_formula("Q(x)", Fragment::Fo2, Some(&sig)),
        Err(LogicError::UnknownRelation(_))
    ));
    assert!(matches!(
        parse_formula("P(x, y)", Fragment::Fo2, Some(&sig)),
        Err(LogicError::ArityMismatch { .. })
    ));
    assert!(matches!(
        parse_formula("P(x) & P(x, y)", Fragment::Fo2, None),
        Err(LogicError::InconsistentArity(_))
    ));
}

#[test]
fn substitution_examples() {
    let f = fo2("x < y");
    assert_eq!(substitute_symbol(&f, "<", "<0").unwrap(), fo2("x <0 y"));
    let g = fo2("exists x. P(x)");
    assert_eq!(substitute_symbol(&g, "<", "<0").unwrap(), g);

    let phi = fo2("exists x. P(x) & forall y. y <= x");
    let assembled = Formula::and(
        substitute_symbol(&phi, "<", "<0").unwrap(),
        Formula::not(substitute_symbol(&phi, "<", "<1").unwrap()),
    );
    let used: Vec<String> = analyze(&assembled).order_symbols_used.into_iter().collect();
    assert_eq!(used, vec!["<0", "<1"]);
}

#[test]
fn substitution_arity_mismatch() {
    assert!(matches!(
        substitute_symbol(&fo2("P(x) & E(x, y)"), "P", "E"),
        Err(LogicError::ArityMismatch { .. })
    ));
}

#[test]
fn analyze_examples() {
    let r = analyze(&fo2("exists x. forall y. x < y"));
    assert_eq!(r.quantifier_rank, 2);
    assert!(r.uses_only_xy);

    let r = analyze(&fo2("exists x. (P(x) & forall y. y <= x)"));
    assert_eq!(r.quantifier_rank, 2);
    assert_eq!(r.order_symbols_used.into_iter().collect::<Vec<_>>(), vec!["<"]);

    let r = analyze(&parse_formula("exists>=3 x. P(x)", Fragment::C2, None).unwrap());
    assert_eq!(r.counting_index_max, 3);
    assert!(r.uses_counting);

    let r = analyze(&fo2("P(x)"));
    assert_eq!((r.quantifier_rank, r.counting_index_max), (0, 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(f in formula()) {
        let text = print_formula(&f);
        let back = parse_formula(&text, Fragment::Fo, None).unwrap();
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(print_formula(&back), text);
    }

    #[test]
    fn fresh_substitution_is_involutive(f in formula()) {
        let there = substitute_symbol(&f, "P", "Fresh").unwrap();
        prop_assert!(!there.mentions("P"));
        prop_assert_eq!(substitute_symbol(&there, "Fresh", "P").unwrap(), f);
    }

    #[test]
    fn substitution_preserves_rank(f in formula()) {
        let g = substitute_symbol(&f, "<", "<0").unwrap();
        prop_assert_eq!(analyze(&g).quantifier_rank, analyze(&f).quantifier_rank);
        prop_assert!(!g.mentions("<"));
    }

    #[test]
    fn counting_index_zero_iff_no_counting(f in formula()) {
        let r = analyze(&f);
        prop_assert_eq!(r.counting_index_max == 0, !r.uses_counting);
    }
}
