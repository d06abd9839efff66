mod common;

use std::io::Cursor;

use common::{close, copies, cycle, disjoint, matching, path, random_ep, random_formula, rng, shuffled};
use fo2inv::eval::evaluate_sentence;
use fo2inv::games::{
    counting_game_winner, fo2_game_winner, fo_game_winner, interactive_play, replay, GameError, GameKind,
    GameState, HumanRole, PebbleGame, SpoilerMove, StrategyCase, StrategyContext, Winner,
};
use fo2inv::locality::{build_orders, LocalityParams, OrderConstruction, Outcome};
use fo2inv::parser::{parse_formula, Fragment};
use fo2inv::{LinearOrder, Signature, Structure};
use rand::Rng;

fn chain(n: usize) -> Structure {
    let sig = Signature::new().with_relation("P", 1);
    Structure::new(sig, n)
        .unwrap()
        .with_order("<", LinearOrder::identity(n))
        .unwrap()
}

fn relation_chain(n: usize) -> Structure {
    let mut s = Structure::new(Signature::new().with_relation("R", 2), n).unwrap();
    for a in 0..n {
        for b in a + 1..n {
            s.insert("R", &[a, b]).unwrap();
        }
    }
    s
}

fn p_points(n: usize) -> Structure {
    let mut s = Structure::new(Signature::new().with_relation("P", 1), n).unwrap();
    for a in 0..n {
        s.insert("P", &[a]).unwrap();
    }
    s
}

// Independent game oracle: plain recursion over positions, no refinement.

fn same_type(s: [&Structure; 2], p: [[Option<usize>; 2]; 2]) -> bool {
    let mut e = Vec::new();
    for (i, st) in s.iter().enumerate() {
        let mut bits = Vec::new();
        let placed: Vec<usize> = p[i].iter().flatten().copied().collect();
        let slots: Vec<Option<usize>> = p[i].to_vec();
        for (rel, sym) in st.signature().relations().iter().enumerate() {
            for u in &slots {
                if sym.arity == 1 {
                    bits.push(u.map(|a| st.contains(rel, &[a])));
                } else {
                    for v in &slots {
                        bits.push(match (u, v) {
                            (Some(a), Some(b)) => Some(st.contains(rel, &[*a, *b])),
                            _ => None,
                        });
                    }
                }
            }
        }
        if placed.len() == 2 {
            let (a, b) = (p[i][0].unwrap(), p[i][1].unwrap());
            bits.push(Some(a == b));
            for o in st.orders().values() {
                bits.push(Some(o.rank(a) < o.rank(b)));
                bits.push(Some(o.rank(b) < o.rank(a)));
            }
        }
        e.push(bits);
    }
    e[0] == e[1]
}

fn oracle(s: [&Structure; 2], p: [[Option<usize>; 2]; 2], r: usize, cap: usize) -> bool {
    if !same_type(s, p) {
        return false;
    }
    if r == 0 {
        return true;
    }
    let n = [s[0].size(), s[1].size()];
    for side in 0..2 {
        for pebble in 0..2 {
            let other = 1 - side;
            let sets = |m: usize| -> Vec<Vec<usize>> {
                (1u32..(1 << m))
                    .map(|mask| (0..m).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>())
                    .filter(|v| v.len() <= cap)
                    .collect()
            };
            for pset in sets(n[side]) {
                // The duplicator needs a set of the same size every element of
                // which can be matched to some element of the spoiler's set.
                let ok = sets(n[other]).into_iter().filter(|q| q.len() == pset.len()).any(|qset| {
                    qset.iter().all(|&f| {
                        pset.iter().any(|&e| {
                            let mut q = p;
                            q[side][pebble] = Some(e);
                            q[other][pebble] = Some(f);
                            oracle(s, q, r - 1, cap)
                        })
                    })
                });
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

fn oracle_placed(a: &Structure, b: &Structure, k: usize, cap: usize) -> Winner {
    for x0 in 0..a.size() {
        for y0 in 0..a.size() {
            for x1 in 0..b.size() {
                for y1 in 0..b.size() {
                    if oracle([a, b], [[Some(x0), Some(y0)], [Some(x1), Some(y1)]], k, cap) {
                        return Winner::Duplicator;
                    }
                }
            }
        }
    }
    Winner::Spoiler
}

fn oracle_standard(a: &Structure, b: &Structure, k: usize) -> Winner {
    if oracle([a, b], [[None, None], [None, None]], k, 1) {
        Winner::Duplicator
    } else {
        Winner::Spoiler
    }
}

#[test]
fn fo_game_identity_and_chains() {
    let a = relation_chain(3);
    for q in 0..4 {
        assert_eq!(fo_game_winner(&a, &a, q).unwrap(), Winner::Duplicator);
    }
    assert_eq!(fo_game_winner(&relation_chain(2), &relation_chain(3), 1).unwrap(), Winner::Duplicator);
    assert_eq!(fo_game_winner(&relation_chain(2), &relation_chain(3), 2).unwrap(), Winner::Spoiler);
    let phi = parse_formula("exists x. (exists y. R(y,x)) & (exists y. R(x,y))", Fragment::Fo, None).unwrap();
    assert!(!evaluate_sentence(&relation_chain(2), &phi).unwrap());
    assert!(evaluate_sentence(&relation_chain(3), &phi).unwrap());
}

#[test]
fn fo_game_cap_is_reported() {
    let a = relation_chain(5);
    let b = relation_chain(6);
    let err = fo2inv::games::fo_game_winner_capped(&a, &b, 3, 2).unwrap_err();
    assert!(matches!(err, GameError::CapExceeded { .. }));
}

#[test]
fn ordered_chains_two_pebbles() {
    let (c2, c3) = (chain(2), chain(3));
    assert_eq!(fo2_game_winner(&c2, &c2, 3).unwrap(), Winner::Duplicator);
    assert_eq!(fo2_game_winner(&c2, &c3, 2).unwrap(), Winner::Spoiler);
    let phi = parse_formula("exists x. (exists y. y < x) & (exists y. x < y)", Fragment::Fo2, None).unwrap();
    assert_ne!(
        evaluate_sentence(&c2, &phi).unwrap(),
        evaluate_sentence(&c3, &phi).unwrap()
    );
}

#[test]
fn counting_separates_point_sets() {
    let (three, two) = (p_points(3), p_points(2));
    assert_eq!(counting_game_winner(&three, &two, 3).unwrap(), Winner::Spoiler);
    assert_eq!(fo2_game_winner(&three, &two, 3).unwrap(), Winner::Duplicator);
    assert_eq!(counting_game_winner(&three, &three, 3).unwrap(), Winner::Duplicator);
    let phi = parse_formula("exists>=3 x. P(x)", Fragment::C2, None).unwrap();
    assert!(evaluate_sentence(&three, &phi).unwrap());
    assert!(!evaluate_sentence(&two, &phi).unwrap());
}

#[test]
fn pebble_games_agree_with_the_oracle() {
    let mut r = rng(7);
    for trial in 0..120 {
        let n0 = r.gen_range(1..=3);
        let n1 = r.gen_range(1..=3);
        let ordered = r.gen_bool(0.5);
        let a = random_ep(n0, 0.3, &mut r, ordered);
        let b = if r.gen_bool(0.3) {
            shuffled(&a, trial)
        } else {
            random_ep(n1, 0.3, &mut r, ordered)
        };
        for k in 0..=2 {
            let one = PebbleGame::new(&a, &b, k, 1).unwrap();
            assert_eq!(one.winner(), oracle_placed(&a, &b, k, 1), "trial {trial} k {k}");
            assert_eq!(one.standard_winner(), oracle_standard(&a, &b, k), "trial {trial} k {k}");
            let two = PebbleGame::new(&a, &b, k, 2).unwrap();
            assert_eq!(two.winner(), oracle_placed(&a, &b, k, 2), "trial {trial} k {k} counting");
        }
    }
}

#[test]
fn fo_game_matches_the_standard_pebble_game_up_to_two_rounds() {
    let mut r = rng(11);
    for trial in 0..80 {
        let a = random_ep(r.gen_range(1..=4), 0.3, &mut r, true);
        let b = random_ep(r.gen_range(1..=4), 0.3, &mut r, true);
        for q in 0..=2 {
            let fo = fo_game_winner(&a, &b, q).unwrap();
            let pebble = PebbleGame::new(&a, &b, q, 1).unwrap().standard_winner();
            assert_eq!(fo, pebble, "trial {trial} q {q}");
        }
    }
}

fn corpus(seed: u64, size: usize, counting: usize, with_order: bool) -> Vec<fo2inv::Formula> {
    let mut r = rng(seed);
    (0..size)
        .map(|_| {
            let depth = r.gen_range(1..=4);
            close(random_formula(&mut r, depth, with_order, counting))
        })
        .collect()
}

#[test]
fn duplicator_wins_imply_agreement_on_the_corpus() {
    let corpora = [
        (corpus(3, 300, 0, false), corpus(4, 300, 3, false)),
        (corpus(5, 300, 0, true), corpus(6, 300, 3, true)),
    ];
    let mut r = rng(5);
    let mut agreeing = 0;
    for trial in 0..60 {
        let ordered = trial % 2 == 1;
        let (fo2_corpus, c2_corpus) = &corpora[trial % 2];
        let a = random_ep(r.gen_range(1..=3), 0.3, &mut r, ordered);
        let b = if ordered {
            random_ep(r.gen_range(1..=3), 0.3, &mut r, true)
        } else {
            with_twin(&a, r.gen_range(0..a.size()))
        };
        for k in 1..=3 {
            if fo2_game_winner(&a, &b, k).unwrap() == Winner::Duplicator {
                agreeing += 1;
                for phi in fo2_corpus.iter().filter(|f| f.quantifier_rank() <= k) {
                    assert_eq!(evaluate_sentence(&a, phi).unwrap(), evaluate_sentence(&b, phi).unwrap());
                }
            }
            if counting_game_winner(&a, &b, k).unwrap() == Winner::Duplicator {
                for phi in c2_corpus.iter().filter(|f| {
                    let rep = f.analyze();
                    rep.quantifier_rank <= k && rep.counting_index_max <= k
                }) {
                    assert_eq!(evaluate_sentence(&a, phi).unwrap(), evaluate_sentence(&b, phi).unwrap());
                }
            }
        }
    }
    assert!(agreeing >= 10, "{agreeing}");
}

/// `a` with an extra element copying the relations of `v`; the twins are not joined.
fn with_twin(a: &Structure, v: usize) -> Structure {
    let n = a.size();
    let mut b = Structure::new(a.signature().clone(), n + 1).unwrap();
    let image = |e: usize| if e == n { v } else { e };
    for x in 0..=n {
        if a.holds("P", &[image(x)]).unwrap() {
            b.insert("P", &[x]).unwrap();
        }
        for y in 0..=n {
            let (ix, iy) = (image(x), image(y));
            let twins = x != y && ix == iy;
            if !twins && a.holds("E", &[ix, iy]).unwrap() {
                b.insert("E", &[x, y]).unwrap();
            }
        }
    }
    b
}

fn built(a0: &Structure, a1: &Structure, params: &LocalityParams) -> OrderConstruction {
    match build_orders(a0, a1, params).unwrap() {
        Outcome::Built(c) => *c,
        Outcome::Isomorphic { .. } => panic!("expected frequent types"),
    }
}

#[test]
fn strategy_survives_every_spoiler_line_on_matchings() {
    let (a0, a1) = (matching(30), matching(31));
    let c = built(&a0, &a1, &LocalityParams::scaled(1, 1, 3, 2));
    let ctx = StrategyContext::new(&a0, &a1, &c).unwrap();
    let start = ctx.initial_state(GameKind::Fo2);
    assert!(ctx.check_invariants(&start).holds());
    let report = ctx.sweep(GameKind::Fo2, 10_000_000).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    let [o0, o1] = ctx.ordered();
    assert_eq!(fo2_game_winner(o0, o1, 1).unwrap(), Winner::Duplicator);
}

fn two_round_pair() -> (Structure, Structure, OrderConstruction) {
    let a0 = disjoint(&[path(4), copies(&path(2), 14), copies(&cycle(3), 19)]);
    let a1 = shuffled(&disjoint(&[copies(&cycle(3), 21), path(4), copies(&path(2), 15)]), 9);
    let c = built(&a0, &a1, &LocalityParams::scaled(2, 2, 1, 1));
    (a0, a1, c)
}

#[test]
fn strategy_survives_two_rounds_on_disjoint_components() {
    let (a0, a1, c) = two_round_pair();
    assert!(c.report.passed(), "{}", c.report.to_text());
    let ctx = StrategyContext::new(&a0, &a1, &c).unwrap();
    let report = ctx.sweep(GameKind::Fo2, 50_000_000).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    let [o0, o1] = ctx.ordered();
    assert_eq!(fo2_game_winner(o0, o1, 2).unwrap(), Winner::Duplicator);
}

#[test]
fn strategy_cases_on_sample_moves() {
    let (a0, a1, c) = two_round_pair();
    let ctx = StrategyContext::new(&a0, &a1, &c).unwrap();
    let start = ctx.initial_state(GameKind::Fo2);
    // The path of four is rare: moves into it are copied through pi.
    let mv = SpoilerMove {
        side: 0,
        pebble: 0,
        elements: vec![0],
    };
    let resp = ctx.duplicator_move(&start, &mv).unwrap();
    assert_eq!(resp.cases, vec![StrategyCase::Border]);
    assert_eq!(Some(resp.elements[0]), c.segments.pi[0]);
    // A move far to the right of both pebbles is answered by a right pin with the same environment.
    let far = c.order0.sequence()[a0.size() / 2];
    let mv = SpoilerMove {
        side: 0,
        pebble: 0,
        elements: vec![far],
    };
    let resp = ctx.duplicator_move(&start, &mv).unwrap();
    assert_eq!(resp.cases, vec![StrategyCase::FarRight]);
    let env0 = fo2inv::locality::environment(&a0, &c.order0, far, 2).unwrap();
    let env1 = fo2inv::locality::environment(&a1, &c.order1, resp.elements[0], 2).unwrap();
    assert_eq!(fo2inv::canonical_key(&env0), fo2inv::canonical_key(&env1));
    // Illegal moves are rejected.
    let bad = SpoilerMove {
        side: 0,
        pebble: 0,
        elements: vec![1, 2],
    };
    assert!(matches!(ctx.duplicator_move(&start, &bad), Err(GameError::IllegalMove(_))));
    let done = GameState {
        rounds_left: 0,
        ..start
    };
    assert!(matches!(ctx.duplicator_move(&done, &mv), Err(GameError::IllegalMove(_))));
}

#[test]
fn counting_strategy_answers_sets_with_distinct_elements() {
    let a0 = disjoint(&[path(3), copies(&path(2), 26)]);
    let a1 = shuffled(&disjoint(&[copies(&path(2), 28), path(3)]), 3);
    let mut params = LocalityParams::scaled(1, 2, 1, 1);
    params.count_multiplier = 2;
    let c = built(&a0, &a1, &params);
    assert!(c.report.passed(), "{}", c.report.to_text());
    let ctx = StrategyContext::new(&a0, &a1, &c).unwrap();
    let report = ctx.sweep(GameKind::C2 { max_set: 2 }, 50_000_000).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    let [o0, o1] = ctx.ordered();
    assert_eq!(counting_game_winner(o0, o1, 1).unwrap(), Winner::Duplicator);
}

#[test]
fn human_spoiler_against_the_solver() {
    let a = chain(3);
    let b = chain(3);
    let mut input = Cursor::new("0 x 9\nbogus\n0 x 1\n1 y 2\n");
    let mut out: Vec<u8> = Vec::new();
    let t = interactive_play(&a, &b, 2, HumanRole::Spoiler, &mut input, &mut out).unwrap();
    assert_eq!(t.winner, Winner::Duplicator);
    let shown = String::from_utf8(out).unwrap();
    assert!(shown.contains("invalid input"));
    assert_eq!(t.lines.last().unwrap(), "winner duplicator");
    let again = replay(&a, &b, 2, &t.to_text()).unwrap();
    assert_eq!(again, t);
}

#[test]
fn losing_human_duplicator_sees_the_violated_atom() {
    let (a, b) = (chain(2), chain(3));
    let mut input = Cursor::new("0 0 0 0\n1\n1\n1\n");
    let mut out: Vec<u8> = Vec::new();
    let t = interactive_play(&a, &b, 2, HumanRole::Duplicator, &mut input, &mut out).unwrap();
    assert_eq!(t.winner, Winner::Spoiler);
    let violated = t.lines.iter().find(|l| l.contains("violated")).expect("violation line");
    assert!(violated.starts_with("R_"), "{violated}");
    assert!(violated.contains('<') || violated.contains("x=y"), "{violated}");
    assert_eq!(replay(&a, &b, 2, &t.to_text()).unwrap(), t);
}

#[test]
fn replay_detects_edited_transcripts() {
    let (a, b) = (chain(2), chain(3));
    let t = interactive_play(&a, &b, 2, HumanRole::Nobody, &mut Cursor::new(""), &mut Vec::new()).unwrap();
    assert_eq!(t.winner, Winner::Spoiler);
    let edited = t.to_text().replace("winner spoiler", "winner duplicator");
    assert!(matches!(replay(&a, &b, 2, &edited), Err(GameError::ReplayMismatch { .. })));
}
