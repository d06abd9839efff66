//! The classical `q`-round Ehrenfeucht-Fraisse game, solved by backward
//! induction over sets of chosen pairs.

use std::collections::HashMap;

use itertools::Itertools;

use super::{GameError, Winner};
use crate::structure::{Element, Structure};

/// Default bound on candidate pairs examined.
pub const DEFAULT_GAME_CAP: u64 = 20_000_000;

/// Winner of the `q`-round game on `a` and `b` (named orders are compared as relations).
pub fn fo_game_winner(a: &Structure, b: &Structure, q: usize) -> Result<Winner, GameError> {
    fo_game_winner_capped(a, b, q, DEFAULT_GAME_CAP)
}

pub fn fo_game_winner_capped(a: &Structure, b: &Structure, q: usize, cap: u64) -> Result<Winner, GameError> {
    if a.signature() != b.signature() || !a.orders().keys().eq(b.orders().keys()) {
        return Err(GameError::SignatureMismatch);
    }
    let mut solver = Solver {
        s: [a, b],
        memo: HashMap::new(),
        steps: 0,
        cap,
    };
    let mut pairs: Vec<(Element, Element)> = Vec::new();
    for (&ca, &cb) in a.constant_values().iter().zip(b.constant_values()) {
        if !solver.consistent(&pairs, ca, cb) {
            return Ok(Winner::Spoiler);
        }
        pairs.push((ca, cb));
    }
    Ok(if solver.duplicator_wins(&mut pairs, q)? {
        Winner::Duplicator
    } else {
        Winner::Spoiler
    })
}

struct Solver<'a> {
    s: [&'a Structure; 2],
    memo: HashMap<(Vec<(Element, Element)>, usize), bool>,
    steps: u64,
    cap: u64,
}

impl Solver<'_> {
    /// Whether adding `(x, y)` to `pairs` keeps a partial isomorphism.
    fn consistent(&self, pairs: &[(Element, Element)], x: Element, y: Element) -> bool {
        let [a, b] = self.s;
        for &(p, q) in pairs {
            if (p == x) != (q == y) {
                return false;
            }
        }
        for (name, oa) in a.orders() {
            let ob = b.order(name).expect("same order symbols");
            for &(p, q) in pairs {
                if oa.less(x, p) != ob.less(y, q) || oa.less(p, x) != ob.less(q, y) {
                    return false;
                }
            }
        }
        let mut xs: Vec<Element> = pairs.iter().map(|p| p.0).collect();
        let mut ys: Vec<Element> = pairs.iter().map(|p| p.1).collect();
        xs.push(x);
        ys.push(y);
        let last = xs.len() - 1;
        for (rel, sym) in a.signature().relations().iter().enumerate() {
            for idx in (0..sym.arity).map(|_| 0..xs.len()).multi_cartesian_product() {
                if !idx.contains(&last) {
                    continue;
                }
                let ta: Vec<Element> = idx.iter().map(|&i| xs[i]).collect();
                let tb: Vec<Element> = idx.iter().map(|&i| ys[i]).collect();
                if a.contains(rel, &ta) != b.contains(rel, &tb) {
                    return false;
                }
            }
        }
        true
    }

    fn duplicator_wins(&mut self, pairs: &mut Vec<(Element, Element)>, rounds: usize) -> Result<bool, GameError> {
        if rounds == 0 {
            return Ok(true);
        }
        let mut key = pairs.clone();
        key.sort_unstable();
        key.dedup();
        if let Some(&v) = self.memo.get(&(key.clone(), rounds)) {
            return Ok(v);
        }
        let sizes = [self.s[0].size(), self.s[1].size()];
        let mut result = true;
        'moves: for side in 0..2 {
            for e in 0..sizes[side] {
                let taken = pairs.iter().any(|p| if side == 0 { p.0 == e } else { p.1 == e });
                if taken {
                    continue;
                }
                let mut answered = false;
                for f in 0..sizes[1 - side] {
                    let (x, y) = if side == 0 { (e, f) } else { (f, e) };
                    self.steps += 1;
                    if self.steps > self.cap {
                        return Err(GameError::CapExceeded {
                            needed: self.steps,
                            cap: self.cap,
                        });
                    }
                    if !self.consistent(pairs, x, y) {
                        continue;
                    }
                    pairs.push((x, y));
                    let ok = self.duplicator_wins(pairs, rounds - 1)?;
                    pairs.pop();
                    if ok {
                        answered = true;
                        break;
                    }
                }
                if !answered {
                    result = false;
                    break 'moves;
                }
            }
        }
        self.memo.insert((key, rounds), result);
        Ok(result)
    }
}
