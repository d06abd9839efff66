//! Two-pebble games solved by joint colour refinement of pebble positions.
//!
//! `pair[r][i][a * n + b]` is the colour of the position with `x` on `a` and
//! `y` on `b` in structure `i` when `r` rounds remain; two positions get the
//! same colour exactly when the duplicator survives `r` more rounds from them.
//! A round refines a colour by the (truncated) multisets of colours reachable
//! by moving `x` and by moving `y`. In the counting game the spoiler may pick
//! sets of up to `cap` elements, and the duplicator can answer every such set
//! exactly when the multisets agree after truncating each count at `cap`;
//! `cap = 1` gives the plain game. Colours are interned per round in one
//! table shared by both structures, so equal ids mean equal positions.
//!
//! The game starts with the duplicator placing all four pebbles, so the
//! duplicator wins `k` rounds when some pair of each structure shares its
//! round-`k` colour. Single colours describe positions with only `x` placed
//! and decide the variant in which the pebbles start off the board.

use std::collections::HashMap;

use super::{GameError, Winner};
use crate::structure::{Element, OrderAtom, Structure};

/// Largest total number of pebble positions (`n0^2 + n1^2`) solved.
pub const DEFAULT_PAIR_CAP: u64 = 4_000_000;

/// Winner of the `k`-round two-pebble game (the duplicator places the pebbles first).
pub fn fo2_game_winner(a0: &Structure, a1: &Structure, k: usize) -> Result<Winner, GameError> {
    Ok(PebbleGame::new(a0, a1, k, 1)?.winner())
}

/// Winner of the `k`-round two-pebble counting game with sets of up to `k` elements.
pub fn counting_game_winner(a0: &Structure, a1: &Structure, k: usize) -> Result<Winner, GameError> {
    Ok(PebbleGame::new(a0, a1, k, k.max(1))?.winner())
}

#[derive(Default)]
struct Interner(HashMap<Vec<u32>, u32>);

impl Interner {
    fn id(&mut self, key: Vec<u32>) -> u32 {
        let next = self.0.len() as u32;
        *self.0.entry(key).or_insert(next)
    }
}

const TAG_ROW: u32 = 0;
const TAG_COL: u32 = 1;
const TAG_PAIR: u32 = 2;
const TAG_SINGLE: u32 = 3;
const TAG_GLOBAL: u32 = 4;

/// `tag` followed by `(colour, min(count, cap))` pairs in colour order.
fn truncated(tag: u32, colours: impl Iterator<Item = u32>, cap: usize) -> Vec<u32> {
    let mut v: Vec<u32> = colours.collect();
    v.sort_unstable();
    let mut out = vec![tag];
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        out.push(v[i]);
        out.push((j - i).min(cap) as u32);
        i = j;
    }
    out
}

/// Solved pebble game on two structures.
#[derive(Debug, Clone)]
pub struct PebbleGame {
    sizes: [usize; 2],
    rounds: usize,
    cap: usize,
    pair: Vec<[Vec<u32>; 2]>,
    single: Vec<[Vec<u32>; 2]>,
}

impl PebbleGame {
    /// Solves the game with up to `rounds` rounds and spoiler sets of up to `cap` elements.
    pub fn new(a0: &Structure, a1: &Structure, rounds: usize, cap: usize) -> Result<Self, GameError> {
        Self::with_limit(a0, a1, rounds, cap, DEFAULT_PAIR_CAP)
    }

    pub fn with_limit(a0: &Structure, a1: &Structure, rounds: usize, cap: usize, limit: u64) -> Result<Self, GameError> {
        if a0.signature() != a1.signature() || !a0.orders().keys().eq(a1.orders().keys()) {
            return Err(GameError::SignatureMismatch);
        }
        if !a0.signature().constants().is_empty() {
            return Err(GameError::Constants);
        }
        let s = [a0, a1];
        let sizes = [a0.size(), a1.size()];
        let positions = (sizes[0] * sizes[0] + sizes[1] * sizes[1]) as u64;
        if positions > limit {
            return Err(GameError::CapExceeded {
                needed: positions,
                cap: limit,
            });
        }
        let cap = cap.max(1);

        let mut atomic: HashMap<(Vec<bool>, Vec<OrderAtom>), u32> = HashMap::new();
        let mut c0: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            let n = sizes[i];
            let mut v = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    let (_, _, t) = s[i].atomic_types(a, b)?;
                    let key = (t.vocab, t.orders.into_iter().map(|(_, o)| o).collect());
                    let next = atomic.len() as u32;
                    v.push(*atomic.entry(key).or_insert(next));
                }
            }
            c0[i] = v;
        }
        let mut interner = Interner::default();
        let s0: [Vec<u32>; 2] = [0, 1].map(|i| {
            let n = sizes[i];
            (0..n).map(|a| interner.id(vec![TAG_SINGLE, c0[i][a * n + a]])).collect()
        });
        let mut pair = vec![c0];
        let mut single = vec![s0];
        for _ in 1..=rounds {
            let prev = pair.last().expect("round zero");
            let prev_single = single.last().expect("round zero");
            let mut interner = Interner::default();
            let mut next_pair: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
            let mut next_single: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
            for i in 0..2 {
                let n = sizes[i];
                let c = &prev[i];
                let rows: Vec<u32> = (0..n)
                    .map(|a| interner.id(truncated(TAG_ROW, (0..n).map(|b| c[a * n + b]), cap)))
                    .collect();
                let cols: Vec<u32> = (0..n)
                    .map(|b| interner.id(truncated(TAG_COL, (0..n).map(|a| c[a * n + b]), cap)))
                    .collect();
                let mut v = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        v.push(interner.id(vec![TAG_PAIR, c[a * n + b], rows[a], cols[b]]));
                    }
                }
                next_pair[i] = v;
                let global = interner.id(truncated(TAG_GLOBAL, prev_single[i].iter().copied(), cap));
                next_single[i] = (0..n)
                    .map(|a| interner.id(vec![TAG_SINGLE, prev_single[i][a], global, rows[a]]))
                    .collect();
            }
            pair.push(next_pair);
            single.push(next_single);
        }
        Ok(PebbleGame {
            sizes,
            rounds,
            cap,
            pair,
            single,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn sizes(&self) -> [usize; 2] {
        self.sizes
    }

    /// Colour of `x` on `a`, `y` on `b` in structure `side` with `r` rounds left.
    pub fn pair_colour(&self, r: usize, side: usize, a: Element, b: Element) -> u32 {
        self.pair[r][side][a * self.sizes[side] + b]
    }

    /// Winner of the game in which the duplicator first places all four
    /// pebbles and the spoiler then has `rounds` moves.
    pub fn winner(&self) -> Winner {
        if self.initial_placement(self.rounds).is_some() {
            Winner::Duplicator
        } else {
            Winner::Spoiler
        }
    }

    /// Winner of the game in which both pebbles start off the board.
    pub fn standard_winner(&self) -> Winner {
        if self.rounds == 0 {
            return Winner::Duplicator;
        }
        let r = self.rounds - 1;
        let [m0, m1] = [0, 1].map(|i| {
            let mut m = truncated(TAG_GLOBAL, self.single[r][i].iter().copied(), self.cap);
            m.remove(0);
            m
        });
        if m0 == m1 {
            Winner::Duplicator
        } else {
            Winner::Spoiler
        }
    }

    /// Winner from a position with all four pebbles placed and `r` rounds left.
    pub fn placed_winner(&self, pebbles: [[Element; 2]; 2], r: usize) -> Winner {
        let c0 = self.pair_colour(r, 0, pebbles[0][0], pebbles[0][1]);
        let c1 = self.pair_colour(r, 1, pebbles[1][0], pebbles[1][1]);
        if c0 == c1 {
            Winner::Duplicator
        } else {
            Winner::Spoiler
        }
    }

    /// A winning duplicator answer after the spoiler moves `pebble` to
    /// `element` in structure `side`, with `r` rounds left before the move.
    pub fn duplicator_reply(
        &self,
        pebbles: [[Element; 2]; 2],
        r: usize,
        side: usize,
        pebble: usize,
        element: Element,
    ) -> Option<Element> {
        let r = r.checked_sub(1)?;
        let mut moved = pebbles[side];
        moved[pebble] = element;
        let target = self.pair_colour(r, side, moved[0], moved[1]);
        let other = 1 - side;
        (0..self.sizes[other]).find(|&f| {
            let mut q = pebbles[other];
            q[pebble] = f;
            self.pair_colour(r, other, q[0], q[1]) == target
        })
    }

    /// A spoiler move `(side, pebble, element)` that the duplicator cannot answer.
    pub fn spoiler_move(&self, pebbles: [[Element; 2]; 2], r: usize) -> Option<(usize, usize, Element)> {
        if r == 0 {
            return None;
        }
        for side in 0..2 {
            for pebble in 0..2 {
                for e in 0..self.sizes[side] {
                    if self.duplicator_reply(pebbles, r, side, pebble, e).is_none() {
                        return Some((side, pebble, e));
                    }
                }
            }
        }
        None
    }

    /// A placement of all four pebbles from which the duplicator survives `r` rounds.
    pub fn initial_placement(&self, r: usize) -> Option<[[Element; 2]; 2]> {
        let n1 = self.sizes[1];
        let mut first: HashMap<u32, (Element, Element)> = HashMap::new();
        for a in 0..n1 {
            for b in 0..n1 {
                first.entry(self.pair_colour(r, 1, a, b)).or_insert((a, b));
            }
        }
        let n0 = self.sizes[0];
        for a in 0..n0 {
            for b in 0..n0 {
                if let Some(&(c, d)) = first.get(&self.pair_colour(r, 0, a, b)) {
                    return Some([[a, b], [c, d]]);
                }
            }
        }
        None
    }
}
