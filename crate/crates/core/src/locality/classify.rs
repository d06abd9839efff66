//! Frequency classification of neighbourhood types and the associated constants.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use super::Census;
use crate::canon::CanonicalKey;

/// Parameters of the locality construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalityParams {
    /// Neighbourhood radius (number of game rounds).
    pub k: usize,
    /// Degree bound.
    pub d: usize,
    /// Number of scattered pins required per frequent type.
    pub m: BigUint,
    /// Scatter distance.
    pub delta: usize,
    /// Copies of every pin (1 for the two-pebble game, `k` or more for counting games).
    pub count_multiplier: usize,
}

/// Largest possible radius-`k` ball in a graph of maximum degree `d`.
pub fn moore_bound(k: usize, d: usize) -> usize {
    let mut total = 1usize;
    let mut layer = 1usize;
    for i in 0..k {
        layer = if i == 0 { d } else { layer.saturating_mul(d.saturating_sub(1)) };
        total = total.saturating_add(layer);
    }
    total
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

impl LocalityParams {
    /// Theoretical constants: `m = 2(k+1) * M!` with `M` the largest ball size, `delta = 4k`.
    pub fn paper(k: usize, d: usize) -> Self {
        let big_m = moore_bound(k, d);
        LocalityParams {
            k,
            d,
            m: BigUint::from(2 * (k + 1)) * factorial(big_m),
            delta: 4 * k,
            count_multiplier: 1,
        }
    }

    /// Explicit small constants for experiments.
    pub fn scaled(k: usize, d: usize, m: u64, delta: usize) -> Self {
        LocalityParams {
            k,
            d,
            m: BigUint::from(m),
            delta,
            count_multiplier: 1,
        }
    }

    pub fn with_count_multiplier(mut self, c: usize) -> Self {
        self.count_multiplier = c.max(1);
        self
    }

    /// `g_n(m, delta, s) = (s + n*m) * (d^delta + 1)`.
    pub fn g(&self, s: &BigUint, n: usize) -> BigUint {
        (s + BigUint::from(n) * &self.m) * (BigUint::from(self.d).pow(self.delta as u32) + BigUint::one())
    }
}

/// Outcome of the frequency classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub frequent: BTreeSet<CanonicalKey>,
    pub rare: BTreeSet<CanonicalKey>,
    /// `t = g(m, delta, s)` where `s` counts all rare occurrences.
    pub threshold: BigUint,
    pub rare_occurrences: usize,
    /// Number of distinct types in the census (the `n` of `g_n`).
    pub type_count: usize,
}

/// Moves types to the rare side in order of increasing occurrence count
/// while the count stays below `g(m, delta, s)`, `s` being the number of
/// occurrences already classified rare; the remaining types are frequent.
pub fn classify_frequent(census: &Census, params: &LocalityParams) -> Classification {
    let n = census.counts.len();
    let mut order: Vec<(&CanonicalKey, usize)> = census.counts.iter().map(|(k, &c)| (k, c)).collect();
    order.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let mut rare = BTreeSet::new();
    let mut s = 0usize;
    let mut rest = order.len();
    for (i, (key, count)) in order.iter().enumerate() {
        if BigUint::from(*count) < params.g(&BigUint::from(s), n) {
            rare.insert((*key).clone());
            s += count;
        } else {
            rest = i;
            break;
        }
    }
    let frequent = order[rest.min(order.len())..]
        .iter()
        .filter(|(k, _)| !rare.contains(*k))
        .map(|(k, _)| (*k).clone())
        .collect();
    Classification {
        frequent,
        rare,
        threshold: params.g(&BigUint::from(s), n),
        rare_occurrences: s,
        type_count: n,
    }
}

/// Equal counts for every type, except that counts both at least `t` may differ.
pub fn census_equal_up_to(c0: &Census, c1: &Census, t: &BigUint) -> bool {
    let keys: BTreeSet<&CanonicalKey> = c0.counts.keys().chain(c1.counts.keys()).collect();
    keys.into_iter().all(|key| {
        let (a, b) = (c0.count(key), c1.count(key));
        a == b || (BigUint::from(a) >= *t && BigUint::from(b) >= *t)
    })
}

/// Exact values of the theoretical constants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoryConstants {
    pub k: usize,
    pub d: usize,
    pub type_count: usize,
    /// Largest ball size `M`.
    pub max_ball: usize,
    pub m: BigUint,
    pub delta: usize,
    /// `h_1, ..., h_{N+1}` with `h_1 = 0` and `h_{i+1} = h_i + g(h_i)`.
    pub h: Vec<BigUint>,
    /// `g(m, delta, h_i)` for each entry of `h`.
    pub g_values: Vec<BigUint>,
    /// `g(m, delta, h_{N+1}) + 1`: censuses agreeing up to this bound yield indistinguishable ordered structures.
    pub threshold: BigUint,
}

/// Computes `M`, `m`, `delta`, the `g` values, the `h` recurrence and the
/// threshold for radius `k`, degree `d` and `type_count` neighbourhood types.
/// `max_ball` overrides the Moore bound when a smaller ball bound is known.
pub fn theory_constants(k: usize, d: usize, type_count: usize, max_ball: Option<usize>) -> TheoryConstants {
    let big_m = max_ball.unwrap_or_else(|| moore_bound(k, d));
    let params = LocalityParams {
        k,
        d,
        m: BigUint::from(2 * (k + 1)) * factorial(big_m),
        delta: 4 * k,
        count_multiplier: 1,
    };
    let mut h = vec![BigUint::zero()];
    let mut g_values = Vec::new();
    for _ in 0..type_count {
        let last = h.last().expect("non-empty").clone();
        let g = params.g(&last, type_count);
        h.push(&last + &g);
        g_values.push(g);
    }
    let last = h.last().expect("non-empty").clone();
    let g_last = params.g(&last, type_count);
    g_values.push(g_last.clone());
    TheoryConstants {
        k,
        d,
        type_count,
        max_ball: big_m,
        m: params.m,
        delta: params.delta,
        h,
        g_values,
        threshold: g_last + BigUint::one(),
    }
}
