//! Dendroids: complete binary trees over `T` (child), `D` (proper
//! descendant) and `S` (sibling), with the two-variable sentence that, under
//! any linear order, holds exactly on dendroids of even depth.
//!
//! Elements are binary words numbered by length-lexicographic rank, so the
//! children of `v` are `2v + 1` (word `w0`) and `2v + 2` (word `w1`). Left and
//! right children are always relative to a linear order, never to this numbering.

use std::fmt::{self, Write as _};
use std::ops::RangeInclusive;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eval::{EvalError, Evaluator};
use crate::formula::Formula;
use crate::games::{fo_game_winner_capped, GameError, Winner, DEFAULT_GAME_CAP};
use crate::parser::{parse_formula, Fragment};
use crate::solver::{check_invariance, InvarianceVerdict, SolverError};
use crate::structure::{Element, LinearOrder, Signature, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DendroidError {
    #[error("dendroid depth must be at least 1")]
    DepthZero,
    #[error("depth {0} is too large to build")]
    TooDeep(usize),
    #[error("order has {found} elements, dendroid has {expected}")]
    OrderSize { found: usize, expected: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Largest depth [`make_dendroid`] builds.
pub const MAX_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dendroid {
    pub depth: usize,
    pub structure: Structure,
}

pub fn dendroid_signature() -> Signature {
    Signature::new()
        .with_relation("D", 2)
        .with_relation("S", 2)
        .with_relation("T", 2)
}

pub fn make_dendroid(n: usize) -> Result<Dendroid, DendroidError> {
    if n == 0 {
        return Err(DendroidError::DepthZero);
    }
    if n > MAX_DEPTH {
        return Err(DendroidError::TooDeep(n));
    }
    let size = (1usize << (n + 1)) - 1;
    let mut s = Structure::new(dendroid_signature(), size).expect("valid signature");
    let internal = (1usize << n) - 1;
    for v in 0..internal {
        let (c0, c1) = (2 * v + 1, 2 * v + 2);
        s.insert("T", &[v, c0]).expect("in range");
        s.insert("T", &[v, c1]).expect("in range");
        s.insert("S", &[c0, c1]).expect("in range");
        s.insert("S", &[c1, c0]).expect("in range");
    }
    for w in 1..size {
        let mut a = (w - 1) / 2;
        loop {
            s.insert("D", &[a, w]).expect("in range");
            if a == 0 {
                break;
            }
            a = (a - 1) / 2;
        }
    }
    Ok(Dendroid {
        depth: n,
        structure: s,
    })
}

impl Dendroid {
    pub fn size(&self) -> usize {
        self.structure.size()
    }

    /// Binary word of element `e` (`""` for the root).
    pub fn word(e: Element) -> String {
        let level = Self::level(e);
        let offset = e + 1 - (1 << level);
        (0..level)
            .rev()
            .map(|i| if offset >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Element of a binary word.
    pub fn element(word: &str) -> Option<Element> {
        word.chars().try_fold(0usize, |v, c| match c {
            '0' => Some(2 * v + 1),
            '1' => Some(2 * v + 2),
            _ => None,
        })
    }

    pub fn level(e: Element) -> usize {
        (usize::BITS - 1 - (e + 1).leading_zeros()) as usize
    }

    pub fn parent(e: Element) -> Option<Element> {
        (e > 0).then(|| (e - 1) / 2)
    }

    pub fn children(&self, e: Element) -> Option<[Element; 2]> {
        (Self::level(e) < self.depth).then(|| [2 * e + 1, 2 * e + 2])
    }

    /// Words in dictionary order (a word precedes its extensions).
    pub fn lex_order(&self) -> LinearOrder {
        let mut seq: Vec<Element> = (0..self.size()).collect();
        seq.sort_by_key(|&e| Self::word(e));
        LinearOrder::from_sequence(seq).expect("permutation")
    }

    /// The structure with `order` installed as `<`.
    pub fn ordered(&self, order: &LinearOrder) -> Result<Structure, DendroidError> {
        if order.len() != self.size() {
            return Err(DendroidError::OrderSize {
                found: order.len(),
                expected: self.size(),
            });
        }
        Ok(self
            .structure
            .clone()
            .with_order("<", order.clone())
            .expect("sizes match"))
    }
}

/// Depth of `s` if it is isomorphic to a dendroid.
pub fn dendroid_depth(s: &Structure) -> Option<usize> {
    let sig = s.signature();
    if sig.relations().len() != 3 || ["D", "S", "T"].iter().any(|r| sig.arity(r) != Some(2)) {
        return None;
    }
    let n = s.size();
    if n < 3 || !(n + 1).is_power_of_two() {
        return None;
    }
    let depth = (n + 1).trailing_zeros() as usize - 1;
    let t = sig.relation_index("T")?;
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    for tuple in s.tuples(t) {
        let (a, b) = (tuple[0], tuple[1]);
        if parent[b].replace(a).is_some() {
            return None;
        }
        children[a].push(b);
    }
    let roots: Vec<Element> = (0..n).filter(|&e| parent[e].is_none()).collect();
    let [root] = roots[..] else {
        return None;
    };
    // Relabel breadth first, first child first, and compare with the generated dendroid.
    let mut image = vec![usize::MAX; n];
    image[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(a) = queue.pop_front() {
        match children[a][..] {
            [] => {}
            [c0, c1] => {
                for (i, c) in [c0, c1].into_iter().enumerate() {
                    let target = 2 * image[a] + 1 + i;
                    if target >= n {
                        return None;
                    }
                    image[c] = target;
                    queue.push_back(c);
                }
            }
            _ => return None,
        }
    }
    if image.contains(&usize::MAX) {
        return None;
    }
    let relabelled = s.relabel(&image).ok()?;
    let expected = make_dendroid(depth).ok()?.structure;
    (relabelled.without_orders() == expected).then_some(depth)
}

fn root(v: &str, w: &str) -> String {
    format!("!(exists {w}. T({w},{v}))")
}

fn leaf(v: &str, w: &str) -> String {
    format!("!(exists {w}. T({v},{w}))")
}

fn second(v: &str, w: &str) -> String {
    format!("(exists {w}. T({w},{v}) & {})", root(w, v))
}

fn left_sibling(v: &str, w: &str) -> String {
    format!("(exists {w}. S({v},{w}) & {v} < {w})")
}

fn right_sibling(v: &str, w: &str) -> String {
    format!("(exists {w}. S({v},{w}) & {w} < {v})")
}

/// Text of the even zig-zag sentence.
///
/// The chain conditions range over the ancestors of the chosen leaf and the
/// leaf itself (`D(y,x) | y = x`): with proper ancestors only, the leaf's own
/// parent is never constrained and depth 1 would satisfy the sentence.
pub fn phi_even_zigzag_text() -> String {
    let on_path = "(D(y,x) | y = x)";
    let inner = format!("!{} & !{} & {on_path}", root("y", "x"), second("y", "x"));
    format!(
        "exists x. ({} & {}) \
         & (forall y. ({} & {on_path}) -> {}) \
         & (forall y. ({inner} & {}) -> (exists x. T(x,y) & {})) \
         & (forall y. ({inner} & {}) -> (exists x. T(x,y) & {}))",
        leaf("x", "y"),
        left_sibling("x", "y"),
        second("y", "x"),
        right_sibling("y", "x"),
        right_sibling("y", "x"),
        left_sibling("x", "y"),
        left_sibling("y", "x"),
        right_sibling("x", "y"),
    )
}

pub fn phi_even_zigzag() -> Formula {
    parse_formula(&phi_even_zigzag_text(), Fragment::Fo2, None).expect("well-formed sentence")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Root-to-leaf path taking the right child at odd steps and the left child at even steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigZag {
    pub path: Vec<Element>,
    pub parity: Parity,
}

pub fn find_zigzag(d: &Dendroid, order: &LinearOrder) -> Result<ZigZag, DendroidError> {
    if order.len() != d.size() {
        return Err(DendroidError::OrderSize {
            found: order.len(),
            expected: d.size(),
        });
    }
    let mut path = vec![0];
    let mut last_left = false;
    let mut v = 0;
    while let Some([c0, c1]) = d.children(v) {
        let (left, right) = if order.less(c0, c1) { (c0, c1) } else { (c1, c0) };
        let step = path.len();
        last_left = step % 2 == 0;
        v = if last_left { left } else { right };
        path.push(v);
    }
    Ok(ZigZag {
        path,
        parity: if last_left { Parity::Even } else { Parity::Odd },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentRow {
    pub depth: usize,
    pub order_id: String,
    pub truth: bool,
    pub parity: Parity,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    /// A structure (not a dendroid) on which the sentence depends on the order.
    pub witness: Option<InvarianceVerdict>,
}

impl ExperimentReport {
    /// Truth equals even depth and the zig-zag parity matches, in every row.
    pub fn consistent(&self) -> bool {
        self.rows.iter().all(|r| {
            let even = r.depth % 2 == 0;
            r.truth == even && (r.parity == Parity::Even) == even
        })
    }

    /// `depth order truth parity` rows with a header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("depth\torder\ttruth\tparity\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.depth, r.order_id, r.truth, r.parity);
        }
        out
    }
}

/// Orders used for one depth: all orders up to `exhaustive_size` elements,
/// otherwise dictionary order, its reverse and `samples` seeded random orders.
pub fn experiment_orders(
    d: &Dendroid,
    samples: usize,
    seed: u64,
    exhaustive_size: usize,
) -> Vec<(String, LinearOrder)> {
    let n = d.size();
    if n <= exhaustive_size {
        return (0..n)
            .permutations(n)
            .enumerate()
            .map(|(i, p)| (format!("perm{i}"), LinearOrder::from_sequence(p).expect("permutation")))
            .collect();
    }
    let lex = d.lex_order();
    let mut out = vec![("lex".to_string(), lex.clone()), ("revlex".to_string(), lex.reversed())];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (d.depth as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for i in 0..samples {
        let mut seq: Vec<Element> = (0..n).collect();
        seq.shuffle(&mut rng);
        out.push((format!("random{i}"), LinearOrder::from_sequence(seq).expect("permutation")));
    }
    out
}

/// Evaluates the even zig-zag sentence on every depth under many orders and,
/// when `witness_size > 0`, searches all structures up to that size for one
/// on which the sentence is not order-invariant.
pub fn class_invariance_experiment(
    depths: RangeInclusive<usize>,
    orders_per_depth: usize,
    seed: u64,
    witness_size: usize,
) -> Result<ExperimentReport, DendroidError> {
    let phi = phi_even_zigzag();
    let mut ev = Evaluator::new(&phi);
    let mut rows = Vec::new();
    for depth in depths {
        let d = make_dendroid(depth)?;
        for (order_id, order) in experiment_orders(&d, orders_per_depth, seed, 3) {
            let truth = ev.eval(&d.structure, &[("<", &order)], &[])?;
            let parity = find_zigzag(&d, &order)?.parity;
            rows.push(ExperimentRow {
                depth,
                order_id,
                truth,
                parity,
            });
        }
    }
    let witness = if witness_size > 0 {
        Some(check_invariance(&phi, witness_size)?)
    } else {
        None
    };
    Ok(ExperimentReport { rows, witness })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityRow {
    pub depths: (usize, usize),
    pub rounds: usize,
    /// `None` when the game search exceeded its cap.
    pub winner: Option<Winner>,
    /// The winner the row asserts; `None` for recorded-only rows.
    pub expected: Option<Winner>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityReport {
    pub rows: Vec<SimilarityRow>,
}

impl SimilarityReport {
    /// Every asserted row that was solved has the expected winner.
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.expected.is_none() || r.winner.is_none() || r.winner == r.expected)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("depth_a\tdepth_b\trounds\twinner\texpected\n");
        for r in &self.rows {
            let winner = r.winner.map_or("cap-exceeded".to_string(), |w| w.to_string());
            let expected = r.expected.map_or("-".to_string(), |w| w.to_string());
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{winner}\t{expected}",
                r.depths.0, r.depths.1, r.rounds
            );
        }
        out
    }
}

fn similarity_row(a: usize, b: usize, q: usize, expected: Option<Winner>, cap: u64) -> Result<SimilarityRow, DendroidError> {
    let da = make_dendroid(a)?;
    let db = make_dendroid(b)?;
    let winner = match fo_game_winner_capped(&da.structure, &db.structure, q, cap) {
        Ok(w) => Some(w),
        Err(GameError::CapExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(SimilarityRow {
        depths: (a, b),
        rounds: q,
        winner,
        expected,
    })
}

/// The `q`-round game on dendroids of depths `2^(q+1)` and `2^(q+1) + 1`
/// (duplicator expected), the control of depths 1 and 2 at two rounds
/// (spoiler expected), and for `q = 1` the recorded pair of depths 1 and 4.
pub fn deep_dendroid_similarity(q: usize, cap: Option<u64>) -> Result<SimilarityReport, DendroidError> {
    let cap = cap.unwrap_or(DEFAULT_GAME_CAP);
    let deep = 1usize
        .checked_shl(q as u32 + 1)
        .filter(|&d| d < MAX_DEPTH)
        .ok_or(DendroidError::TooDeep(usize::MAX))?;
    let mut rows = vec![similarity_row(deep, deep + 1, q, Some(Winner::Duplicator), cap)?];
    rows.push(similarity_row(1, 2, 2, Some(Winner::Spoiler), cap)?);
    if q == 1 {
        rows.push(similarity_row(1, 4, 1, None, cap)?);
    }
    Ok(SimilarityReport { rows })
}
