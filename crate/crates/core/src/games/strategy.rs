//! The explicit duplicator strategy on a pair of structures ordered by
//! [`build_orders`](crate::locality::build_orders), and the invariants it maintains.
//!
//! With `r` rounds left after the spoiler's move, the duplicator answers by
//! the first matching case:
//! I. the move lands in `Sigma^r`: copy it through `pi`;
//! II. it lands on or next to the other pebble: map it through the
//!    isomorphism of the `(r+1)`-environments of the other pebbles;
//! III. it lies left of the other pebble, which is outside `L_{r+1}`: answer
//!    with the `L_{r+1}` pin realising its `k`-environment;
//! IV. it lies left of the other pebble, which is in `L_{r+1}`: copy it through `pi`;
//! V and VI mirror III and IV on the right.
//!
//! The invariants, with `r` rounds left: (S) a pebble in `Sigma^r` has its
//! partner on the `pi`-image; (E) partner pebbles have equal
//! `r`-environments; (R) the pebbled pairs have equal full atomic 2-types.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::fmt;

use itertools::Itertools;

use super::{GameError, PEBBLES};
use crate::canon::{canonical_key, pointed_isomorphism, CanonicalKey};
use crate::locality::{environment_in, OrderConstruction, PinSide, SegmentMap};
use crate::structure::{Element, GaifmanGraph, LinearOrder, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameKind {
    Fo2,
    /// Counting game; the spoiler picks sets of up to `max_set` elements.
    C2 { max_set: usize },
}

impl GameKind {
    pub fn max_set(self) -> usize {
        match self {
            GameKind::Fo2 => 1,
            GameKind::C2 { max_set } => max_set.max(1),
        }
    }
}

/// Positions of the pebbles: `pebbles[i][0]` is `x` and `pebbles[i][1]` is `y` in structure `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    pub pebbles: [[Element; 2]; 2],
    pub rounds_left: usize,
    pub kind: GameKind,
}

/// The spoiler moves `pebble` (0 for `x`, 1 for `y`) in structure `side` to
/// one of `elements` (a single element in the plain game).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpoilerMove {
    pub side: usize,
    pub pebble: usize,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyCase {
    Border,
    Neighbour,
    FarLeft,
    Left,
    FarRight,
    Right,
}

impl fmt::Display for StrategyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyCase::Border => "I",
            StrategyCase::Neighbour => "II",
            StrategyCase::FarLeft => "III",
            StrategyCase::Left => "IV",
            StrategyCase::FarRight => "V",
            StrategyCase::Right => "VI",
        })
    }
}

/// `elements[t]` in the other structure answers the spoiler's `t`-th element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub elements: Vec<Element>,
    pub cases: Vec<StrategyCase>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantReport {
    pub rounds_left: usize,
    pub s: bool,
    pub e: bool,
    pub r: bool,
    pub failures: Vec<String>,
}

impl InvariantReport {
    pub fn holds(&self) -> bool {
        self.s && self.e && self.r
    }
}

/// Outcome of playing every spoiler move against the strategy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub states: usize,
    pub moves: usize,
    pub failure_count: usize,
    /// The first few failures.
    pub failures: Vec<String>,
}

impl SweepReport {
    /// The invariants held after every response, so the duplicator survived every line of play.
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

const KEPT_FAILURES: usize = 20;

/// The ordered pair and the construction data the strategy reads.
pub struct StrategyContext {
    k: usize,
    plain: [Structure; 2],
    graphs: [GaifmanGraph; 2],
    orders: [LinearOrder; 2],
    ordered: [Structure; 2],
    segments: SegmentMap,
    pins: HashMap<(PinSide, usize, CanonicalKey), Vec<Element>>,
    env_cache: RefCell<HashMap<(usize, Element, usize), CanonicalKey>>,
}

impl StrategyContext {
    pub fn new(a0: &Structure, a1: &Structure, construction: &OrderConstruction) -> Result<Self, GameError> {
        let plain = [a0.without_orders(), a1.without_orders()];
        let seg = &construction.segments;
        if seg.labels[0].len() != a0.size() || seg.labels[1].len() != a1.size() {
            return Err(GameError::Precondition(
                "construction does not match the structures".into(),
            ));
        }
        let orders = [construction.order0.clone(), construction.order1.clone()];
        let ordered = [
            plain[0].clone().with_order("<", orders[0].clone())?,
            plain[1].clone().with_order("<", orders[1].clone())?,
        ];
        let mut pins: HashMap<(PinSide, usize, CanonicalKey), Vec<Element>> = HashMap::new();
        for p in &seg.pins {
            pins.entry((p.side, p.layer, p.environment.clone()))
                .or_default()
                .push(p.element);
        }
        Ok(StrategyContext {
            k: construction.k,
            graphs: [plain[0].gaifman(), plain[1].gaifman()],
            plain,
            orders,
            ordered,
            segments: seg.clone(),
            pins,
            env_cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The two structures with their constructed orders installed as `<`.
    pub fn ordered(&self) -> [&Structure; 2] {
        [&self.ordered[0], &self.ordered[1]]
    }

    /// Both pebbles on the order-minimal element of each structure, `k` rounds left.
    pub fn initial_state(&self, kind: GameKind) -> GameState {
        let m0 = self.orders[0].first().expect("nonempty structure");
        let m1 = self.orders[1].first().expect("nonempty structure");
        GameState {
            pebbles: [[m0, m0], [m1, m1]],
            rounds_left: self.k,
            kind,
        }
    }

    fn env_key(&self, side: usize, e: Element, radius: usize) -> CanonicalKey {
        if let Some(key) = self.env_cache.borrow().get(&(side, e, radius)) {
            return key.clone();
        }
        let key = canonical_key(&environment_in(
            &self.plain[side],
            &self.graphs[side],
            &self.orders[side],
            e,
            radius,
        ));
        self.env_cache.borrow_mut().insert((side, e, radius), key.clone());
        key
    }

    pub fn check_invariants(&self, state: &GameState) -> InvariantReport {
        let r = state.rounds_left;
        let p = state.pebbles;
        let mut report = InvariantReport {
            rounds_left: r,
            s: true,
            e: true,
            r: true,
            failures: Vec::new(),
        };
        for side in 0..2 {
            for pebble in 0..2 {
                let e = p[side][pebble];
                if self.segments.in_sigma(side, e, r) {
                    let image = self.segments.transfer(side, e);
                    if image != Some(p[1 - side][pebble]) {
                        report.s = false;
                        report.failures.push(format!(
                            "S_{r}: pebble {} on {e} in structure {side} lies in Sigma^{r} but its partner is on {}, not {:?}",
                            PEBBLES[pebble],
                            p[1 - side][pebble],
                            image
                        ));
                    }
                }
            }
        }
        for pebble in 0..2 {
            if self.env_key(0, p[0][pebble], r) != self.env_key(1, p[1][pebble], r) {
                report.e = false;
                report.failures.push(format!(
                    "E_{r}: pebble {} on {} and {} have different {r}-environments",
                    PEBBLES[pebble], p[0][pebble], p[1][pebble]
                ));
            }
        }
        let t0 = self.ordered[0].atomic_types(p[0][0], p[0][1]);
        let t1 = self.ordered[1].atomic_types(p[1][0], p[1][1]);
        if t0.map(|t| t.2).ok() != t1.map(|t| t.2).ok() {
            report.r = false;
            report.failures.push(format!(
                "R_{r}: pairs ({}, {}) and ({}, {}) have different 2-types",
                p[0][0], p[0][1], p[1][0], p[1][1]
            ));
        }
        report
    }

    pub fn duplicator_move(&self, state: &GameState, mv: &SpoilerMove) -> Result<Response, GameError> {
        self.validate(state, mv)?;
        let pre = self.check_invariants(state);
        if !pre.holds() {
            return Err(GameError::Precondition(pre.failures.join("; ")));
        }
        let r = state.rounds_left - 1;
        let i = mv.side;
        let j = 1 - i;
        let other = state.pebbles[i][1 - mv.pebble];
        let other_partner = state.pebbles[j][1 - mv.pebble];
        let seg = &self.segments;
        let mut psi: Option<(Vec<Element>, Vec<Element>, Vec<Element>)> = None;
        let mut used: HashMap<(PinSide, CanonicalKey), usize> = HashMap::new();
        let mut elements = Vec::with_capacity(mv.elements.len());
        let mut cases = Vec::with_capacity(mv.elements.len());
        for &a in &mv.elements {
            let left_of = self.orders[i].less(a, other);
            let (case, response) = if seg.in_sigma(i, a, r) {
                (StrategyCase::Border, self.transfer(i, a)?)
            } else if a == other || self.graphs[i].adjacent(a, other) {
                if psi.is_none() {
                    psi = Some(self.environment_isomorphism(i, other, other_partner, r + 1)?);
                }
                let (ball_i, ball_j, iso) = psi.as_ref().expect("computed");
                let idx = ball_i.binary_search(&a).expect("neighbour inside the ball");
                (StrategyCase::Neighbour, ball_j[iso[idx]])
            } else if left_of && !seg.in_left(i, other, r + 1) {
                (StrategyCase::FarLeft, self.pin(i, a, PinSide::L, r + 1, &mut used)?)
            } else if left_of {
                (StrategyCase::Left, self.transfer(i, a)?)
            } else if !seg.in_right(i, other, r + 1) {
                (StrategyCase::FarRight, self.pin(i, a, PinSide::R, r + 1, &mut used)?)
            } else {
                (StrategyCase::Right, self.transfer(i, a)?)
            };
            elements.push(response);
            cases.push(case);
        }
        if elements.iter().duplicates().next().is_some() {
            return Err(GameError::Precondition(format!(
                "responses {elements:?} to the set {:?} are not distinct",
                mv.elements
            )));
        }
        Ok(Response { elements, cases })
    }

    fn validate(&self, state: &GameState, mv: &SpoilerMove) -> Result<(), GameError> {
        if state.rounds_left == 0 {
            return Err(GameError::IllegalMove("no rounds left".into()));
        }
        if mv.side > 1 || mv.pebble > 1 {
            return Err(GameError::IllegalMove("structure and pebble must be 0 or 1".into()));
        }
        if mv.elements.is_empty() || mv.elements.len() > state.kind.max_set() {
            return Err(GameError::IllegalMove(format!(
                "{} elements chosen, allowed 1 to {}",
                mv.elements.len(),
                state.kind.max_set()
            )));
        }
        if mv.elements.iter().duplicates().next().is_some() {
            return Err(GameError::IllegalMove("repeated element in the chosen set".into()));
        }
        let n = self.plain[mv.side].size();
        if let Some(&e) = mv.elements.iter().find(|&&e| e >= n) {
            return Err(GameError::IllegalMove(format!("element {e} out of range")));
        }
        Ok(())
    }

    fn transfer(&self, side: usize, a: Element) -> Result<Element, GameError> {
        self.segments
            .transfer(side, a)
            .ok_or_else(|| GameError::Precondition(format!("element {a} of structure {side} is outside the domain of pi")))
    }

    /// Balls of the two centres and the isomorphism between their environments, on ball indices.
    fn environment_isomorphism(
        &self,
        i: usize,
        c_i: Element,
        c_j: Element,
        radius: usize,
    ) -> Result<(Vec<Element>, Vec<Element>, Vec<Element>), GameError> {
        let j = 1 - i;
        let env_i = environment_in(&self.plain[i], &self.graphs[i], &self.orders[i], c_i, radius);
        let env_j = environment_in(&self.plain[j], &self.graphs[j], &self.orders[j], c_j, radius);
        let iso = pointed_isomorphism(&env_i, &env_j).ok_or_else(|| {
            GameError::Precondition(format!(
                "{radius}-environments of {c_i} and {c_j} are not isomorphic"
            ))
        })?;
        Ok((self.graphs[i].ball(c_i, radius), self.graphs[j].ball(c_j, radius), iso))
    }

    /// An unused pin copy of `pin_side` in layer `layer` with the `k`-environment of `a`,
    /// as an element of the structure opposite to `i`.
    fn pin(
        &self,
        i: usize,
        a: Element,
        pin_side: PinSide,
        layer: usize,
        used: &mut HashMap<(PinSide, CanonicalKey), usize>,
    ) -> Result<Element, GameError> {
        let env = self.env_key(i, a, self.k);
        let copies = self
            .pins
            .get(&(pin_side, layer, env.clone()))
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        let count = used.entry((pin_side, env.clone())).or_insert(0);
        let Some(&pin) = copies.get(*count) else {
            return Err(GameError::Precondition(format!(
                "no unused {pin_side} pin in layer {layer} for environment {env} of element {a}"
            )));
        };
        *count += 1;
        if i == 0 {
            self.transfer(0, pin)
        } else {
            Ok(pin)
        }
    }

    /// Positions after the spoiler's move and the strategy's response, one per element of the set.
    pub fn successors(&self, state: &GameState, mv: &SpoilerMove, response: &Response) -> Vec<GameState> {
        mv.elements
            .iter()
            .zip(&response.elements)
            .map(|(&a, &b)| {
                let mut next = state.clone();
                next.pebbles[mv.side][mv.pebble] = a;
                next.pebbles[1 - mv.side][mv.pebble] = b;
                next.rounds_left -= 1;
                next
            })
            .collect()
    }

    /// Plays every spoiler move (every set of up to `max_set` elements in the
    /// counting game) from the initial state down to zero rounds, checking the
    /// invariants after each response. `limit` bounds the number of moves.
    pub fn sweep(&self, kind: GameKind, limit: u64) -> Result<SweepReport, GameError> {
        let mut report = SweepReport::default();
        let mut seen = HashSet::new();
        let start = self.initial_state(kind);
        let init = self.check_invariants(&start);
        report.states += 1;
        if !init.holds() {
            record(&mut report, format!("initial state: {}", init.failures.join("; ")));
            return Ok(report);
        }
        self.sweep_from(&start, limit, &mut seen, &mut report)?;
        Ok(report)
    }

    fn sweep_from(
        &self,
        state: &GameState,
        limit: u64,
        seen: &mut HashSet<([[Element; 2]; 2], usize)>,
        report: &mut SweepReport,
    ) -> Result<(), GameError> {
        if state.rounds_left == 0 || !seen.insert((state.pebbles, state.rounds_left)) {
            return Ok(());
        }
        for side in 0..2 {
            let n = self.plain[side].size();
            for pebble in 0..2 {
                for size in 1..=state.kind.max_set().min(n) {
                    for elements in (0..n).combinations(size) {
                        report.moves += 1;
                        if report.moves as u64 > limit {
                            return Err(GameError::CapExceeded {
                                needed: report.moves as u64,
                                cap: limit,
                            });
                        }
                        let mv = SpoilerMove { side, pebble, elements };
                        let response = match self.duplicator_move(state, &mv) {
                            Ok(resp) => resp,
                            Err(e) => {
                                record(report, format!("{state:?} {mv:?}: {e}"));
                                continue;
                            }
                        };
                        for next in self.successors(state, &mv, &response) {
                            report.states += 1;
                            let inv = self.check_invariants(&next);
                            if inv.holds() {
                                self.sweep_from(&next, limit, seen, report)?;
                            } else {
                                record(
                                    report,
                                    format!("{mv:?} answered by {response:?}: {}", inv.failures.join("; ")),
                                );
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn record(report: &mut SweepReport, failure: String) {
    report.failure_count += 1;
    if report.failures.len() < KEPT_FAILURES {
        report.failures.push(failure);
    }
}

pub fn duplicator_move(ctx: &StrategyContext, state: &GameState, mv: &SpoilerMove) -> Result<Response, GameError> {
    ctx.duplicator_move(state, mv)
}

pub fn check_invariants(ctx: &StrategyContext, state: &GameState) -> InvariantReport {
    ctx.check_invariants(state)
}
