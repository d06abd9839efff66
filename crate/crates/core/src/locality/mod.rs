//! Gaifman neighbourhoods, neighbourhood-type censuses, frequency
//! classification and the construction of two linear orders that make two
//! structures with similar censuses indistinguishable.

mod classify;
mod orders;
mod scatter;

pub use classify::{
    census_equal_up_to, classify_frequent, moore_bound, theory_constants, Classification,
    LocalityParams, TheoryConstants,
};
pub use orders::{
    build_orders, ConstructionReport, OrderConstruction, Outcome, Pin, PinSide, SegmentLabel,
    SegmentMap, EMBEDDING_STEP_CAP, MAX_ENVIRONMENT_BALL,
};
pub use scatter::{scatter_select, scatter_select_counts};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::canon::{canonical_key, CanonicalKey};
use crate::structure::{Element, GaifmanGraph, LinearOrder, PointedStructure, Structure, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalityError {
    #[error("element {element} out of range for domain of size {size}")]
    OutOfRange { element: Element, size: usize },
    #[error("class {class}: found {found} scattered elements, needed {needed}")]
    ScatterFailure {
        class: usize,
        found: usize,
        needed: usize,
    },
    #[error("censuses differ beyond the threshold {0}")]
    CensusMismatch(String),
    #[error("the structures disagree on which types are frequent")]
    FrequentMismatch,
    #[error("no frequent types and the structures are not isomorphic")]
    NotIsomorphic,
    #[error("pin neighbourhoods overlap already placed segments: {0}")]
    PinCollision(String),
    #[error("no embedding of the constrained part into the second structure: {0}")]
    NoEmbedding(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("construction invariant violated: {0}")]
    Invariant(String),
    #[error("degree {degree} exceeds the bound {bound}")]
    DegreeTooLarge { degree: usize, bound: usize },
    #[error("structures have different signatures")]
    SignatureMismatch,
    #[error(transparent)]
    Structure(#[from] StructureError),
}

fn check_element(s: &Structure, a: Element) -> Result<(), LocalityError> {
    if a >= s.size() {
        return Err(LocalityError::OutOfRange {
            element: a,
            size: s.size(),
        });
    }
    Ok(())
}

/// The radius-`k` ball around `a` as an induced substructure centred at `a`
/// (orders and constants dropped), elements relabelled in increasing order.
pub fn neighborhood(s: &Structure, a: Element, k: usize) -> Result<PointedStructure, LocalityError> {
    check_element(s, a)?;
    Ok(neighborhood_in(&s.without_orders(), &s.gaifman(), a, k))
}

pub(crate) fn neighborhood_in(s: &Structure, g: &GaifmanGraph, a: Element, k: usize) -> PointedStructure {
    let ball = g.ball(a, k);
    let center = ball.binary_search(&a).expect("centre in its ball");
    let mut sub = s.induced(&ball);
    for name in sub.orders().keys().cloned().collect::<Vec<_>>() {
        sub.remove_order(&name);
    }
    strip_constants(&mut sub);
    PointedStructure {
        structure: sub,
        center,
    }
}

fn strip_constants(s: &mut Structure) {
    if !s.signature().constants().is_empty() {
        let mut sig = crate::structure::Signature::new();
        for r in s.signature().relations() {
            sig.add_relation(&r.name, r.arity).expect("copied symbol");
        }
        *s = s.reduct(sig).expect("sub-signature");
    }
}

/// The radius-`k` environment of `a`: its neighbourhood together with the
/// restriction of `order` (installed as `<`).
pub fn environment(
    s: &Structure,
    order: &LinearOrder,
    a: Element,
    k: usize,
) -> Result<PointedStructure, LocalityError> {
    check_element(s, a)?;
    Ok(environment_in(&s.without_orders(), &s.gaifman(), order, a, k))
}

pub(crate) fn environment_in(
    s: &Structure,
    g: &GaifmanGraph,
    order: &LinearOrder,
    a: Element,
    k: usize,
) -> PointedStructure {
    let ball = g.ball(a, k);
    let center = ball.binary_search(&a).expect("centre in its ball");
    let mut sub = s.induced(&ball);
    for name in sub.orders().keys().cloned().collect::<Vec<_>>() {
        sub.remove_order(&name);
    }
    strip_constants(&mut sub);
    sub.set_order("<", order.induced(&ball)).expect("order on ball");
    PointedStructure {
        structure: sub,
        center,
    }
}

/// Occurrence counts of radius-`k` neighbourhood types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub k: usize,
    pub counts: BTreeMap<CanonicalKey, usize>,
    /// Type of each element.
    pub type_of: Vec<CanonicalKey>,
}

impl Census {
    pub fn count(&self, key: &CanonicalKey) -> usize {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Elements realising `key`, in increasing order.
    pub fn occurrences(&self, key: &CanonicalKey) -> Vec<Element> {
        (0..self.type_of.len())
            .filter(|&e| &self.type_of[e] == key)
            .collect()
    }

    /// One line `type <digest> count <n>` per type.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, n) in &self.counts {
            let _ = writeln!(out, "type {key} count {n}");
        }
        out
    }
}

/// Census of radius-`k` neighbourhood types (orders ignored).
pub fn census(s: &Structure, k: usize) -> Census {
    let plain = s.without_orders();
    let g = plain.gaifman();
    let type_of: Vec<CanonicalKey> = plain
        .elements()
        .map(|a| canonical_key(&neighborhood_in(&plain, &g, a, k)))
        .collect();
    let mut counts = BTreeMap::new();
    for key in &type_of {
        *counts.entry(key.clone()).or_insert(0) += 1;
    }
    Census { k, counts, type_of }
}
