//! Construction of two linear orders on a pair of bounded-degree structures
//! with matching neighbourhood censuses.
//!
//! The domain of the first structure is cut into segments
//! `Rare . L_0 . L_1 ... L_2k . Middle . R_2k ... R_1 . R_0`, where `Rare`
//! holds the rare occurrences with their `k`-balls, each `L_j` is `NL_j`
//! (fresh neighbours of the previous segment) followed by `UL_j` (for
//! `j <= k`: pinned balls ordered to realise every environment type of every
//! frequent neighbourhood type), and the right side mirrors the left. All
//! segments except `Middle` are transported to the second structure by an
//! embedding `pi` of the bordered segment part.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use itertools::Itertools;

use super::{
    census, census_equal_up_to, classify_frequent, environment_in, neighborhood_in, scatter_select_counts,
    Classification, LocalityError, LocalityParams,
};
use crate::canon::{canonical_key, find_isomorphism, pointed_isomorphism, CanonicalKey};
use crate::structure::{Element, GaifmanGraph, LinearOrder, Structure};

/// Largest ball whose orders are enumerated when listing environment types.
pub const MAX_ENVIRONMENT_BALL: usize = 8;

/// Step budget of the embedding search for `pi`.
pub const EMBEDDING_STEP_CAP: u64 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentLabel {
    Rare,
    NL(usize),
    UL(usize),
    Middle,
    UR(usize),
    NR(usize),
}

impl SegmentLabel {
    /// Index `j` for left and right segments.
    pub fn layer(self) -> Option<usize> {
        match self {
            SegmentLabel::NL(j) | SegmentLabel::UL(j) | SegmentLabel::UR(j) | SegmentLabel::NR(j) => Some(j),
            SegmentLabel::Rare | SegmentLabel::Middle => None,
        }
    }

    pub fn is_left(self) -> bool {
        matches!(self, SegmentLabel::NL(_) | SegmentLabel::UL(_))
    }

    pub fn is_right(self) -> bool {
        matches!(self, SegmentLabel::NR(_) | SegmentLabel::UR(_))
    }
}

impl fmt::Display for SegmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentLabel::Rare => write!(f, "Rare"),
            SegmentLabel::NL(j) => write!(f, "NL{j}"),
            SegmentLabel::UL(j) => write!(f, "UL{j}"),
            SegmentLabel::Middle => write!(f, "Middle"),
            SegmentLabel::UR(j) => write!(f, "UR{j}"),
            SegmentLabel::NR(j) => write!(f, "NR{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PinSide {
    L,
    R,
}

impl fmt::Display for PinSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PinSide::L => "L",
            PinSide::R => "R",
        })
    }
}

/// A pinned element of the first structure whose ball realises `environment`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pin {
    pub side: PinSide,
    pub layer: usize,
    pub environment: CanonicalKey,
    pub neighbourhood: CanonicalKey,
    pub copy: usize,
    pub element: Element,
}

/// Segment labels of both structures, the pins and the transfer map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMap {
    pub k: usize,
    pub labels: [Vec<SegmentLabel>; 2],
    pub pins: Vec<Pin>,
    /// `pi[e]` for `e` in the first structure's non-middle segments.
    pub pi: Vec<Option<Element>>,
    pub pi_inv: Vec<Option<Element>>,
}

impl SegmentMap {
    pub fn label(&self, side: usize, e: Element) -> SegmentLabel {
        self.labels[side][e]
    }

    /// Membership in `Rare + L_0..L_r + R_0..R_r`.
    pub fn in_sigma(&self, side: usize, e: Element, r: usize) -> bool {
        match self.labels[side][e] {
            SegmentLabel::Rare => true,
            SegmentLabel::Middle => false,
            l => l.layer().is_some_and(|j| j <= r),
        }
    }

    pub fn in_left(&self, side: usize, e: Element, j: usize) -> bool {
        let l = self.labels[side][e];
        l.is_left() && l.layer() == Some(j)
    }

    pub fn in_right(&self, side: usize, e: Element, j: usize) -> bool {
        let l = self.labels[side][e];
        l.is_right() && l.layer() == Some(j)
    }

    /// Image of `e` (in structure `side`) under `pi` or its inverse.
    pub fn transfer(&self, side: usize, e: Element) -> Option<Element> {
        if side == 0 {
            self.pi[e]
        } else {
            self.pi_inv[e]
        }
    }

    /// Pins (first-structure elements) on `side` in layer `layer` realising `environment`.
    pub fn pins_for(&self, side: PinSide, layer: usize, environment: &CanonicalKey) -> Vec<Element> {
        self.pins
            .iter()
            .filter(|p| p.side == side && p.layer == layer && &p.environment == environment)
            .map(|p| p.element)
            .collect()
    }

    /// Elements of structure `side` carrying `label`, in increasing order.
    pub fn members(&self, side: usize, label: SegmentLabel) -> Vec<Element> {
        (0..self.labels[side].len()).filter(|&e| self.labels[side][e] == label).collect()
    }

    /// `segment <i> <element> <label>`, `pin <L|R> <j> <typekey> <element>` and `pi <e0> <e1>` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, labels) in self.labels.iter().enumerate() {
            for (e, l) in labels.iter().enumerate() {
                let _ = writeln!(out, "segment {i} {e} {l}");
            }
        }
        for p in &self.pins {
            let _ = writeln!(out, "pin {} {} {} {}", p.side, p.layer, p.environment, p.element);
        }
        for (e0, e1) in self.pi.iter().enumerate() {
            if let Some(e1) = e1 {
                let _ = writeln!(out, "pi {e0} {e1}");
            }
        }
        out
    }
}

/// Direct verification of the transfer properties.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstructionReport {
    /// Elements of `Sigma^k` compared with their image.
    pub environments_checked: usize,
    /// Elements whose `k`-environment differs from that of their image.
    pub environment_failures: Vec<Element>,
    pub pairs_checked: usize,
    /// Pairs of `Sigma^k` whose full 2-type differs from that of the image pair.
    pub type_failures: Vec<(Element, Element)>,
    /// `(structure, element, neighbour)` edges leaving the allowed neighbouring segments.
    pub adjacency_failures: Vec<(usize, Element, Element)>,
    /// `(structure, segment, environment)` universal segments missing an environment type.
    pub universality_failures: Vec<(usize, SegmentLabel, CanonicalKey)>,
}

impl ConstructionReport {
    pub fn passed(&self) -> bool {
        self.environment_failures.is_empty()
            && self.type_failures.is_empty()
            && self.adjacency_failures.is_empty()
            && self.universality_failures.is_empty()
    }

    pub fn to_text(&self) -> String {
        let verdict = |ok: bool| if ok { "pass" } else { "fail" };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "environments {} checked {} failures {}",
            verdict(self.environment_failures.is_empty()),
            self.environments_checked,
            self.environment_failures.len()
        );
        let _ = writeln!(
            out,
            "types {} checked {} failures {}",
            verdict(self.type_failures.is_empty()),
            self.pairs_checked,
            self.type_failures.len()
        );
        let _ = writeln!(
            out,
            "adjacency {} failures {}",
            verdict(self.adjacency_failures.is_empty()),
            self.adjacency_failures.len()
        );
        let _ = writeln!(
            out,
            "universality {} failures {}",
            verdict(self.universality_failures.is_empty()),
            self.universality_failures.len()
        );
        out
    }
}

/// Result of a successful construction.
#[derive(Debug, Clone)]
pub struct OrderConstruction {
    pub k: usize,
    pub order0: LinearOrder,
    pub order1: LinearOrder,
    pub segments: SegmentMap,
    pub report: ConstructionReport,
    pub classification: Classification,
    /// Environment types (ordered by key) of each frequent neighbourhood type.
    pub environment_types: BTreeMap<CanonicalKey, Vec<CanonicalKey>>,
    /// Copies of each pin.
    pub count_multiplier: usize,
}

impl OrderConstruction {
    /// The first structure with its order installed as `<`.
    pub fn ordered(&self, s: &Structure, side: usize) -> Result<Structure, LocalityError> {
        let order = if side == 0 { &self.order0 } else { &self.order1 };
        Ok(s.without_orders().with_order("<", order.clone())?)
    }

    pub fn to_text(&self) -> String {
        let seq = |o: &LinearOrder| o.sequence().iter().map(|e| e.to_string()).join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "order 0 : {}", seq(&self.order0));
        let _ = writeln!(out, "order 1 : {}", seq(&self.order1));
        out.push_str(&self.segments.to_text());
        out.push_str(&self.report.to_text());
        out
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Built(Box<OrderConstruction>),
    /// No frequent type: the structures are isomorphic and `order1` is the
    /// image of `order0` under `isomorphism`.
    Isomorphic {
        order0: LinearOrder,
        order1: LinearOrder,
        isomorphism: Vec<Element>,
    },
}

/// Tuples incident to each element, for incremental induced-substructure checks.
struct Incidence {
    by_element: Vec<Vec<(usize, Vec<Element>)>>,
}

impl Incidence {
    fn new(s: &Structure) -> Self {
        let mut by_element = vec![Vec::new(); s.size()];
        for rel in 0..s.signature().relations().len() {
            for t in s.tuples(rel) {
                let mut seen: Vec<Element> = t.clone();
                seen.sort_unstable();
                seen.dedup();
                for e in seen {
                    by_element[e].push((rel, t.clone()));
                }
            }
        }
        Incidence { by_element }
    }
}

/// Orders on `a0` and `a1` following the segment construction.
pub fn build_orders(a0: &Structure, a1: &Structure, params: &LocalityParams) -> Result<Outcome, LocalityError> {
    if a0.signature() != a1.signature() {
        return Err(LocalityError::SignatureMismatch);
    }
    let p0 = a0.without_orders();
    let p1 = a1.without_orders();
    for p in [&p0, &p1] {
        let d = p.degree();
        if d > params.d {
            return Err(LocalityError::DegreeTooLarge {
                degree: d,
                bound: params.d,
            });
        }
    }
    let k = params.k;
    let c0 = census(&p0, k);
    let c1 = census(&p1, k);
    let cl0 = classify_frequent(&c0, params);
    let cl1 = classify_frequent(&c1, params);
    if !census_equal_up_to(&c0, &c1, &cl0.threshold) {
        let key = c0
            .counts
            .keys()
            .chain(c1.counts.keys())
            .find(|key| c0.count(key) != c1.count(key))
            .expect("censuses differ somewhere");
        return Err(LocalityError::CensusMismatch(format!(
            "type {key}: {} vs {} occurrences, threshold {}",
            c0.count(key),
            c1.count(key),
            cl0.threshold
        )));
    }
    if cl0.frequent != cl1.frequent {
        return Err(LocalityError::FrequentMismatch);
    }
    if cl0.frequent.is_empty() {
        let iso = find_isomorphism(&p0, &p1).ok_or(LocalityError::NotIsomorphic)?;
        let order0 = LinearOrder::identity(p0.size());
        let order1 = LinearOrder::from_sequence(order0.sequence().iter().map(|&e| iso[e]).collect())?;
        return Ok(Outcome::Isomorphic {
            order0,
            order1,
            isomorphism: iso,
        });
    }

    let g0 = p0.gaifman();
    let g1 = p1.gaifman();
    let c = params.count_multiplier.max(1);

    // Environment types of each frequent neighbourhood type, with a realising
    // order of a representative ball.
    let mut environment_types = BTreeMap::new();
    let mut realisers: BTreeMap<CanonicalKey, (Element, BTreeMap<CanonicalKey, Vec<Element>>)> = BTreeMap::new();
    for tau in &cl0.frequent {
        let rep = c0.occurrences(tau)[0];
        let envs = environment_orders(&p0, &g0, rep, k)?;
        environment_types.insert(tau.clone(), envs.keys().cloned().collect::<Vec<_>>());
        realisers.insert(tau.clone(), (rep, envs));
    }

    // Pins.
    let rare_occurrences: Vec<Element> = p0.elements().filter(|&e| cl0.rare.contains(&c0.type_of[e])).collect();
    let taus: Vec<&CanonicalKey> = cl0.frequent.iter().collect();
    let classes: Vec<Vec<Element>> = taus.iter().map(|t| c0.occurrences(t)).collect();
    let counts: Vec<usize> = taus
        .iter()
        .map(|t| environment_types[*t].len() * 2 * (k + 1) * c)
        .collect();
    let picked = scatter_select_counts(&p0, &rare_occurrences, &classes, &counts, params.delta)?;
    let mut pins = Vec::new();
    for (tau, elems) in taus.iter().zip(picked) {
        let mut it = elems.into_iter();
        for side in [PinSide::L, PinSide::R] {
            for layer in 0..=k {
                for env in &environment_types[*tau] {
                    for copy in 0..c {
                        pins.push(Pin {
                            side,
                            layer,
                            environment: env.clone(),
                            neighbourhood: (*tau).clone(),
                            copy,
                            element: it.next().expect("enough pins selected"),
                        });
                    }
                }
            }
        }
    }

    // Segments of the first structure.
    let n0 = p0.size();
    let mut label: Vec<Option<SegmentLabel>> = vec![None; n0];
    let rare_ball = g0.ball_of_set(&rare_occurrences, k);
    assign(&mut label, &rare_ball, SegmentLabel::Rare)?;
    let mut left: Vec<Vec<Element>> = Vec::new();
    let mut right: Vec<Vec<Element>> = Vec::new();
    let mut segments_seq: BTreeMap<SegmentLabel, Vec<Element>> = BTreeMap::new();
    segments_seq.insert(SegmentLabel::Rare, rare_ball.clone());
    for side in [PinSide::L, PinSide::R] {
        let layers = if side == PinSide::L { &mut left } else { &mut right };
        for j in 0..=2 * k {
            let (nl, ul) = match side {
                PinSide::L => (SegmentLabel::NL(j), SegmentLabel::UL(j)),
                PinSide::R => (SegmentLabel::NR(j), SegmentLabel::UR(j)),
            };
            let previous: Vec<Element> = match (side, j) {
                (PinSide::L, 0) => rare_ball.clone(),
                (PinSide::R, 0) => Vec::new(),
                _ => layers[j - 1].clone(),
            };
            let fresh: Vec<Element> = previous
                .iter()
                .flat_map(|&a| g0.neighbors(a).iter().copied())
                .filter(|&b| label[b].is_none())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            assign(&mut label, &fresh, nl)?;
            segments_seq.insert(nl, fresh.clone());
            let mut layer_elems = fresh;
            let mut useq = Vec::new();
            if j <= k {
                for pin in pins.iter().filter(|p| p.side == side && p.layer == j) {
                    let (rep, envs) = &realisers[&pin.neighbourhood];
                    let seq = realise(&p0, &g0, *rep, &envs[&pin.environment], pin.element, k)?;
                    if let Some(&taken) = seq.iter().find(|&&e| label[e].is_some()) {
                        return Err(LocalityError::PinCollision(format!(
                            "ball of pin {} for {ul} meets element {taken} of {}",
                            pin.element,
                            label[taken].expect("labelled")
                        )));
                    }
                    assign(&mut label, &seq, ul)?;
                    useq.extend(&seq);
                }
            }
            layer_elems.extend(&useq);
            segments_seq.insert(ul, useq);
            layers.push(layer_elems);
        }
    }
    let middle0: Vec<Element> = (0..n0).filter(|&e| label[e].is_none()).collect();
    assign(&mut label, &middle0, SegmentLabel::Middle)?;
    let labels0: Vec<SegmentLabel> = label.into_iter().map(|l| l.expect("all labelled")).collect();
    let order0 = concatenate(&segments_seq, &middle0, k, |e| e)?;

    // Transfer.
    let sigma: Vec<Element> = (0..n0).filter(|&e| labels0[e] != SegmentLabel::Middle).collect();
    let pi_full = find_embedding(&p0, &p1, &g0, &g1, &sigma, &labels0, &c0.type_of, &c1.type_of, k)?;
    let n1 = p1.size();
    let mut pi = vec![None; n0];
    let mut pi_inv = vec![None; n1];
    let mut labels1 = vec![SegmentLabel::Middle; n1];
    for &e in &sigma {
        let f = pi_full[&e];
        pi[e] = Some(f);
        pi_inv[f] = Some(e);
        labels1[f] = labels0[e];
    }
    let middle1: Vec<Element> = (0..n1).filter(|&f| pi_inv[f].is_none()).collect();
    let order1 = concatenate(&segments_seq, &middle1, k, |e| pi[e].expect("transferred"))?;

    let segments = SegmentMap {
        k,
        labels: [labels0, labels1],
        pins,
        pi,
        pi_inv,
    };
    let report = verify(&p0, &p1, &g0, &g1, &order0, &order1, &segments, &environment_types, c)?;
    Ok(Outcome::Built(Box::new(OrderConstruction {
        k,
        order0,
        order1,
        segments,
        report,
        classification: cl0,
        environment_types,
        count_multiplier: c,
    })))
}

fn assign(label: &mut [Option<SegmentLabel>], elems: &[Element], l: SegmentLabel) -> Result<(), LocalityError> {
    for &e in elems {
        if let Some(old) = label[e] {
            return Err(LocalityError::Invariant(format!(
                "element {e} placed in both {old} and {l}"
            )));
        }
        label[e] = Some(l);
    }
    Ok(())
}

fn concatenate(
    segments: &BTreeMap<SegmentLabel, Vec<Element>>,
    middle: &[Element],
    k: usize,
    map: impl Fn(Element) -> Element,
) -> Result<LinearOrder, LocalityError> {
    let mut seq: Vec<Element> = segments[&SegmentLabel::Rare].iter().map(|&e| map(e)).collect();
    for j in 0..=2 * k {
        for l in [SegmentLabel::NL(j), SegmentLabel::UL(j)] {
            seq.extend(segments[&l].iter().map(|&e| map(e)));
        }
    }
    seq.extend(middle);
    for j in (0..=2 * k).rev() {
        for l in [SegmentLabel::UR(j), SegmentLabel::NR(j)] {
            seq.extend(segments[&l].iter().map(|&e| map(e)));
        }
    }
    Ok(LinearOrder::from_sequence(seq)?)
}

/// Every environment type over the ball of `rep`, each with one realising
/// order given as a sequence of local (ball) indices.
fn environment_orders(
    s: &Structure,
    g: &GaifmanGraph,
    rep: Element,
    k: usize,
) -> Result<BTreeMap<CanonicalKey, Vec<Element>>, LocalityError> {
    let mut nb = neighborhood_in(s, g, rep, k);
    let b = nb.structure.size();
    if b > MAX_ENVIRONMENT_BALL {
        return Err(LocalityError::CapExceeded(format!(
            "ball of {b} elements has too many orders to enumerate (limit {MAX_ENVIRONMENT_BALL})"
        )));
    }
    let mut out = BTreeMap::new();
    for perm in (0..b).permutations(b) {
        nb.structure.set_order("<", LinearOrder::from_sequence(perm.clone())?)?;
        out.entry(canonical_key(&nb)).or_insert(perm);
    }
    Ok(out)
}

/// The ball of `pin` as a sequence ordered so that its environment is the one
/// realised by `local_seq` on the ball of `rep`.
fn realise(
    s: &Structure,
    g: &GaifmanGraph,
    rep: Element,
    local_seq: &[Element],
    pin: Element,
    k: usize,
) -> Result<Vec<Element>, LocalityError> {
    let nb_rep = neighborhood_in(s, g, rep, k);
    let nb_pin = neighborhood_in(s, g, pin, k);
    let iso = pointed_isomorphism(&nb_rep, &nb_pin).ok_or_else(|| {
        LocalityError::Invariant(format!("pin {pin} does not share the neighbourhood type of {rep}"))
    })?;
    let ball = g.ball(pin, k);
    Ok(local_seq.iter().map(|&i| ball[iso[i]]).collect())
}

/// Embeds the segments and their neighbours into the second structure:
/// induced substructures are preserved, segment elements keep their degree
/// (so their neighbourhoods map onto neighbourhoods) and elements of
/// `Sigma^k` keep their `k`-neighbourhood type.
#[allow(clippy::too_many_arguments)]
fn find_embedding(
    p0: &Structure,
    p1: &Structure,
    g0: &GaifmanGraph,
    g1: &GaifmanGraph,
    sigma: &[Element],
    labels0: &[SegmentLabel],
    type0: &[CanonicalKey],
    type1: &[CanonicalKey],
    k: usize,
) -> Result<BTreeMap<Element, Element>, LocalityError> {
    let sigma_set: BTreeSet<Element> = sigma.iter().copied().collect();
    let mut domain: BTreeSet<Element> = sigma_set.clone();
    domain.extend(g0.boundary(&sigma_set));
    let in_sigma_k = |e: Element| match labels0[e] {
        SegmentLabel::Rare => true,
        SegmentLabel::Middle => false,
        l => l.layer().is_some_and(|j| j <= k),
    };

    // Order: components of the domain, each from a Sigma^k root, breadth first.
    let mut seq: Vec<(Element, Option<Element>)> = Vec::new();
    let mut seen: BTreeSet<Element> = BTreeSet::new();
    let roots: Vec<Element> = domain
        .iter()
        .copied()
        .filter(|&e| in_sigma_k(e))
        .chain(domain.iter().copied())
        .collect();
    for root in roots {
        if !seen.insert(root) {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([(root, None)]);
        while let Some((e, parent)) = queue.pop_front() {
            seq.push((e, parent));
            for &b in g0.neighbors(e) {
                if domain.contains(&b) && seen.insert(b) {
                    queue.push_back((b, Some(e)));
                }
            }
        }
    }

    let inc0 = Incidence::new(p0);
    let inc1 = Incidence::new(p1);
    let n1 = p1.size();
    let mut map: Vec<Option<Element>> = vec![None; p0.size()];
    let mut inv: Vec<Option<Element>> = vec![None; n1];
    let mut steps = 0u64;

    let fits = |e: Element, f: Element, map: &[Option<Element>], inv: &[Option<Element>]| -> bool {
        if inv[f].is_some() {
            return false;
        }
        if sigma_set.contains(&e) && g0.degree_of(e) != g1.degree_of(f) {
            return false;
        }
        if in_sigma_k(e) && type0[e] != type1[f] {
            return false;
        }
        let image = |x: Element| if x == e { Some(f) } else { map[x] };
        for (rel, t) in &inc0.by_element[e] {
            let img: Option<Vec<Element>> = t.iter().map(|&x| image(x)).collect();
            if let Some(img) = img {
                if !p1.contains(*rel, &img) {
                    return false;
                }
            }
        }
        let pre = |y: Element| if y == f { Some(e) } else { inv[y] };
        for (rel, t) in &inc1.by_element[f] {
            let img: Option<Vec<Element>> = t.iter().map(|&y| pre(y)).collect();
            if let Some(img) = img {
                if !p0.contains(*rel, &img) {
                    return false;
                }
            }
        }
        true
    };

    // Iterative backtracking; `cands[i]` are the remaining candidates of position i.
    let mut cands: Vec<Vec<Element>> = Vec::with_capacity(seq.len());
    let mut i = 0usize;
    loop {
        if i == seq.len() {
            break;
        }
        if cands.len() == i {
            let (e, parent) = seq[i];
            let pool: Vec<Element> = match parent {
                Some(p) => g1.neighbors(map[p].expect("parent mapped")).to_vec(),
                None => (0..n1).collect(),
            };
            let mut pool: Vec<Element> = pool.into_iter().filter(|&f| fits(e, f, &map, &inv)).collect();
            pool.reverse();
            cands.push(pool);
        }
        steps += 1;
        if steps > EMBEDDING_STEP_CAP {
            return Err(LocalityError::CapExceeded(format!(
                "embedding search exceeded {EMBEDDING_STEP_CAP} steps"
            )));
        }
        let e = seq[i].0;
        if let Some(old) = map[e].take() {
            inv[old] = None;
        }
        match cands[i].pop() {
            Some(f) => {
                if fits(e, f, &map, &inv) {
                    map[e] = Some(f);
                    inv[f] = Some(e);
                    i += 1;
                }
            }
            None => {
                cands.pop();
                if i == 0 {
                    return Err(LocalityError::NoEmbedding(
                        "the bordered segments of the first structure do not embed into the second".into(),
                    ));
                }
                i -= 1;
            }
        }
    }
    Ok(seq.iter().map(|&(e, _)| (e, map[e].expect("mapped"))).collect())
}

#[allow(clippy::too_many_arguments)]
fn verify(
    p0: &Structure,
    p1: &Structure,
    g0: &GaifmanGraph,
    g1: &GaifmanGraph,
    order0: &LinearOrder,
    order1: &LinearOrder,
    seg: &SegmentMap,
    environment_types: &BTreeMap<CanonicalKey, Vec<CanonicalKey>>,
    c: usize,
) -> Result<ConstructionReport, LocalityError> {
    let k = seg.k;
    let mut report = ConstructionReport::default();
    let sigma_k: Vec<Element> = (0..p0.size()).filter(|&e| seg.in_sigma(0, e, k)).collect();
    for &a in &sigma_k {
        report.environments_checked += 1;
        let b = seg.pi[a].expect("sigma is transferred");
        let e0 = canonical_key(&environment_in(p0, g0, order0, a, k));
        let e1 = canonical_key(&environment_in(p1, g1, order1, b, k));
        if e0 != e1 {
            report.environment_failures.push(a);
        }
    }
    for &a in &sigma_k {
        for &b in &sigma_k {
            report.pairs_checked += 1;
            let (fa, fb) = (seg.pi[a].expect("mapped"), seg.pi[b].expect("mapped"));
            let same_vocab = p0.vocab_type2(a, b)? == p1.vocab_type2(fa, fb)?;
            let same_order = order0.less(a, b) == order1.less(fa, fb);
            if !same_vocab || !same_order {
                report.type_failures.push((a, b));
            }
        }
    }
    // Rare sits left of L_0, so it counts as layer -1 of the left side.
    let position = |l: SegmentLabel| -> Option<(i64, bool)> {
        match l {
            SegmentLabel::Rare => Some((-1, true)),
            SegmentLabel::NL(j) | SegmentLabel::UL(j) => Some((j as i64, true)),
            SegmentLabel::NR(j) | SegmentLabel::UR(j) => Some((j as i64, false)),
            SegmentLabel::Middle => None,
        }
    };
    for (side, g) in [g0, g1].into_iter().enumerate() {
        for e in 0..g.len() {
            let Some((j, is_left)) = position(seg.labels[side][e]) else {
                continue;
            };
            if j >= 2 * k as i64 {
                continue;
            }
            for &b in g.neighbors(e) {
                let ok = match position(seg.labels[side][b]) {
                    Some((jb, lb)) => (jb - j).abs() <= 1 && lb == is_left,
                    None => false,
                };
                if !ok {
                    report.adjacency_failures.push((side, e, b));
                }
            }
        }
    }
    for (side, (p, g, order)) in [(p0, g0, order0), (p1, g1, order1)].into_iter().enumerate() {
        for j in 0..=k {
            for label in [SegmentLabel::UL(j), SegmentLabel::UR(j)] {
                let mut found: BTreeMap<CanonicalKey, usize> = BTreeMap::new();
                for e in seg.members(side, label) {
                    *found
                        .entry(canonical_key(&environment_in(p, g, order, e, k)))
                        .or_insert(0) += 1;
                }
                for env in environment_types.values().flatten() {
                    if found.get(env).copied().unwrap_or(0) < c {
                        report.universality_failures.push((side, label, env.clone()));
                    }
                }
            }
        }
    }
    Ok(report)
}
