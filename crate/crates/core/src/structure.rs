//! Finite relational structures over a dense domain `0..n`.
//!
//! A structure interprets every relation and constant symbol of its
//! [`Signature`] and may additionally carry named linear orders (`<`, `<0`,
//! `<1`). Orders never take part in the Gaifman graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Domain elements are dense indices `0..n`.
pub type Element = usize;

/// The reserved names of order symbols.
pub const ORDER_NAMES: [&str; 3] = ["<", "<0", "<1"];

/// True if `name` is one of the reserved order symbols.
pub fn is_order_name(name: &str) -> bool {
    ORDER_NAMES.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),
    #[error("unknown constant symbol `{0}`")]
    UnknownConstant(String),
    #[error("symbol `{name}` declared with arity {declared} but used with arity {used}")]
    ArityMismatch {
        name: String,
        declared: usize,
        used: usize,
    },
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("`{0}` is reserved for linear orders")]
    ReservedName(String),
    #[error("relation `{0}` must have positive arity")]
    ZeroArity(String),
    #[error("element {element} out of range for domain of size {size}")]
    OutOfRange { element: Element, size: usize },
    #[error("domain must be non-empty")]
    EmptyDomain,
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("relation `{0}` is not a strict linear order")]
    NotALinearOrder(String),
    #[error("order `{0}` declared twice")]
    DuplicateOrder(String),
    #[error("signatures differ")]
    SignatureMismatch,
    #[error("relation `{0}` has arity above 2")]
    ArityTooLarge(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A relation symbol with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelSymbol {
    pub name: String,
    pub arity: usize,
}

/// Relation and constant symbols, both kept sorted by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: Vec<RelSymbol>,
    constants: Vec<String>,
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder form of [`Signature::add_relation`]; panics on invalid input.
    pub fn with_relation(mut self, name: &str, arity: usize) -> Self {
        self.add_relation(name, arity).expect("valid relation symbol");
        self
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), StructureError> {
        if is_order_name(name) {
            return Err(StructureError::ReservedName(name.to_string()));
        }
        if arity == 0 {
            return Err(StructureError::ZeroArity(name.to_string()));
        }
        if !valid_identifier(name) {
            return Err(StructureError::Parse {
                line: 0,
                message: format!("invalid symbol name `{name}`"),
            });
        }
        if self.has_symbol(name) {
            return Err(StructureError::DuplicateSymbol(name.to_string()));
        }
        let sym = RelSymbol {
            name: name.to_string(),
            arity,
        };
        let pos = self
            .relations
            .binary_search_by(|r| r.name.as_str().cmp(name))
            .unwrap_err();
        self.relations.insert(pos, sym);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), StructureError> {
        if is_order_name(name) {
            return Err(StructureError::ReservedName(name.to_string()));
        }
        if self.has_symbol(name) {
            return Err(StructureError::DuplicateSymbol(name.to_string()));
        }
        let pos = self
            .constants
            .binary_search_by(|c| c.as_str().cmp(name))
            .unwrap_err();
        self.constants.insert(pos, name.to_string());
        Ok(())
    }

    fn has_symbol(&self, name: &str) -> bool {
        self.relation_index(name).is_some() || self.constant_index(name).is_some()
    }

    pub fn relations(&self) -> &[RelSymbol] {
        &self.relations
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations
            .binary_search_by(|r| r.name.as_str().cmp(name))
            .ok()
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants
            .binary_search_by(|c| c.as_str().cmp(name))
            .ok()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relation_index(name).map(|i| self.relations[i].arity)
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(0)
    }

    /// Union of two signatures; fails on conflicting arities.
    pub fn union(&self, other: &Signature) -> Result<Signature, StructureError> {
        let mut out = self.clone();
        for r in &other.relations {
            match out.arity(&r.name) {
                Some(a) if a == r.arity => {}
                Some(a) => {
                    return Err(StructureError::ArityMismatch {
                        name: r.name.clone(),
                        declared: a,
                        used: r.arity,
                    })
                }
                None => out.add_relation(&r.name, r.arity)?,
            }
        }
        for c in &other.constants {
            if out.constant_index(c).is_none() {
                out.add_constant(c)?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .relations
            .iter()
            .map(|r| format!("{}/{}", r.name, r.arity))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A strict linear order on `0..n`, stored as its increasing enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearOrder {
    seq: Vec<Element>,
    rank: Vec<usize>,
}

impl LinearOrder {
    pub fn identity(n: usize) -> Self {
        LinearOrder {
            seq: (0..n).collect(),
            rank: (0..n).collect(),
        }
    }

    /// Builds the order whose increasing enumeration is `seq`.
    pub fn from_sequence(seq: Vec<Element>) -> Result<Self, StructureError> {
        let n = seq.len();
        let mut rank = vec![usize::MAX; n];
        for (i, &e) in seq.iter().enumerate() {
            if e >= n || rank[e] != usize::MAX {
                return Err(StructureError::NotAPermutation(n));
            }
            rank[e] = i;
        }
        Ok(LinearOrder { seq, rank })
    }

    /// Builds an order from element ranks (`ranks[e]` is the position of `e`).
    pub fn from_ranks(ranks: &[usize]) -> Result<Self, StructureError> {
        let n = ranks.len();
        let mut seq = vec![usize::MAX; n];
        for (e, &r) in ranks.iter().enumerate() {
            if r >= n || seq[r] != usize::MAX {
                return Err(StructureError::NotAPermutation(n));
            }
            seq[r] = e;
        }
        Ok(LinearOrder {
            seq,
            rank: ranks.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn less(&self, a: Element, b: Element) -> bool {
        self.rank[a] < self.rank[b]
    }

    pub fn rank(&self, a: Element) -> usize {
        self.rank[a]
    }

    pub fn sequence(&self) -> &[Element] {
        &self.seq
    }

    pub fn reversed(&self) -> Self {
        let seq: Vec<Element> = self.seq.iter().rev().copied().collect();
        LinearOrder::from_sequence(seq).expect("reversal of a permutation")
    }

    pub fn first(&self) -> Option<Element> {
        self.seq.first().copied()
    }

    pub fn last(&self) -> Option<Element> {
        self.seq.last().copied()
    }

    /// Sorts `elements` increasingly with respect to this order.
    pub fn sort(&self, elements: &mut [Element]) {
        elements.sort_by_key(|&e| self.rank[e]);
    }

    /// The order induced on `elements`, relabelled so that `elements[i]` becomes `i`.
    pub fn induced(&self, elements: &[Element]) -> LinearOrder {
        let mut idx: Vec<usize> = (0..elements.len()).collect();
        idx.sort_by_key(|&i| self.rank[elements[i]]);
        LinearOrder::from_sequence(idx).expect("induced order")
    }
}

impl fmt::Display for LinearOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.seq.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Table {
    /// Bitset over all `n^arity` tuples (used for arity at most 2).
    Dense(Vec<u64>),
    Sparse(BTreeSet<Vec<Element>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Relation {
    arity: usize,
    table: Table,
}

impl Relation {
    fn new(arity: usize, n: usize) -> Self {
        let table = if arity <= 2 {
            Table::Dense(vec![0; n.pow(arity as u32).div_ceil(64)])
        } else {
            Table::Sparse(BTreeSet::new())
        };
        Relation { arity, table }
    }
}

/// A finite structure with domain `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    signature: Arc<Signature>,
    size: usize,
    relations: Vec<Relation>,
    constants: Vec<Element>,
    orders: BTreeMap<String, LinearOrder>,
}

impl Structure {
    /// An empty interpretation of `signature` over `0..size`; constants start at 0.
    pub fn new(signature: impl Into<Arc<Signature>>, size: usize) -> Result<Self, StructureError> {
        if size == 0 {
            return Err(StructureError::EmptyDomain);
        }
        let signature = signature.into();
        let relations = signature
            .relations()
            .iter()
            .map(|r| Relation::new(r.arity, size))
            .collect();
        let constants = vec![0; signature.constants().len()];
        Ok(Structure {
            signature,
            size,
            relations,
            constants,
            orders: BTreeMap::new(),
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn signature_arc(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.size
    }

    fn dense_index(&self, tuple: &[Element]) -> usize {
        tuple.iter().fold(0, |acc, &e| acc * self.size + e)
    }

    fn check_tuple(&self, rel: usize, tuple: &[Element]) -> Result<(), StructureError> {
        let sym = &self.signature.relations()[rel];
        if sym.arity != tuple.len() {
            return Err(StructureError::ArityMismatch {
                name: sym.name.clone(),
                declared: sym.arity,
                used: tuple.len(),
            });
        }
        if let Some(&e) = tuple.iter().find(|&&e| e >= self.size) {
            return Err(StructureError::OutOfRange {
                element: e,
                size: self.size,
            });
        }
        Ok(())
    }

    fn rel_index(&self, name: &str) -> Result<usize, StructureError> {
        self.signature
            .relation_index(name)
            .ok_or_else(|| StructureError::UnknownRelation(name.to_string()))
    }

    /// Adds a tuple to relation `name`. Returns whether it was new.
    pub fn insert(&mut self, name: &str, tuple: &[Element]) -> Result<bool, StructureError> {
        let rel = self.rel_index(name)?;
        self.insert_at(rel, tuple)
    }

    pub fn insert_at(&mut self, rel: usize, tuple: &[Element]) -> Result<bool, StructureError> {
        self.check_tuple(rel, tuple)?;
        Ok(self.set_at(rel, tuple, true))
    }

    pub fn remove_at(&mut self, rel: usize, tuple: &[Element]) -> Result<bool, StructureError> {
        self.check_tuple(rel, tuple)?;
        Ok(self.set_at(rel, tuple, false))
    }

    /// Sets membership of an already validated tuple; returns whether it changed.
    fn set_at(&mut self, rel: usize, tuple: &[Element], value: bool) -> bool {
        let idx = self.dense_index(tuple);
        match &mut self.relations[rel].table {
            Table::Dense(bits) => {
                let (w, b) = (idx / 64, idx % 64);
                let old = bits[w] >> b & 1 == 1;
                if value {
                    bits[w] |= 1 << b;
                } else {
                    bits[w] &= !(1 << b);
                }
                old != value
            }
            Table::Sparse(set) => {
                if value {
                    set.insert(tuple.to_vec())
                } else {
                    set.remove(tuple)
                }
            }
        }
    }

    /// Membership test by relation index; the tuple must have the right arity and be in range.
    pub fn contains(&self, rel: usize, tuple: &[Element]) -> bool {
        match &self.relations[rel].table {
            Table::Dense(bits) => {
                let idx = self.dense_index(tuple);
                bits[idx / 64] >> (idx % 64) & 1 == 1
            }
            Table::Sparse(set) => set.contains(tuple),
        }
    }

    /// Membership test by name.
    pub fn holds(&self, name: &str, tuple: &[Element]) -> Result<bool, StructureError> {
        let rel = self.rel_index(name)?;
        self.check_tuple(rel, tuple)?;
        Ok(self.contains(rel, tuple))
    }

    /// All tuples of relation `rel` in lexicographic order.
    pub fn tuples(&self, rel: usize) -> Vec<Vec<Element>> {
        let arity = self.relations[rel].arity;
        match &self.relations[rel].table {
            Table::Dense(bits) => {
                let mut out = Vec::new();
                for (w, &word) in bits.iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let b = word.trailing_zeros() as usize;
                        word &= word - 1;
                        let mut idx = w * 64 + b;
                        let mut t = vec![0; arity];
                        for slot in t.iter_mut().rev() {
                            *slot = idx % self.size;
                            idx /= self.size;
                        }
                        out.push(t);
                    }
                }
                out
            }
            Table::Sparse(set) => set.iter().cloned().collect(),
        }
    }

    pub fn tuple_count(&self, rel: usize) -> usize {
        match &self.relations[rel].table {
            Table::Dense(bits) => bits.iter().map(|w| w.count_ones() as usize).sum(),
            Table::Sparse(set) => set.len(),
        }
    }

    pub fn set_constant(&mut self, name: &str, e: Element) -> Result<(), StructureError> {
        let idx = self
            .signature
            .constant_index(name)
            .ok_or_else(|| StructureError::UnknownConstant(name.to_string()))?;
        if e >= self.size {
            return Err(StructureError::OutOfRange {
                element: e,
                size: self.size,
            });
        }
        self.constants[idx] = e;
        Ok(())
    }

    pub fn constant(&self, name: &str) -> Option<Element> {
        self.signature
            .constant_index(name)
            .map(|i| self.constants[i])
    }

    pub fn constant_values(&self) -> &[Element] {
        &self.constants
    }

    /// Installs (or replaces) a named order.
    pub fn set_order(&mut self, name: &str, order: LinearOrder) -> Result<(), StructureError> {
        if !is_order_name(name) {
            return Err(StructureError::Parse {
                line: 0,
                message: format!("`{name}` is not an order symbol"),
            });
        }
        if order.len() != self.size {
            return Err(StructureError::NotAPermutation(self.size));
        }
        self.orders.insert(name.to_string(), order);
        Ok(())
    }

    pub fn with_order(mut self, name: &str, order: LinearOrder) -> Result<Self, StructureError> {
        self.set_order(name, order)?;
        Ok(self)
    }

    pub fn order(&self, name: &str) -> Option<&LinearOrder> {
        self.orders.get(name)
    }

    pub fn orders(&self) -> &BTreeMap<String, LinearOrder> {
        &self.orders
    }

    pub fn remove_order(&mut self, name: &str) -> Option<LinearOrder> {
        self.orders.remove(name)
    }

    /// The same structure with all orders dropped.
    pub fn without_orders(&self) -> Structure {
        let mut s = self.clone();
        s.orders.clear();
        s
    }

    /// Substructure induced on `elements` (which must be distinct);
    /// `elements[i]` becomes element `i`. Constants are kept only when they
    /// land inside the selection, otherwise they are dropped from the signature.
    pub fn induced(&self, elements: &[Element]) -> Structure {
        let mut pos = vec![usize::MAX; self.size];
        for (i, &e) in elements.iter().enumerate() {
            pos[e] = i;
        }
        let mut sig = Signature::new();
        for r in self.signature.relations() {
            sig.add_relation(&r.name, r.arity).expect("copied symbol");
        }
        let kept: Vec<(String, Element)> = self
            .signature
            .constants()
            .iter()
            .zip(&self.constants)
            .filter(|(_, &v)| pos[v] != usize::MAX)
            .map(|(c, &v)| (c.clone(), pos[v]))
            .collect();
        for (c, _) in &kept {
            sig.add_constant(c).expect("copied constant");
        }
        let sig = if kept.len() == self.constants.len() {
            self.signature.clone()
        } else {
            Arc::new(sig)
        };
        let mut out = Structure::new(sig, elements.len().max(1)).expect("non-empty selection");
        for rel in 0..self.relations.len() {
            for t in self.tuples(rel) {
                if t.iter().all(|&e| pos[e] != usize::MAX) {
                    let mapped: Vec<Element> = t.iter().map(|&e| pos[e]).collect();
                    out.set_at(rel, &mapped, true);
                }
            }
        }
        for (c, v) in kept {
            out.set_constant(&c, v).expect("kept constant");
        }
        for (name, ord) in &self.orders {
            out.orders.insert(name.clone(), ord.induced(elements));
        }
        out
    }

    /// Renames element `e` to `perm[e]`.
    pub fn relabel(&self, perm: &[Element]) -> Result<Structure, StructureError> {
        LinearOrder::from_sequence(perm.to_vec())?;
        let mut out = Structure::new(self.signature.clone(), self.size)?;
        for rel in 0..self.relations.len() {
            for t in self.tuples(rel) {
                let mapped: Vec<Element> = t.iter().map(|&e| perm[e]).collect();
                out.set_at(rel, &mapped, true);
            }
        }
        out.constants = self.constants.iter().map(|&c| perm[c]).collect();
        for (name, ord) in &self.orders {
            let seq = ord.sequence().iter().map(|&e| perm[e]).collect();
            out.orders
                .insert(name.clone(), LinearOrder::from_sequence(seq)?);
        }
        Ok(out)
    }

    /// Reinterprets this structure over `signature`, which must contain every
    /// symbol used here with the same arity; new relations start empty.
    pub fn expand(&self, signature: impl Into<Arc<Signature>>) -> Result<Structure, StructureError> {
        let signature = signature.into();
        let mut out = Structure::new(signature.clone(), self.size)?;
        for (rel, sym) in self.signature.relations().iter().enumerate() {
            let target = signature
                .relation_index(&sym.name)
                .ok_or_else(|| StructureError::UnknownRelation(sym.name.clone()))?;
            if signature.relations()[target].arity != sym.arity {
                return Err(StructureError::ArityMismatch {
                    name: sym.name.clone(),
                    declared: signature.relations()[target].arity,
                    used: sym.arity,
                });
            }
            for t in self.tuples(rel) {
                out.set_at(target, &t, true);
            }
        }
        for (c, &v) in self.signature.constants().iter().zip(&self.constants) {
            out.set_constant(c, v)?;
        }
        out.orders = self.orders.clone();
        Ok(out)
    }

    /// Restricts to the relation symbols of `signature` (a sub-signature).
    pub fn reduct(&self, signature: impl Into<Arc<Signature>>) -> Result<Structure, StructureError> {
        let signature = signature.into();
        let mut out = Structure::new(signature.clone(), self.size)?;
        for (target, sym) in signature.relations().iter().enumerate() {
            let rel = self.rel_index(&sym.name)?;
            if self.signature.relations()[rel].arity != sym.arity {
                return Err(StructureError::ArityMismatch {
                    name: sym.name.clone(),
                    declared: self.signature.relations()[rel].arity,
                    used: sym.arity,
                });
            }
            for t in self.tuples(rel) {
                out.set_at(target, &t, true);
            }
        }
        for c in signature.constants() {
            let v = self
                .constant(c)
                .ok_or_else(|| StructureError::UnknownConstant(c.clone()))?;
            out.set_constant(c, v)?;
        }
        out.orders = self.orders.clone();
        Ok(out)
    }

    /// The Gaifman graph: distinct elements are adjacent iff they occur together
    /// in some tuple of a vocabulary relation (orders excluded).
    pub fn gaifman(&self) -> GaifmanGraph {
        let mut adj: Vec<BTreeSet<Element>> = vec![BTreeSet::new(); self.size];
        for rel in 0..self.relations.len() {
            for t in self.tuples(rel) {
                for &a in &t {
                    for &b in &t {
                        if a != b {
                            adj[a].insert(b);
                        }
                    }
                }
            }
        }
        GaifmanGraph {
            adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    /// Gaifman distance; `None` means the elements are in different components.
    pub fn distance(&self, a: Element, b: Element) -> Result<Option<usize>, StructureError> {
        for e in [a, b] {
            if e >= self.size {
                return Err(StructureError::OutOfRange {
                    element: e,
                    size: self.size,
                });
            }
        }
        Ok(self.gaifman().distance(a, b))
    }

    /// Maximum Gaifman degree.
    pub fn degree(&self) -> usize {
        self.gaifman().max_degree()
    }
}

/// Undirected simple graph given by sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaifmanGraph {
    adj: Vec<Vec<Element>>,
}

impl GaifmanGraph {
    pub fn from_adjacency(adj: Vec<Vec<Element>>) -> Self {
        GaifmanGraph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, a: Element) -> &[Element] {
        &self.adj[a]
    }

    pub fn adjacent(&self, a: Element, b: Element) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn degree_of(&self, a: Element) -> usize {
        self.adj[a].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Distances from the source set, `usize::MAX` for unreachable elements;
    /// exploration stops beyond `limit`.
    pub fn bfs(&self, sources: &[Element], limit: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(a) = queue.pop_front() {
            if dist[a] >= limit {
                continue;
            }
            for &b in &self.adj[a] {
                if dist[b] == usize::MAX {
                    dist[b] = dist[a] + 1;
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    pub fn distance(&self, a: Element, b: Element) -> Option<usize> {
        let d = self.bfs(&[a], usize::MAX)[b];
        (d != usize::MAX).then_some(d)
    }

    /// Elements at distance at most `radius` from `center`, in increasing index order.
    pub fn ball(&self, center: Element, radius: usize) -> Vec<Element> {
        self.ball_of_set(&[center], radius)
    }

    /// Elements at distance at most `radius` from some element of `sources`.
    pub fn ball_of_set(&self, sources: &[Element], radius: usize) -> Vec<Element> {
        let dist = self.bfs(sources, radius);
        (0..self.adj.len()).filter(|&e| dist[e] <= radius).collect()
    }

    /// Elements adjacent to the set but not in it.
    pub fn boundary(&self, set: &BTreeSet<Element>) -> BTreeSet<Element> {
        set.iter()
            .flat_map(|&a| self.adj[a].iter().copied())
            .filter(|b| !set.contains(b))
            .collect()
    }

    /// Connected components, each sorted, ordered by least element.
    pub fn components(&self) -> Vec<Vec<Element>> {
        let mut seen = vec![false; self.adj.len()];
        let mut out = Vec::new();
        for s in 0..self.adj.len() {
            if seen[s] {
                continue;
            }
            let comp = self.ball(s, usize::MAX);
            for &e in &comp {
                seen[e] = true;
            }
            out.push(comp);
        }
        out
    }
}

/// A structure with a distinguished element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedStructure {
    pub structure: Structure,
    pub center: Element,
}

/// Whether an order relates the first element of a pair below, above, or equal to the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrderAtom {
    Less,
    Equal,
    Greater,
}

/// Atomic 1-type of an element: truth of `R(x)` for unary symbols and `R(x,x)` for binary ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicType1 {
    pub bits: Vec<bool>,
}

/// Atomic 2-type of a pair, split into the vocabulary part and one atom per named order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicType2 {
    /// For each unary `R`: `R(x)`, `R(y)`; for each binary `R`: `R(x,x)`, `R(x,y)`, `R(y,x)`, `R(y,y)`; then `x = y`.
    pub vocab: Vec<bool>,
    pub orders: Vec<(String, OrderAtom)>,
}

fn require_small_arity(sig: &Signature) -> Result<(), StructureError> {
    match sig.relations().iter().find(|r| r.arity > 2) {
        Some(r) => Err(StructureError::ArityTooLarge(r.name.clone())),
        None => Ok(()),
    }
}

impl Structure {
    pub fn atomic_type1(&self, a: Element) -> Result<AtomicType1, StructureError> {
        require_small_arity(&self.signature)?;
        let bits = self
            .signature
            .relations()
            .iter()
            .enumerate()
            .map(|(rel, r)| match r.arity {
                1 => self.contains(rel, &[a]),
                _ => self.contains(rel, &[a, a]),
            })
            .collect();
        Ok(AtomicType1 { bits })
    }

    /// Vocabulary part of the 2-type of `(a, b)`.
    pub fn vocab_type2(&self, a: Element, b: Element) -> Result<Vec<bool>, StructureError> {
        require_small_arity(&self.signature)?;
        let mut bits = Vec::new();
        for (rel, r) in self.signature.relations().iter().enumerate() {
            if r.arity == 1 {
                bits.push(self.contains(rel, &[a]));
                bits.push(self.contains(rel, &[b]));
            } else {
                bits.push(self.contains(rel, &[a, a]));
                bits.push(self.contains(rel, &[a, b]));
                bits.push(self.contains(rel, &[b, a]));
                bits.push(self.contains(rel, &[b, b]));
            }
        }
        bits.push(a == b);
        Ok(bits)
    }

    /// 1-types of both elements and the 2-type of the pair.
    pub fn atomic_types(
        &self,
        a: Element,
        b: Element,
    ) -> Result<(AtomicType1, AtomicType1, AtomicType2), StructureError> {
        for e in [a, b] {
            if e >= self.size {
                return Err(StructureError::OutOfRange {
                    element: e,
                    size: self.size,
                });
            }
        }
        let orders = self
            .orders
            .iter()
            .map(|(name, ord)| {
                let atom = match ord.rank(a).cmp(&ord.rank(b)) {
                    std::cmp::Ordering::Less => OrderAtom::Less,
                    std::cmp::Ordering::Equal => OrderAtom::Equal,
                    std::cmp::Ordering::Greater => OrderAtom::Greater,
                };
                (name.clone(), atom)
            })
            .collect();
        Ok((
            self.atomic_type1(a)?,
            self.atomic_type1(b)?,
            AtomicType2 {
                vocab: self.vocab_type2(a, b)?,
                orders,
            },
        ))
    }
}

impl AtomicType1 {
    /// Readable literal list such as `P(x)&!E(x,x)`.
    pub fn render(&self, sig: &Signature) -> String {
        let lits: Vec<String> = sig
            .relations()
            .iter()
            .zip(&self.bits)
            .map(|(r, &v)| {
                let atom = if r.arity == 1 {
                    format!("{}(x)", r.name)
                } else {
                    format!("{}(x,x)", r.name)
                };
                if v {
                    atom
                } else {
                    format!("!{atom}")
                }
            })
            .collect();
        if lits.is_empty() {
            "true".to_string()
        } else {
            lits.join("&")
        }
    }
}

/// Literal names of the vocabulary part of a 2-type, in bit order.
pub fn vocab_literal_names(sig: &Signature) -> Vec<String> {
    let mut out = Vec::new();
    for r in sig.relations() {
        if r.arity == 1 {
            out.push(format!("{}(x)", r.name));
            out.push(format!("{}(y)", r.name));
        } else {
            for (u, v) in [("x", "x"), ("x", "y"), ("y", "x"), ("y", "y")] {
                out.push(format!("{}({u},{v})", r.name));
            }
        }
    }
    out.push("x=y".to_string());
    out
}

/// Renders a vocabulary 2-type as a `&`-joined literal list without spaces.
pub fn render_vocab_type(sig: &Signature, bits: &[bool]) -> String {
    vocab_literal_names(sig)
        .iter()
        .zip(bits)
        .map(|(name, &v)| if v { name.clone() } else { format!("!{name}") })
        .collect::<Vec<_>>()
        .join("&")
}

impl AtomicType2 {
    /// The vocabulary part with `x` and `y` exchanged.
    pub fn swapped_vocab(&self, sig: &Signature) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.vocab.len());
        let mut i = 0;
        for r in sig.relations() {
            if r.arity == 1 {
                out.push(self.vocab[i + 1]);
                out.push(self.vocab[i]);
                i += 2;
            } else {
                out.push(self.vocab[i + 3]);
                out.push(self.vocab[i + 2]);
                out.push(self.vocab[i + 1]);
                out.push(self.vocab[i]);
                i += 4;
            }
        }
        out.push(self.vocab[i]);
        out
    }

    /// Whether the `x`-half of the vocabulary part agrees with `t` and, if the
    /// type says `x = y`, every `y` literal mirrors the corresponding `x` literal.
    pub fn agrees_with_diagonal(&self, sig: &Signature, t: &AtomicType1) -> bool {
        let mut i = 0;
        let eq = *self.vocab.last().unwrap_or(&false);
        for (r, &bit) in sig.relations().iter().zip(&t.bits) {
            let ok = if r.arity == 1 {
                self.vocab[i] == bit && (!eq || self.vocab[i + 1] == bit)
            } else {
                self.vocab[i] == bit
                    && (!eq || self.vocab[i + 1..i + 4].iter().all(|&v| v == bit))
            };
            if !ok {
                return false;
            }
            i += if r.arity == 1 { 2 } else { 4 };
        }
        true
    }
}
