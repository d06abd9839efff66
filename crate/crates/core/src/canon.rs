//! Canonical forms, isomorphism tests and enumeration of structures up to isomorphism.
//!
//! Structures carrying a named order are labelled by that order, which is
//! the unique isomorphism-invariant labelling. Unordered structures go through
//! colour refinement with individualisation, keeping the least encoding over
//! all branches.

use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::structure::{Element, PointedStructure, Signature, Structure, ORDER_NAMES};

/// Isomorphism-invariant encoding of a (pointed) structure. Keys are only
/// comparable between structures over the same signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u32>);

impl CanonicalKey {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Stable 16-hex-digit digest used when printing keys.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for w in &self.0 {
            h.update(w.to_le_bytes());
        }
        h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digest())
    }
}

const NO_CENTER: u32 = u32::MAX;

fn signature_tag(sig: &Signature) -> u32 {
    let mut h = Sha256::new();
    h.update(sig.to_string().as_bytes());
    h.update(sig.constants().join(",").as_bytes());
    let d = h.finalize();
    u32::from_le_bytes([d[0], d[1], d[2], d[3]])
}

/// Encodes `s` under the relabelling `label[old] = new`.
fn encode(s: &Structure, label: &[u32], center: Option<Element>) -> Vec<u32> {
    let mut out = vec![
        signature_tag(s.signature()),
        s.size() as u32,
        center.map_or(NO_CENTER, |c| label[c]),
    ];
    out.extend(s.constant_values().iter().map(|&c| label[c]));
    for (rel, sym) in s.signature().relations().iter().enumerate() {
        let mut tuples: Vec<Vec<u32>> = s
            .tuples(rel)
            .into_iter()
            .map(|t| t.iter().map(|&e| label[e]).collect())
            .collect();
        tuples.sort_unstable();
        out.push(sym.arity as u32);
        out.push(tuples.len() as u32);
        for t in tuples {
            out.extend(t);
        }
    }
    for (name, ord) in s.orders() {
        let code = ORDER_NAMES.iter().position(|n| n == name).unwrap_or(0) as u32;
        out.push(code);
        let mut seq = vec![0u32; s.size()];
        for (i, &e) in ord.sequence().iter().enumerate() {
            seq[label[e] as usize] = i as u32;
        }
        out.extend(seq);
    }
    out
}

struct Refiner<'a> {
    s: &'a Structure,
    tuples: Vec<(usize, Vec<Element>)>,
    incidence: Vec<Vec<(usize, usize)>>,
}

impl<'a> Refiner<'a> {
    fn new(s: &'a Structure) -> Self {
        let mut tuples = Vec::new();
        let mut incidence = vec![Vec::new(); s.size()];
        for rel in 0..s.signature().relations().len() {
            for t in s.tuples(rel) {
                let id = tuples.len();
                for (p, &e) in t.iter().enumerate() {
                    incidence[e].push((id, p));
                }
                tuples.push((rel, t));
            }
        }
        Refiner {
            s,
            tuples,
            incidence,
        }
    }

    fn initial(&self, center: Option<Element>) -> Vec<u32> {
        let sigs: Vec<(bool, Vec<usize>)> = (0..self.s.size())
            .map(|e| {
                let consts = self
                    .s
                    .constant_values()
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == e)
                    .map(|(i, _)| i)
                    .collect();
                (center != Some(e), consts)
            })
            .collect();
        rank(&sigs)
    }

    fn refine(&self, colors: &mut Vec<u32>) {
        let mut classes = count_classes(colors);
        loop {
            let sigs: Vec<(u32, Vec<(usize, usize, Vec<u32>)>)> = (0..self.s.size())
                .map(|e| {
                    let mut inc: Vec<(usize, usize, Vec<u32>)> = self.incidence[e]
                        .iter()
                        .map(|&(id, p)| {
                            let (rel, t) = &self.tuples[id];
                            (*rel, p, t.iter().map(|&x| colors[x]).collect())
                        })
                        .collect();
                    inc.sort_unstable();
                    (colors[e], inc)
                })
                .collect();
            *colors = rank(&sigs);
            let now = count_classes(colors);
            if now == classes {
                return;
            }
            classes = now;
        }
    }

    fn search(&self, mut colors: Vec<u32>, center: Option<Element>, best: &mut Option<(Vec<u32>, Vec<u32>)>) {
        self.refine(&mut colors);
        let n = colors.len();
        if count_classes(&colors) == n {
            let code = encode(self.s, &colors, center);
            if best.as_ref().is_none_or(|b| code < b.0) {
                *best = Some((code, colors));
            }
            return;
        }
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let target = (0..n).find(|&c| sizes[c] > 1).expect("non-discrete partition") as u32;
        for v in (0..n).filter(|&e| colors[e] == target) {
            let next: Vec<u32> = colors
                .iter()
                .enumerate()
                .map(|(e, &c)| 2 * c + u32::from(c == target && e != v))
                .collect();
            self.search(next, center, best);
        }
    }
}

fn count_classes(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Dense ranks of `items` by sorted order of distinct values.
fn rank<T: Ord>(items: &[T]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&a, &b| items[a].cmp(&items[b]));
    let mut out = vec![0u32; items.len()];
    let mut r = 0u32;
    for w in 0..idx.len() {
        if w > 0 && items[idx[w]] != items[idx[w - 1]] {
            r += 1;
        }
        out[idx[w]] = r;
    }
    out
}

/// Least code over all labellings together with a labelling achieving it.
fn canonical_labelling(s: &Structure, center: Option<Element>) -> (Vec<u32>, Vec<u32>) {
    if let Some(ord) = s.orders().values().next() {
        let label: Vec<u32> = (0..s.size()).map(|e| ord.rank(e) as u32).collect();
        return (encode(s, &label, center), label);
    }
    let r = Refiner::new(s);
    let mut best = None;
    r.search(r.initial(center), center, &mut best);
    best.expect("at least one leaf")
}

fn canonical_code(s: &Structure, center: Option<Element>) -> Vec<u32> {
    canonical_labelling(s, center).0
}

fn isomorphism_between(
    a: &Structure,
    ca: Option<Element>,
    b: &Structure,
    cb: Option<Element>,
) -> Option<Vec<Element>> {
    if a.signature() != b.signature() || a.size() != b.size() || !a.orders().keys().eq(b.orders().keys()) {
        return None;
    }
    let (code_a, label_a) = canonical_labelling(a, ca);
    let (code_b, label_b) = canonical_labelling(b, cb);
    if code_a != code_b {
        return None;
    }
    let mut by_label = vec![0; b.size()];
    for (e, &l) in label_b.iter().enumerate() {
        by_label[l as usize] = e;
    }
    Some(label_a.iter().map(|&l| by_label[l as usize]).collect())
}

/// An isomorphism `a -> b` (as the image of each element of `a`) mapping centre to centre.
pub fn pointed_isomorphism(a: &PointedStructure, b: &PointedStructure) -> Option<Vec<Element>> {
    isomorphism_between(&a.structure, Some(a.center), &b.structure, Some(b.center))
}

/// An isomorphism `a -> b` (as the image of each element of `a`).
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Option<Vec<Element>> {
    isomorphism_between(a, None, b, None)
}

/// Canonical key of a pointed structure.
pub fn canonical_key(p: &PointedStructure) -> CanonicalKey {
    CanonicalKey(canonical_code(&p.structure, Some(p.center)))
}

/// Canonical key of a structure without a distinguished element.
pub fn structure_key(s: &Structure) -> CanonicalKey {
    CanonicalKey(canonical_code(s, None))
}

/// Isomorphism test (signatures, constants and named orders included).
pub fn is_isomorphic(a: &Structure, b: &Structure) -> bool {
    a.signature() == b.signature()
        && a.size() == b.size()
        && a.orders().keys().eq(b.orders().keys())
        && structure_key(a) == structure_key(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("{atoms} atoms at size {size} is beyond the enumeration limit of {limit}")]
    TooManyAtoms {
        atoms: usize,
        size: usize,
        limit: usize,
    },
}

/// Upper bound on the number of ground atoms per size handled by [`enumerate_structures`].
pub const MAX_ENUMERATION_ATOMS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Code {
    consts: Vec<Element>,
    bits: u64,
}

/// One representative per isomorphism class of structures with sizes `1..=max_size`,
/// ordered by size and then by the least labelled code of the class.
#[derive(Debug, Clone)]
pub struct StructureCatalog {
    signature: Arc<Signature>,
    by_size: Vec<(usize, Vec<Code>)>,
}

fn atom_list(sig: &Signature, n: usize) -> Vec<(usize, Vec<Element>)> {
    let mut atoms = Vec::new();
    for (rel, sym) in sig.relations().iter().enumerate() {
        for t in (0..sym.arity).map(|_| 0..n).multi_cartesian_product() {
            atoms.push((rel, t));
        }
        if sym.arity == 0 {
            atoms.push((rel, Vec::new()));
        }
    }
    atoms
}

fn degree_of_code(atoms: &[(usize, Vec<Element>)], bits: u64, n: usize) -> usize {
    let mut adj = vec![0u64; n];
    for (i, (_, t)) in atoms.iter().enumerate() {
        if bits >> i & 1 == 1 {
            for &a in t {
                for &b in t {
                    if a != b {
                        adj[a] |= 1 << b;
                    }
                }
            }
        }
    }
    adj.iter().map(|w| w.count_ones() as usize).max().unwrap_or(0)
}

/// Enumerates structures over `signature` up to isomorphism, sizes `1..=max_size`,
/// keeping only those with Gaifman degree at most `degree_bound` (if given).
pub fn enumerate_structures(
    signature: impl Into<Arc<Signature>>,
    max_size: usize,
    degree_bound: Option<usize>,
) -> Result<StructureCatalog, EnumerationError> {
    let signature = signature.into();
    let mut by_size = Vec::new();
    for n in 1..=max_size {
        let atoms = atom_list(&signature, n);
        if atoms.len() > MAX_ENUMERATION_ATOMS {
            return Err(EnumerationError::TooManyAtoms {
                atoms: atoms.len(),
                size: n,
                limit: MAX_ENUMERATION_ATOMS,
            });
        }
        let index = |rel: usize, t: &[Element]| {
            atoms
                .iter()
                .position(|(r, u)| *r == rel && u.as_slice() == t)
                .expect("atom present")
        };
        let perms: Vec<Vec<Element>> = (0..n).permutations(n).skip(1).collect();
        let maps: Vec<Vec<u8>> = perms
            .iter()
            .map(|p| {
                atoms
                    .iter()
                    .map(|(rel, t)| {
                        let img: Vec<Element> = t.iter().map(|&e| p[e]).collect();
                        index(*rel, &img) as u8
                    })
                    .collect()
            })
            .collect();
        let nconst = signature.constants().len();
        let mut codes = Vec::new();
        for consts in (0..nconst).map(|_| 0..n).multi_cartesian_product() {
            for bits in 0..(1u64 << atoms.len()) {
                if let Some(d) = degree_bound {
                    if degree_of_code(&atoms, bits, n) > d {
                        continue;
                    }
                }
                let minimal = perms.iter().zip(&maps).all(|(p, map)| {
                    let pc: Vec<Element> = consts.iter().map(|&c| p[c]).collect();
                    match pc.cmp(&consts) {
                        std::cmp::Ordering::Less => false,
                        std::cmp::Ordering::Greater => true,
                        std::cmp::Ordering::Equal => {
                            let mut w = bits;
                            let mut img = 0u64;
                            while w != 0 {
                                let i = w.trailing_zeros() as usize;
                                w &= w - 1;
                                img |= 1 << map[i];
                            }
                            img >= bits
                        }
                    }
                });
                if minimal {
                    codes.push(Code {
                        consts: consts.clone(),
                        bits,
                    });
                }
            }
        }
        by_size.push((n, codes));
    }
    Ok(StructureCatalog { signature, by_size })
}

impl StructureCatalog {
    pub fn len(&self) -> usize {
        self.by_size.iter().map(|(_, c)| c.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn count_of_size(&self, n: usize) -> usize {
        self.by_size
            .iter()
            .find(|(m, _)| *m == n)
            .map_or(0, |(_, c)| c.len())
    }

    fn build(&self, n: usize, code: &Code) -> Structure {
        let atoms = atom_list(&self.signature, n);
        let mut s = Structure::new(self.signature.clone(), n).expect("positive size");
        for (i, (rel, t)) in atoms.iter().enumerate() {
            if code.bits >> i & 1 == 1 {
                s.insert_at(*rel, t).expect("in range");
            }
        }
        for (c, &v) in self.signature.constants().iter().zip(&code.consts) {
            s.set_constant(c, v).expect("in range");
        }
        s
    }

    /// Materialises the representatives one at a time.
    pub fn iter(&self) -> impl Iterator<Item = Structure> + '_ {
        self.by_size
            .iter()
            .flat_map(move |(n, codes)| codes.iter().map(move |c| self.build(*n, c)))
    }

    /// Representatives of one size.
    pub fn iter_size(&self, n: usize) -> impl Iterator<Item = Structure> + '_ {
        self.by_size
            .iter()
            .filter(move |(m, _)| *m == n)
            .flat_map(move |(m, codes)| codes.iter().map(move |c| self.build(*m, c)))
    }
}
