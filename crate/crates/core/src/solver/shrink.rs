//! Shrinking a model of a two-sided normal form.
//!
//! `W0` collects every realisation of a rare 1-type (at most `4M` of them,
//! `M` the number of forall-exists conjuncts) and, for every other 1-type,
//! its `M` least and `M` greatest realisations under each order. `W1` and
//! `W2` add witnesses for `W0` and `W0 + W1`. The substructure on `W` is then
//! repaired: each `W2` element missing a witness gets a fresh partner among
//! the extremal realisations of the witness's 1-type, and the pair is given
//! the vocabulary 2-type of the original element/witness pair. Order atoms
//! are never changed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{NormalForm, SolverError};
use crate::eval::{eval_quantifier_free, Evaluator};
use crate::formula::{Formula, Var};
use crate::structure::{render_vocab_type, AtomicType1, Element, Signature, Structure};

/// One repaired witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    /// Element of `W2` whose witness was missing (input numbering).
    pub element: Element,
    /// New witness chosen for it (input numbering).
    pub partner: Element,
    /// Original witness whose 2-type was copied (input numbering).
    pub source: Element,
    pub side: usize,
    pub conjunct: usize,
    pub old_type: Vec<bool>,
    pub new_type: Vec<bool>,
}

/// Record of a shrinking run; element numbers refer to the input model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShrinkTrace {
    pub w0: Vec<Element>,
    pub w1: Vec<Element>,
    pub w2: Vec<Element>,
    pub repairs: Vec<Repair>,
    /// `kept[i]` is the input element that became element `i` of the output.
    pub kept: Vec<Element>,
}

fn join(v: &[Element]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

impl ShrinkTrace {
    pub fn to_text(&self, signature: &Signature) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "W0: {}", join(&self.w0));
        let _ = writeln!(out, "W1: {}", join(&self.w1));
        let _ = writeln!(out, "W2: {}", join(&self.w2));
        for r in &self.repairs {
            let _ = writeln!(
                out,
                "repair {} {} {}.{} {} {}",
                r.element,
                r.partner,
                r.side,
                r.conjunct,
                render_vocab_type(signature, &r.old_type),
                render_vocab_type(signature, &r.new_type)
            );
        }
        out
    }
}

struct Gamma<'a> {
    side: usize,
    index: usize,
    matrix: &'a Formula,
    /// `table[a * n + b]` in the input model.
    table: Vec<bool>,
}

fn point(s: &Structure, m: &Formula, a: Element, b: Element) -> Result<bool, SolverError> {
    let values: BTreeMap<&str, Element> = [("x", a), ("y", b)].into_iter().collect();
    Ok(eval_quantifier_free(s, m, &values)?)
}

fn binary_relations(sig: &Signature) -> Vec<usize> {
    sig.relations()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.arity == 2)
        .map(|(i, _)| i)
        .collect()
}

/// Shrinks `model` (over the normal form's signature with `<0` and `<1`).
pub fn shrink_model(nf: &NormalForm, model: &Structure) -> Result<(Structure, ShrinkTrace), SolverError> {
    for o in ["<0", "<1"] {
        if model.order(o).is_none() {
            return Err(SolverError::NotAModel(format!("order `{o}` missing")));
        }
    }
    let a = model.reduct(nf.signature.clone())?;
    if let Some((i, universal, j)) = nf.first_violation(&a)? {
        let kind = if universal { "forall-forall" } else { "forall-exists" };
        return Err(SolverError::NotAModel(format!("{kind} conjunct {j} of side {i} fails")));
    }
    let n = a.size();
    let ords = [a.order("<0").unwrap().clone(), a.order("<1").unwrap().clone()];
    let gammas: Vec<Gamma> = (0..2)
        .flat_map(|i| nf.sides[i].existential.iter().enumerate().map(move |(j, m)| (i, j, m)))
        .map(|(side, index, matrix)| {
            let table = Evaluator::new(matrix).eval_pairs(&a, &[], &Var::x(), &Var::y())?;
            Ok(Gamma {
                side,
                index,
                matrix,
                table,
            })
        })
        .collect::<Result<_, SolverError>>()?;
    let m = gammas.len();

    let types: Vec<AtomicType1> = a.elements().map(|e| a.atomic_type1(e)).collect::<Result<_, _>>()?;
    let mut by_type: BTreeMap<&AtomicType1, Vec<Element>> = BTreeMap::new();
    for (e, t) in types.iter().enumerate() {
        by_type.entry(t).or_default().push(e);
    }
    let rare = |t: &AtomicType1| by_type[t].len() <= 4 * m;
    let extremal = |t: &AtomicType1, side: usize, lower: bool| -> Vec<Element> {
        let mut elems = by_type[t].clone();
        ords[side].sort(&mut elems);
        let picked: Vec<Element> = if lower {
            elems.iter().take(m).copied().collect()
        } else {
            elems.iter().rev().take(m).copied().collect()
        };
        let mut picked = picked;
        picked.sort_unstable();
        picked
    };

    let mut w0: BTreeSet<Element> = BTreeSet::new();
    for (t, elems) in &by_type {
        if rare(t) {
            w0.extend(elems);
        } else {
            for side in 0..2 {
                w0.extend(extremal(t, side, true));
                w0.extend(extremal(t, side, false));
            }
        }
    }
    if w0.is_empty() {
        w0.insert(ords[0].first().expect("non-empty model"));
    }

    let witnesses_of = |g: &Gamma, e: Element| -> Vec<Element> { (0..n).filter(|&b| g.table[e * n + b]).collect() };
    let close = |base: &BTreeSet<Element>| -> BTreeSet<Element> {
        let mut added = BTreeSet::new();
        for &e in base {
            for g in &gammas {
                let ws = witnesses_of(g, e);
                if ws.iter().any(|w| base.contains(w) || added.contains(w)) {
                    continue;
                }
                added.insert(ws[0]);
            }
        }
        added
    };
    let w1 = close(&w0);
    let w01: BTreeSet<Element> = w0.union(&w1).copied().collect();
    let w2 = close(&w01);
    let kept: Vec<Element> = w01.union(&w2).copied().collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &e) in kept.iter().enumerate() {
        pos[e] = i;
    }
    let mut b = a.induced(&kept);
    let binaries = binary_relations(&nf.signature);

    let chi_ok = |s: &Structure, p: Element, q: Element| -> Result<bool, SolverError> {
        for side in &nf.sides {
            for u in &side.universal {
                if !point(s, u, p, q)? || !point(s, u, q, p)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    let has_all_witnesses = |s: &Structure, p: Element| -> Result<bool, SolverError> {
        for g in &gammas {
            let mut found = false;
            for q in 0..s.size() {
                if point(s, g.matrix, p, q)? {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut repairs = Vec::new();
    for &e in &w2 {
        let pe = pos[e];
        let mut reserved: BTreeSet<Element> = BTreeSet::new();
        let mut missing = Vec::new();
        for (gi, g) in gammas.iter().enumerate() {
            let mut wit = None;
            for q in 0..b.size() {
                if point(&b, g.matrix, pe, q)? {
                    wit = Some(q);
                    break;
                }
            }
            match wit {
                Some(q) => {
                    reserved.insert(q);
                }
                None => missing.push(gi),
            }
        }
        for gi in missing {
            let g = &gammas[gi];
            let mut done = None;
            'sources: for src in witnesses_of(g, e) {
                let alpha = &types[src];
                let lower = ords[g.side].less(src, e);
                let mut candidates: Vec<Element> = if rare(alpha) {
                    by_type[alpha].clone()
                } else {
                    extremal(alpha, g.side, lower)
                };
                let extra: Vec<Element> = by_type[alpha]
                    .iter()
                    .copied()
                    .filter(|c| pos[*c] != usize::MAX && !candidates.contains(c))
                    .collect();
                candidates.retain(|c| pos[*c] != usize::MAX);
                candidates.extend(extra);
                for c in candidates {
                    let pc = pos[c];
                    if pc == pe || reserved.contains(&pc) {
                        continue;
                    }
                    let old_type = b.vocab_type2(pe, pc)?;
                    let saved: Vec<(usize, bool, bool)> = binaries
                        .iter()
                        .map(|&r| (r, b.contains(r, &[pe, pc]), b.contains(r, &[pc, pe])))
                        .collect();
                    for &r in &binaries {
                        set(&mut b, r, pe, pc, a.contains(r, &[e, src]))?;
                        set(&mut b, r, pc, pe, a.contains(r, &[src, e]))?;
                    }
                    if point(&b, g.matrix, pe, pc)? && chi_ok(&b, pe, pc)? && has_all_witnesses(&b, pc)? {
                        reserved.insert(pc);
                        done = Some(Repair {
                            element: e,
                            partner: c,
                            source: src,
                            side: g.side,
                            conjunct: g.index,
                            old_type,
                            new_type: b.vocab_type2(pe, pc)?,
                        });
                        break 'sources;
                    }
                    for (r, fwd, bwd) in saved {
                        set(&mut b, r, pe, pc, fwd)?;
                        set(&mut b, r, pc, pe, bwd)?;
                    }
                }
            }
            match done {
                Some(r) => repairs.push(r),
                None => {
                    return Err(SolverError::RepairFailed {
                        element: e,
                        side: g.side,
                        conjunct: g.index,
                    })
                }
            }
        }
    }
    if let Some((i, universal, j)) = nf.first_violation(&b)? {
        let kind = if universal { "forall-forall" } else { "forall-exists" };
        return Err(SolverError::Internal(format!(
            "shrunk structure violates {kind} conjunct {j} of side {i}"
        )));
    }
    let trace = ShrinkTrace {
        w0: w0.into_iter().collect(),
        w1: w1.into_iter().collect(),
        w2: w2.into_iter().collect(),
        repairs,
        kept,
    };
    Ok((b, trace))
}

fn set(s: &mut Structure, rel: usize, p: Element, q: Element, value: bool) -> Result<(), SolverError> {
    if value {
        s.insert_at(rel, &[p, q])?;
    } else {
        s.remove_at(rel, &[p, q])?;
    }
    Ok(())
}
