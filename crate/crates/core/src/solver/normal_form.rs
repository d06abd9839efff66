//! Two-sided Scott normal form.
//!
//! For a sentence `phi` over `sigma + {<}` the normal form has two sides:
//! side 0 is equisatisfiable with `phi[< := <0]`, side 1 with
//! `!phi[< := <1]`. Each side is a conjunction of `forall x forall y chi`
//! and `forall x exists y gamma` with quantifier-free matrices over `x`, `y`.
//! Every quantified subformula is replaced by a fresh unary predicate whose
//! defining implication follows the polarity of its occurrence.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::One;

use super::SolverError;
use crate::eval::Evaluator;
use crate::formula::{Formula, Var};
use crate::parser::{parse_formula, token_count, Fragment};
use crate::structure::{is_order_name, Signature, Structure};

/// One side: universal matrices (`forall x forall y`) and existential ones (`forall x exists y`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Side {
    pub universal: Vec<Formula>,
    pub existential: Vec<Formula>,
}

/// A fresh predicate `name(var)` standing for `subformula`, whose only free variable is `var`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreshDef {
    pub name: String,
    pub side: usize,
    pub var: Var,
    pub subformula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub sides: [Side; 2],
    /// Vocabulary of the input formula (no orders).
    pub base: Signature,
    /// Base vocabulary plus all fresh predicates.
    pub signature: Signature,
    pub fresh: Vec<FreshDef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Polarity {
    Pos,
    Neg,
    Both,
}

impl Polarity {
    fn flip(self) -> Self {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
            Polarity::Both => Polarity::Both,
        }
    }

    fn of(positive: bool) -> Self {
        if positive {
            Polarity::Pos
        } else {
            Polarity::Neg
        }
    }
}

struct Builder<'a> {
    used: &'a mut BTreeSet<String>,
    counter: &'a mut usize,
    side_index: usize,
    side: Side,
    fresh: Vec<FreshDef>,
}

impl Builder<'_> {
    fn fresh_name(&mut self) -> String {
        loop {
            *self.counter += 1;
            let name = format!("A{}", self.counter);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    /// Adds `forall w Q v m` with `w` outer and `v` inner, renamed so that the outer variable is `x`.
    fn emit(&mut self, universal: bool, outer: &Var, m: Formula) {
        let m = if outer.name() == "y" { m.swap_xy() } else { m };
        if universal {
            self.side.universal.push(m);
        } else {
            self.side.existential.push(m);
        }
    }

    /// Replaces every quantified subformula by a fresh atom, recording definitions.
    fn rename(&mut self, f: &Formula, pol: Polarity) -> Formula {
        match f {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => f.clone(),
            Formula::Not(a) => Formula::not(self.rename(a, pol.flip())),
            Formula::And(a, b) => Formula::and(self.rename(a, pol), self.rename(b, pol)),
            Formula::Or(a, b) => Formula::or(self.rename(a, pol), self.rename(b, pol)),
            Formula::Implies(a, b) => Formula::implies(self.rename(a, pol.flip()), self.rename(b, pol)),
            Formula::Iff(a, b) => Formula::iff(
                self.rename(a, Polarity::Both),
                self.rename(b, Polarity::Both),
            ),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let is_forall = matches!(f, Formula::Forall(..));
                let body = self.rename(body, pol);
                let w = v.other();
                let name = self.fresh_name();
                let atom = Formula::atom(&name, &[&w]);
                self.fresh.push(FreshDef {
                    name,
                    side: self.side_index,
                    var: w.clone(),
                    subformula: f.clone(),
                });
                if pol != Polarity::Neg {
                    self.emit(is_forall, &w, Formula::implies(atom.clone(), body.clone()));
                }
                if pol != Polarity::Pos {
                    self.emit(!is_forall, &w, Formula::implies(body, atom.clone()));
                }
                atom
            }
            Formula::CountExists(..) => unreachable!("rejected before renaming"),
        }
    }

    fn sign(positive: bool, f: Formula) -> Formula {
        if positive {
            f
        } else {
            Formula::not(f)
        }
    }

    /// Splits the top of a side formula that must hold (`positive`) or fail.
    fn top(&mut self, f: &Formula, positive: bool) {
        match (f, positive) {
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                self.top(a, positive);
                self.top(b, positive);
            }
            (Formula::Implies(a, b), false) => {
                self.top(a, true);
                self.top(b, false);
            }
            (Formula::Not(a), p) => self.top(a, !p),
            (Formula::True, true) | (Formula::False, false) => {}
            (Formula::Forall(_, body), true) | (Formula::Exists(_, body), false) => {
                self.top_universal(body, positive)
            }
            (Formula::Exists(v, body), true) | (Formula::Forall(v, body), false) => {
                let m = Self::sign(positive, self.rename(body, Polarity::of(positive)));
                let m = if v.name() == "x" { m.swap_xy() } else { m };
                self.side.existential.push(m);
            }
            _ => {
                let m = Self::sign(positive, self.rename(f, Polarity::of(positive)));
                self.side.universal.push(m);
            }
        }
    }

    /// `forall v body` (or its negated-existential dual) at the top of a side.
    fn top_universal(&mut self, body: &Formula, positive: bool) {
        let m = Self::sign(positive, self.rename(body, Polarity::of(positive)));
        self.side.universal.push(m);
    }
}

fn check_input(f: &Formula) -> Result<Signature, SolverError> {
    let report = f.analyze();
    if report.uses_counting {
        return Err(SolverError::Counting);
    }
    if !report.uses_only_xy {
        let bad: Vec<String> = f
            .all_vars()
            .into_iter()
            .filter(|v| v.name() != "x" && v.name() != "y")
            .map(|v| v.name().to_string())
            .collect();
        return Err(SolverError::NotTwoVariable(format!("variables {}", bad.join(", "))));
    }
    let mut sig = Signature::new();
    for (name, arity) in f.relation_symbols()? {
        if arity > 2 {
            return Err(SolverError::ArityTooLarge(name));
        }
        sig.add_relation(&name, arity)?;
    }
    Ok(sig)
}

/// Builds the normal form from side formulas already using `<0` (side 0) and `<1` (side 1).
fn from_sides(side0: &Formula, side1: &Formula, side1_positive: bool) -> Result<NormalForm, SolverError> {
    let sig0 = check_input(side0)?;
    let sig1 = check_input(side1)?;
    for (f, own) in [(side0, "<0"), (side1, "<1")] {
        if let Some(o) = f.order_symbols().into_iter().find(|o| o != own) {
            return Err(SolverError::UnexpectedOrder(o));
        }
    }
    let base = sig0.union(&sig1)?;
    let mut used: BTreeSet<String> = base.relations().iter().map(|r| r.name.clone()).collect();
    let mut counter = 0;
    let mut sides: [Side; 2] = Default::default();
    let mut fresh = Vec::new();
    for (i, (f, positive)) in [(side0, true), (side1, side1_positive)].into_iter().enumerate() {
        let mut b = Builder {
            used: &mut used,
            counter: &mut counter,
            side_index: i,
            side: Side::default(),
            fresh: Vec::new(),
        };
        b.top(f, positive);
        sides[i] = b.side;
        fresh.extend(b.fresh);
    }
    let mut signature = base.clone();
    for d in &fresh {
        signature.add_relation(&d.name, 1)?;
    }
    Ok(NormalForm {
        sides,
        base,
        signature,
        fresh,
    })
}

/// Two-sided normal form of a sentence over `sigma + {<}`.
pub fn scott_normal_form(phi: &Formula) -> Result<NormalForm, SolverError> {
    if !phi.is_sentence() {
        return Err(SolverError::NotTwoVariable("formula has free variables".into()));
    }
    if let Some(o) = phi.order_symbols().into_iter().find(|o| o != "<") {
        return Err(SolverError::UnexpectedOrder(o));
    }
    let side0 = phi.substitute_symbol("<", "<0")?;
    let side1 = phi.substitute_symbol("<", "<1")?;
    from_sides(&side0, &side1, false)
}

/// One-sided normal form of a sentence that may use `<` or `<0`; side 1 is empty.
pub fn normal_form_of_sentence(psi: &Formula) -> Result<NormalForm, SolverError> {
    if !psi.is_sentence() {
        return Err(SolverError::NotTwoVariable("formula has free variables".into()));
    }
    if psi.mentions("<") && psi.mentions("<0") {
        return Err(SolverError::UnexpectedOrder("<".into()));
    }
    let side0 = psi.substitute_symbol("<", "<0")?;
    from_sides(&side0, &Formula::True, true)
}

/// `16 * s^3 * 2^s`.
pub fn completeness_bound(size: usize) -> BigUint {
    let s = BigUint::from(size);
    BigUint::from(16u32) * &s * &s * &s * (BigUint::one() << size)
}

impl NormalForm {
    /// All matrices of one side, universal first.
    pub fn matrices(&self, side: usize) -> impl Iterator<Item = &Formula> {
        self.sides[side]
            .universal
            .iter()
            .chain(&self.sides[side].existential)
    }

    /// The conjunction `chi_i` of the universal matrices.
    pub fn chi(&self, side: usize) -> Formula {
        Formula::conjunction(self.sides[side].universal.iter().cloned())
    }

    /// Total token count of all printed matrices.
    pub fn size(&self) -> usize {
        (0..2).flat_map(|i| self.matrices(i)).map(token_count).sum()
    }

    pub fn completeness_bound(&self) -> BigUint {
        completeness_bound(self.size())
    }

    pub fn universal_sentence(m: &Formula) -> Formula {
        Formula::forall(&Var::x(), Formula::forall(&Var::y(), m.clone()))
    }

    pub fn existential_sentence(m: &Formula) -> Formula {
        Formula::forall(&Var::x(), Formula::exists(&Var::y(), m.clone()))
    }

    /// The whole normal form as one sentence over `signature + {<0, <1}`.
    pub fn as_sentence(&self) -> Formula {
        Formula::conjunction((0..2).flat_map(|i| {
            self.sides[i]
                .universal
                .iter()
                .map(Self::universal_sentence)
                .chain(self.sides[i].existential.iter().map(Self::existential_sentence))
                .collect::<Vec<_>>()
        }))
    }

    /// Checks every conjunct in a structure interpreting `signature`, `<0` and `<1`.
    pub fn satisfied_by(&self, s: &Structure) -> Result<bool, SolverError> {
        Ok(self.first_violation(s)?.is_none())
    }

    /// The first violated conjunct as `(side, universal?, index)`.
    pub fn first_violation(&self, s: &Structure) -> Result<Option<(usize, bool, usize)>, SolverError> {
        for i in 0..2 {
            for (j, m) in self.sides[i].universal.iter().enumerate() {
                if !Evaluator::new(&Self::universal_sentence(m)).eval(s, &[], &[])? {
                    return Ok(Some((i, true, j)));
                }
            }
            for (j, m) in self.sides[i].existential.iter().enumerate() {
                if !Evaluator::new(&Self::existential_sentence(m)).eval(s, &[], &[])? {
                    return Ok(Some((i, false, j)));
                }
            }
        }
        Ok(None)
    }

    /// Expands a structure over `base + {<0, <1}` by interpreting each fresh
    /// predicate as its defining subformula.
    pub fn expand(&self, s: &Structure) -> Result<Structure, SolverError> {
        let mut out = s.expand(self.signature.clone())?;
        for d in &self.fresh {
            let mut ev = Evaluator::new(&d.subformula);
            let rel = self
                .signature
                .relation_index(&d.name)
                .expect("fresh symbol in signature");
            for e in s.elements() {
                if ev.eval(s, &[], &[(d.var.clone(), e)])? {
                    out.insert_at(rel, &[e])?;
                }
            }
        }
        Ok(out)
    }

    /// Restriction of a model to the base vocabulary (orders kept).
    pub fn project(&self, s: &Structure) -> Result<Structure, SolverError> {
        Ok(s.reduct(self.base.clone())?)
    }

    /// Text form accepted by [`parse_normal_form`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "base {}", self.base);
        let _ = writeln!(out, "signature {}", self.signature);
        for i in 0..2 {
            for m in &self.sides[i].universal {
                let _ = writeln!(out, "forall {i} : {m}");
            }
            for m in &self.sides[i].existential {
                let _ = writeln!(out, "exists {i} : {m}");
            }
        }
        for d in &self.fresh {
            let _ = writeln!(out, "def {} {} {} : {}", d.name, d.side, d.var, d.subformula);
        }
        out
    }
}

fn parse_sig(line: usize, words: &[&str]) -> Result<Signature, SolverError> {
    let mut sig = Signature::new();
    for w in words {
        let (name, arity) = w.split_once('/').ok_or_else(|| SolverError::Parse {
            line,
            message: format!("expected NAME/ARITY, found `{w}`"),
        })?;
        let arity = arity.parse().map_err(|_| SolverError::Parse {
            line,
            message: format!("bad arity in `{w}`"),
        })?;
        sig.add_relation(name, arity)?;
    }
    Ok(sig)
}

/// Reads the text form written by [`NormalForm::to_text`]. `base` and
/// `signature` lines are optional; missing ones are inferred from the matrices.
pub fn parse_normal_form(text: &str) -> Result<NormalForm, SolverError> {
    let mut base = None;
    let mut signature = None;
    let mut sides: [Side; 2] = Default::default();
    let mut fresh = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let perr = |message: String| SolverError::Parse { line, message };
        let (head, body) = match content.split_once(':') {
            Some((h, b)) => (h.trim(), Some(b.trim())),
            None => (content, None),
        };
        let words: Vec<&str> = head.split_whitespace().collect();
        match (words.first().copied(), body) {
            (Some("base"), None) => base = Some(parse_sig(line, &words[1..])?),
            (Some("signature"), None) => signature = Some(parse_sig(line, &words[1..])?),
            (Some(kw @ ("forall" | "exists")), Some(body)) => {
                let side: usize = match words.get(1).and_then(|w| w.parse().ok()) {
                    Some(s @ (0 | 1)) => s,
                    _ => return Err(perr("expected side 0 or 1".into())),
                };
                let m = parse_formula(body, Fragment::Fo2, None).map_err(|e| perr(e.to_string()))?;
                if !m.is_quantifier_free() {
                    return Err(perr("matrices must be quantifier-free".into()));
                }
                if let Some(o) = m.order_symbols().into_iter().find(|o| is_order_name(o) && o != if side == 0 { "<0" } else { "<1" }) {
                    return Err(perr(format!("side {side} may not use `{o}`")));
                }
                if kw == "forall" {
                    sides[side].universal.push(m);
                } else {
                    sides[side].existential.push(m);
                }
            }
            (Some("def"), Some(body)) => {
                if words.len() != 4 {
                    return Err(perr("expected `def NAME SIDE VAR : FORMULA`".into()));
                }
                let side = words[2].parse().map_err(|_| perr("bad side".into()))?;
                let subformula = parse_formula(body, Fragment::Fo2, None).map_err(|e| perr(e.to_string()))?;
                fresh.push(FreshDef {
                    name: words[1].to_string(),
                    side,
                    var: Var::new(words[3]),
                    subformula,
                });
            }
            _ => return Err(perr(format!("unrecognised line `{content}`"))),
        }
    }
    let mut inferred = Signature::new();
    for i in 0..2 {
        for m in sides[i].universal.iter().chain(&sides[i].existential) {
            for (name, arity) in m.relation_symbols()? {
                match inferred.arity(&name) {
                    Some(a) if a != arity => {
                        return Err(SolverError::Parse {
                            line: 0,
                            message: format!("symbol `{name}` used with two arities"),
                        })
                    }
                    Some(_) => {}
                    None => inferred.add_relation(&name, arity)?,
                }
            }
        }
    }
    let signature = match signature {
        Some(s) => s.union(&inferred)?,
        None => inferred,
    };
    if let Some(r) = signature.relations().iter().find(|r| r.arity > 2) {
        return Err(SolverError::ArityTooLarge(r.name.clone()));
    }
    let base = match base {
        Some(b) => b,
        None => {
            let mut b = Signature::new();
            for r in signature.relations() {
                if !fresh.iter().any(|d: &FreshDef| d.name == r.name) {
                    b.add_relation(&r.name, r.arity)?;
                }
            }
            b
        }
    };
    Ok(NormalForm {
        sides,
        base,
        signature,
        fresh,
    })
}
