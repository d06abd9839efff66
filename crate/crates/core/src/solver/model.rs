//! Bounded model search for normal forms.
//!
//! For each size `n` the normal form is grounded over `0..n` with `<0` fixed
//! to the identity (every model is isomorphic to one of this shape) and `<1`
//! left open, constrained to be a strict linear order. The ground formula is
//! decided by a CDCL SAT solver.

use std::collections::HashMap;

use num_bigint::BigUint;
use varisat::{ExtendFormula, Lit, Solver};

use super::{NormalForm, SolverError};
use crate::formula::Formula;
use crate::structure::{Element, LinearOrder, Structure};

/// Result of [`find_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSearch {
    /// A smallest model found, over the normal form's signature with `<0` and `<1`.
    pub model: Option<Structure>,
    pub max_size: usize,
    pub completeness_bound: BigUint,
    /// True when the search covered every size up to the completeness bound.
    pub complete: bool,
}

#[derive(Clone, Copy)]
enum Term {
    Const(bool),
    Lit(Lit),
}

impl Term {
    fn negate(self) -> Term {
        match self {
            Term::Const(b) => Term::Const(!b),
            Term::Lit(l) => Term::Lit(!l),
        }
    }
}

struct Grounder<'a> {
    nf: &'a NormalForm,
    n: usize,
    solver: Solver<'static>,
    atoms: HashMap<(usize, Vec<Element>), Lit>,
    less1: HashMap<(Element, Element), Lit>,
    unsat: bool,
}

impl<'a> Grounder<'a> {
    fn new(nf: &'a NormalForm, n: usize) -> Self {
        let mut g = Grounder {
            nf,
            n,
            solver: Solver::new(),
            atoms: HashMap::new(),
            less1: HashMap::new(),
            unsat: false,
        };
        for a in 0..n {
            for b in a + 1..n {
                let v = g.solver.new_var();
                g.less1.insert((a, b), Lit::positive(v));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c {
                        let (ab, bc, ac) = (g.lt1(a, b), g.lt1(b, c), g.lt1(a, c));
                        g.solver.add_clause(&[!ab, !bc, ac]);
                    }
                }
            }
        }
        g
    }

    fn lt1(&self, a: Element, b: Element) -> Lit {
        if a < b {
            self.less1[&(a, b)]
        } else {
            !self.less1[&(b, a)]
        }
    }

    fn atom(&mut self, rel: usize, tuple: Vec<Element>) -> Lit {
        if let Some(&l) = self.atoms.get(&(rel, tuple.clone())) {
            return l;
        }
        let l = Lit::positive(self.solver.new_var());
        self.atoms.insert((rel, tuple), l);
        l
    }

    fn fresh_lit(&mut self) -> Lit {
        Lit::positive(self.solver.new_var())
    }

    fn ground(&mut self, f: &Formula, x: Element, y: Element) -> Term {
        let val = |v: &crate::formula::Var| if v.name() == "x" { x } else { y };
        match f {
            Formula::True => Term::Const(true),
            Formula::False => Term::Const(false),
            Formula::Eq(a, b) => Term::Const(val(a) == val(b)),
            Formula::Atom { rel, args } => {
                let tuple: Vec<Element> = args.iter().map(val).collect();
                match rel.as_str() {
                    "<0" => Term::Const(tuple[0] < tuple[1]),
                    "<1" => {
                        if tuple[0] == tuple[1] {
                            Term::Const(false)
                        } else {
                            Term::Lit(self.lt1(tuple[0], tuple[1]))
                        }
                    }
                    _ => {
                        let r = self
                            .nf
                            .signature
                            .relation_index(rel)
                            .expect("normal form symbols are declared");
                        Term::Lit(self.atom(r, tuple))
                    }
                }
            }
            Formula::Not(a) => self.ground(a, x, y).negate(),
            Formula::And(a, b) => {
                let (ta, tb) = (self.ground(a, x, y), self.ground(b, x, y));
                self.and(ta, tb)
            }
            Formula::Or(a, b) => {
                let (ta, tb) = (self.ground(a, x, y), self.ground(b, x, y));
                self.and(ta.negate(), tb.negate()).negate()
            }
            Formula::Implies(a, b) => {
                let (ta, tb) = (self.ground(a, x, y), self.ground(b, x, y));
                self.and(ta, tb.negate()).negate()
            }
            Formula::Iff(a, b) => {
                let (ta, tb) = (self.ground(a, x, y), self.ground(b, x, y));
                match (ta, tb) {
                    (Term::Const(p), t) | (t, Term::Const(p)) => {
                        if p {
                            t
                        } else {
                            t.negate()
                        }
                    }
                    (Term::Lit(p), Term::Lit(q)) => {
                        let r = self.fresh_lit();
                        self.solver.add_clause(&[!r, !p, q]);
                        self.solver.add_clause(&[!r, p, !q]);
                        self.solver.add_clause(&[r, p, q]);
                        self.solver.add_clause(&[r, !p, !q]);
                        Term::Lit(r)
                    }
                }
            }
            Formula::Exists(..) | Formula::Forall(..) | Formula::CountExists(..) => {
                unreachable!("normal form matrices are quantifier-free")
            }
        }
    }

    fn and(&mut self, a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Const(false), _) | (_, Term::Const(false)) => Term::Const(false),
            (Term::Const(true), t) | (t, Term::Const(true)) => t,
            (Term::Lit(p), Term::Lit(q)) => {
                let r = self.fresh_lit();
                self.solver.add_clause(&[!r, p]);
                self.solver.add_clause(&[!r, q]);
                self.solver.add_clause(&[r, !p, !q]);
                Term::Lit(r)
            }
        }
    }

    fn assert_term(&mut self, t: Term) {
        match t {
            Term::Const(true) => {}
            Term::Const(false) => self.unsat = true,
            Term::Lit(l) => self.solver.add_clause(&[l]),
        }
    }

    fn encode(&mut self) {
        let n = self.n;
        let nf = self.nf;
        for side in &nf.sides {
            for m in &side.universal {
                for a in 0..n {
                    for b in 0..n {
                        let t = self.ground(m, a, b);
                        self.assert_term(t);
                    }
                }
            }
            for m in &side.existential {
                for a in 0..n {
                    let mut clause = Vec::new();
                    let mut satisfied = false;
                    for b in 0..n {
                        match self.ground(m, a, b) {
                            Term::Const(true) => satisfied = true,
                            Term::Const(false) => {}
                            Term::Lit(l) => clause.push(l),
                        }
                    }
                    if !satisfied {
                        if clause.is_empty() {
                            self.unsat = true;
                        } else {
                            self.solver.add_clause(&clause);
                        }
                    }
                }
            }
        }
    }

    fn solve(mut self) -> Result<Option<Structure>, SolverError> {
        self.encode();
        if self.unsat {
            return Ok(None);
        }
        let sat = self
            .solver
            .solve()
            .map_err(|e| SolverError::Internal(format!("SAT solver failed: {e}")))?;
        if !sat {
            return Ok(None);
        }
        let model = self.solver.model().expect("model after SAT");
        let mut truth = vec![false; model.iter().map(|l| l.index() + 1).max().unwrap_or(0)];
        for l in model {
            truth[l.index()] = l.is_positive();
        }
        let value = |l: Lit| truth.get(l.index()).copied().unwrap_or(false) ^ l.is_negative();
        let mut s = Structure::new(self.nf.signature.clone(), self.n)?;
        for ((rel, tuple), l) in &self.atoms {
            if value(*l) {
                s.insert_at(*rel, tuple)?;
            }
        }
        let ranks: Vec<usize> = (0..self.n)
            .map(|a| (0..self.n).filter(|&b| b != a && value(self.lt1(b, a))).count())
            .collect();
        s.set_order("<0", LinearOrder::identity(self.n))?;
        s.set_order("<1", LinearOrder::from_ranks(&ranks)?)?;
        Ok(Some(s))
    }
}

/// A model of exactly `n` elements, if one exists.
pub fn find_model_of_size(nf: &NormalForm, n: usize) -> Result<Option<Structure>, SolverError> {
    if n == 0 {
        return Ok(None);
    }
    let model = Grounder::new(nf, n).solve()?;
    if let Some(m) = &model {
        if !nf.satisfied_by(m)? {
            return Err(SolverError::Internal("decoded model violates the normal form".into()));
        }
    }
    Ok(model)
}

/// Searches sizes `1..=max_size` and returns the smallest model found.
pub fn find_model(nf: &NormalForm, max_size: usize) -> Result<ModelSearch, SolverError> {
    let bound = nf.completeness_bound();
    let mut model = None;
    for n in 1..=max_size {
        if let Some(m) = find_model_of_size(nf, n)? {
            model = Some(m);
            break;
        }
    }
    let complete = model.is_some() || BigUint::from(max_size) >= bound;
    Ok(ModelSearch {
        model,
        max_size,
        completeness_bound: bound,
        complete,
    })
}
