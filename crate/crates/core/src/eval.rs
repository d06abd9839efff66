//! Model checking by bottom-up truth tables.
//!
//! Each subformula gets a table indexed by assignments to its own free
//! variables, so a subformula is evaluated once per assignment rather than
//! once per occurrence of that assignment in an enclosing quantifier loop.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{Formula, Var};
use crate::structure::{is_order_name, Element, LinearOrder, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("symbol `{0}` is not interpreted by the structure")]
    Uninterpreted(String),
    #[error("symbol `{name}` has arity {expected} but is applied to {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("free variable `{0}` has no value")]
    Unassigned(String),
    #[error("element {element} out of range for domain of size {size}")]
    OutOfRange { element: Element, size: usize },
    #[error("{needed} orders exceed the enumeration cap of {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("order symbol `{0}` is not allowed here")]
    UnexpectedOrder(String),
}

#[derive(Debug, Clone)]
enum Kind {
    True,
    False,
    Atom(String, Vec<usize>),
    Eq(usize, usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Exists(usize, usize),
    Forall(usize, usize),
    Count(usize, usize, usize),
}

#[derive(Debug, Clone)]
struct Node {
    kind: Kind,
    free: Vec<usize>,
}

/// A formula compiled to a post-order node list with indexed variables.
#[derive(Debug, Clone)]
pub struct Evaluator {
    nodes: Vec<Node>,
    vars: Vec<Var>,
    tables: Vec<Vec<bool>>,
}

enum Resolved<'a> {
    Rel(usize),
    Order(&'a LinearOrder),
    None,
}

impl Evaluator {
    pub fn new(phi: &Formula) -> Self {
        let mut ev = Evaluator {
            nodes: Vec::new(),
            vars: Vec::new(),
            tables: Vec::new(),
        };
        ev.compile(phi);
        ev.tables = vec![Vec::new(); ev.nodes.len()];
        ev
    }

    fn var(&mut self, v: &Var) -> usize {
        match self.vars.iter().position(|w| w == v) {
            Some(i) => i,
            None => {
                self.vars.push(v.clone());
                self.vars.len() - 1
            }
        }
    }

    fn push(&mut self, kind: Kind, mut free: Vec<usize>) -> usize {
        free.sort_unstable();
        free.dedup();
        self.nodes.push(Node { kind, free });
        self.nodes.len() - 1
    }

    fn binary(&mut self, a: &Formula, b: &Formula, mk: fn(usize, usize) -> Kind) -> usize {
        let a = self.compile(a);
        let b = self.compile(b);
        let free = [self.nodes[a].free.clone(), self.nodes[b].free.clone()].concat();
        self.push(mk(a, b), free)
    }

    fn quant(&mut self, v: &Var, body: &Formula, mk: impl Fn(usize, usize) -> Kind) -> usize {
        let vi = self.var(v);
        let b = self.compile(body);
        let free = self.nodes[b].free.iter().copied().filter(|&w| w != vi).collect();
        self.push(mk(vi, b), free)
    }

    fn compile(&mut self, f: &Formula) -> usize {
        match f {
            Formula::True => self.push(Kind::True, vec![]),
            Formula::False => self.push(Kind::False, vec![]),
            Formula::Atom { rel, args } => {
                let idx: Vec<usize> = args.iter().map(|v| self.var(v)).collect();
                self.push(Kind::Atom(rel.clone(), idx.clone()), idx)
            }
            Formula::Eq(a, b) => {
                let (a, b) = (self.var(a), self.var(b));
                self.push(Kind::Eq(a, b), vec![a, b])
            }
            Formula::Not(a) => {
                let a = self.compile(a);
                let free = self.nodes[a].free.clone();
                self.push(Kind::Not(a), free)
            }
            Formula::And(a, b) => self.binary(a, b, Kind::And),
            Formula::Or(a, b) => self.binary(a, b, Kind::Or),
            Formula::Implies(a, b) => self.binary(a, b, Kind::Implies),
            Formula::Iff(a, b) => self.binary(a, b, Kind::Iff),
            Formula::Exists(v, b) => self.quant(v, b, Kind::Exists),
            Formula::Forall(v, b) => self.quant(v, b, Kind::Forall),
            Formula::CountExists(k, v, b) => {
                let k = *k;
                self.quant(v, b, move |vi, bi| Kind::Count(k, vi, bi))
            }
        }
    }

    fn resolve<'a>(
        &self,
        s: &'a Structure,
        overrides: &[(&str, &'a LinearOrder)],
    ) -> Result<Vec<Resolved<'a>>, EvalError> {
        self.nodes
            .iter()
            .map(|node| match &node.kind {
                Kind::Atom(rel, args) => {
                    if is_order_name(rel) {
                        if args.len() != 2 {
                            return Err(EvalError::ArityMismatch {
                                name: rel.clone(),
                                expected: 2,
                                found: args.len(),
                            });
                        }
                        let ord = overrides
                            .iter()
                            .find(|(n, _)| n == rel)
                            .map(|(_, o)| *o)
                            .or_else(|| s.order(rel))
                            .ok_or_else(|| EvalError::Uninterpreted(rel.clone()))?;
                        if ord.len() != s.size() {
                            return Err(EvalError::Uninterpreted(rel.clone()));
                        }
                        Ok(Resolved::Order(ord))
                    } else {
                        let idx = s
                            .signature()
                            .relation_index(rel)
                            .ok_or_else(|| EvalError::Uninterpreted(rel.clone()))?;
                        let arity = s.signature().relations()[idx].arity;
                        if arity != args.len() {
                            return Err(EvalError::ArityMismatch {
                                name: rel.clone(),
                                expected: arity,
                                found: args.len(),
                            });
                        }
                        Ok(Resolved::Rel(idx))
                    }
                }
                _ => Ok(Resolved::None),
            })
            .collect()
    }

    /// Evaluates under the structure's own orders, optionally replaced by `overrides`.
    pub fn eval(
        &mut self,
        s: &Structure,
        overrides: &[(&str, &LinearOrder)],
        assignment: &[(Var, Element)],
    ) -> Result<bool, EvalError> {
        let resolved = self.resolve(s, overrides)?;
        let n = s.size();
        let root = self.nodes.len() - 1;
        let mut vals = vec![0usize; self.vars.len()];
        for &fv in &self.nodes[root].free {
            let v = &self.vars[fv];
            let (_, e) = assignment
                .iter()
                .find(|(w, _)| w == v)
                .ok_or_else(|| EvalError::Unassigned(v.name().to_string()))?;
            if *e >= n {
                return Err(EvalError::OutOfRange { element: *e, size: n });
            }
        }
        for i in 0..self.nodes.len() {
            let free = self.nodes[i].free.clone();
            let len = n.pow(free.len() as u32);
            let mut table = std::mem::take(&mut self.tables[i]);
            table.clear();
            table.reserve(len);
            for t in 0..len {
                let mut rest = t;
                for &v in &free {
                    vals[v] = rest % n;
                    rest /= n;
                }
                table.push(self.node_value(i, &mut vals, n, s, &resolved));
            }
            self.tables[i] = table;
        }
        for &fv in &self.nodes[root].free {
            let v = &self.vars[fv];
            vals[fv] = assignment.iter().find(|(w, _)| w == v).map(|(_, e)| *e).unwrap();
        }
        Ok(self.lookup(root, &vals, n))
    }

    /// Truth values at every pair: entry `a * n + b` is the value with `x := a`, `y := b`.
    /// Free variables other than `x`, `y` are not allowed.
    pub fn eval_pairs(
        &mut self,
        s: &Structure,
        overrides: &[(&str, &LinearOrder)],
        x: &Var,
        y: &Var,
    ) -> Result<Vec<bool>, EvalError> {
        let n = s.size();
        let root = self.nodes.len() - 1;
        if let Some(&v) = self.nodes[root]
            .free
            .iter()
            .find(|&&v| self.vars[v] != *x && self.vars[v] != *y)
        {
            return Err(EvalError::Unassigned(self.vars[v].name().to_string()));
        }
        self.eval(s, overrides, &[(x.clone(), 0), (y.clone(), 0)])?;
        let xi = self.vars.iter().position(|v| v == x);
        let yi = self.vars.iter().position(|v| v == y);
        let mut vals = vec![0usize; self.vars.len()];
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                if let Some(i) = xi {
                    vals[i] = a;
                }
                if let Some(i) = yi {
                    vals[i] = b;
                }
                out.push(self.lookup(root, &vals, n));
            }
        }
        Ok(out)
    }

    fn lookup(&self, node: usize, vals: &[usize], n: usize) -> bool {
        let mut idx = 0;
        for &v in self.nodes[node].free.iter().rev() {
            idx = idx * n + vals[v];
        }
        self.tables[node][idx]
    }

    fn node_value(&self, i: usize, vals: &mut [usize], n: usize, s: &Structure, resolved: &[Resolved]) -> bool {
        match &self.nodes[i].kind {
            Kind::True => true,
            Kind::False => false,
            Kind::Atom(_, args) => match &resolved[i] {
                Resolved::Order(o) => o.less(vals[args[0]], vals[args[1]]),
                Resolved::Rel(r) => match args.as_slice() {
                    [a] => s.contains(*r, &[vals[*a]]),
                    [a, b] => s.contains(*r, &[vals[*a], vals[*b]]),
                    _ => {
                        let tuple: Vec<Element> = args.iter().map(|&a| vals[a]).collect();
                        s.contains(*r, &tuple)
                    }
                },
                Resolved::None => unreachable!("atoms are resolved"),
            },
            Kind::Eq(a, b) => vals[*a] == vals[*b],
            Kind::Not(a) => !self.lookup(*a, vals, n),
            Kind::And(a, b) => self.lookup(*a, vals, n) && self.lookup(*b, vals, n),
            Kind::Or(a, b) => self.lookup(*a, vals, n) || self.lookup(*b, vals, n),
            Kind::Implies(a, b) => !self.lookup(*a, vals, n) || self.lookup(*b, vals, n),
            Kind::Iff(a, b) => self.lookup(*a, vals, n) == self.lookup(*b, vals, n),
            Kind::Exists(v, b) | Kind::Forall(v, b) | Kind::Count(_, v, b) => {
                let saved = vals[*v];
                let result = match &self.nodes[i].kind {
                    Kind::Exists(..) => (0..n).any(|d| {
                        vals[*v] = d;
                        self.lookup(*b, vals, n)
                    }),
                    Kind::Forall(..) => (0..n).all(|d| {
                        vals[*v] = d;
                        self.lookup(*b, vals, n)
                    }),
                    Kind::Count(k, ..) => {
                        let mut count = 0;
                        for d in 0..n {
                            vals[*v] = d;
                            if self.lookup(*b, vals, n) {
                                count += 1;
                                if count >= *k {
                                    break;
                                }
                            }
                        }
                        count >= *k
                    }
                    _ => unreachable!(),
                };
                vals[*v] = saved;
                result
            }
        }
    }
}

/// Evaluates `phi` in `s` under `assignment` (which must cover the free variables).
pub fn evaluate(s: &Structure, phi: &Formula, assignment: &[(Var, Element)]) -> Result<bool, EvalError> {
    Evaluator::new(phi).eval(s, &[], assignment)
}

/// Evaluates a sentence.
pub fn evaluate_sentence(s: &Structure, phi: &Formula) -> Result<bool, EvalError> {
    evaluate(s, phi, &[])
}

/// Which orders [`holds_under_orders`] ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderMode {
    /// All `n!` orders; fails when `n!` exceeds `cap`.
    Exhaustive { cap: u128 },
    /// The identity, its reverse and `count` further orders drawn from a seeded generator.
    Sample { count: usize, seed: u64 },
}

/// Default cap for exhaustive order enumeration (`8!`).
pub const DEFAULT_ORDER_CAP: u128 = 40_320;

impl Default for OrderMode {
    fn default() -> Self {
        OrderMode::Exhaustive {
            cap: DEFAULT_ORDER_CAP,
        }
    }
}

/// Outcome of evaluating a sentence under many orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderVerdict {
    ConstantTrue,
    ConstantFalse,
    Varies {
        satisfying: LinearOrder,
        falsifying: LinearOrder,
    },
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k)).unwrap_or(u128::MAX)
}

/// Evaluates the sentence `phi` with `order_symbol` interpreted by each order of `mode`.
pub fn holds_under_orders(
    s: &Structure,
    phi: &Formula,
    order_symbol: &str,
    mode: OrderMode,
) -> Result<OrderVerdict, EvalError> {
    if !is_order_name(order_symbol) {
        return Err(EvalError::UnexpectedOrder(order_symbol.to_string()));
    }
    let mut ev = Evaluator::new(phi);
    let n = s.size();
    let orders: Box<dyn Iterator<Item = LinearOrder>> = if !phi.mentions(order_symbol) {
        Box::new(std::iter::once(LinearOrder::identity(n)))
    } else {
        match mode {
            OrderMode::Exhaustive { cap } => {
                let needed = factorial(n);
                if needed > cap {
                    return Err(EvalError::CapExceeded { needed, cap });
                }
                Box::new(
                    (0..n)
                        .permutations(n)
                        .map(|p| LinearOrder::from_sequence(p).expect("permutation")),
                )
            }
            OrderMode::Sample { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut list = vec![LinearOrder::identity(n), LinearOrder::identity(n).reversed()];
                for _ in 0..count {
                    let mut seq: Vec<Element> = (0..n).collect();
                    seq.shuffle(&mut rng);
                    list.push(LinearOrder::from_sequence(seq).expect("permutation"));
                }
                Box::new(list.into_iter())
            }
        }
    };
    let mut first: Option<(LinearOrder, bool)> = None;
    for ord in orders {
        let v = ev.eval(s, &[(order_symbol, &ord)], &[])?;
        match &first {
            None => first = Some((ord, v)),
            Some((o, fv)) if *fv != v => {
                let (satisfying, falsifying) = if v { (ord, o.clone()) } else { (o.clone(), ord) };
                return Ok(OrderVerdict::Varies {
                    satisfying,
                    falsifying,
                });
            }
            _ => {}
        }
    }
    Ok(match first {
        Some((_, true)) => OrderVerdict::ConstantTrue,
        _ => OrderVerdict::ConstantFalse,
    })
}

/// Convenience: an assignment from variable names.
pub fn assignment(pairs: &[(&str, Element)]) -> Vec<(Var, Element)> {
    pairs.iter().map(|(v, e)| (Var::new(v), *e)).collect()
}

/// Evaluates a quantifier-free formula at a point, without building tables.
pub fn eval_quantifier_free(
    s: &Structure,
    phi: &Formula,
    values: &BTreeMap<&str, Element>,
) -> Result<bool, EvalError> {
    let get = |v: &Var| {
        values
            .get(v.name())
            .copied()
            .ok_or_else(|| EvalError::Unassigned(v.name().to_string()))
    };
    Ok(match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { rel, args } => {
            let tuple = args.iter().map(get).collect::<Result<Vec<_>, _>>()?;
            if is_order_name(rel) {
                let o = s.order(rel).ok_or_else(|| EvalError::Uninterpreted(rel.clone()))?;
                o.less(tuple[0], tuple[1])
            } else {
                s.holds(rel, &tuple)
                    .map_err(|_| EvalError::Uninterpreted(rel.clone()))?
            }
        }
        Formula::Eq(a, b) => get(a)? == get(b)?,
        Formula::Not(a) => !eval_quantifier_free(s, a, values)?,
        Formula::And(a, b) => eval_quantifier_free(s, a, values)? && eval_quantifier_free(s, b, values)?,
        Formula::Or(a, b) => eval_quantifier_free(s, a, values)? || eval_quantifier_free(s, b, values)?,
        Formula::Implies(a, b) => !eval_quantifier_free(s, a, values)? || eval_quantifier_free(s, b, values)?,
        Formula::Iff(a, b) => eval_quantifier_free(s, a, values)? == eval_quantifier_free(s, b, values)?,
        Formula::Exists(..) | Formula::Forall(..) | Formula::CountExists(..) => {
            let bindings: Vec<(Var, Element)> = values.iter().map(|(k, v)| (Var::new(k), *v)).collect();
            evaluate(s, phi, &bindings)?
        }
    })
}
