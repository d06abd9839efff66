//! First-order formulas over relational vocabularies with named orders.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::structure::is_order_name;

/// A first-order variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(String);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(name.to_string())
    }

    pub fn x() -> Self {
        Var::new("x")
    }

    pub fn y() -> Self {
        Var::new("y")
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The other variable of the two-variable fragment (`x` for `y`, `y` otherwise).
    pub fn other(&self) -> Var {
        if self.0 == "y" {
            Var::x()
        } else {
            Var::y()
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// `rel(args)`; order symbols (`<`, `<0`, `<1`) are binary atoms too.
    Atom { rel: String, args: Vec<Var> },
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    /// There exist at least `k` elements satisfying the body.
    CountExists(usize, Var, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("line {line}: {message}")]
    File { line: usize, message: String },
    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),
    #[error("symbol `{name}` has arity {expected} but is applied to {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("variable `{0}` is outside the two-variable fragment")]
    NotTwoVariable(String),
    #[error("counting quantifiers are not allowed in this fragment")]
    CountingNotAllowed,
    #[error("symbol `{0}` is used with two different arities")]
    InconsistentArity(String),
}

/// Fragment summary of a formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FragmentReport {
    pub uses_only_xy: bool,
    pub uses_counting: bool,
    pub order_symbols_used: BTreeSet<String>,
    pub quantifier_rank: usize,
    pub counting_index_max: usize,
}

impl Formula {
    pub fn atom(rel: &str, args: &[&Var]) -> Formula {
        Formula::Atom {
            rel: rel.to_string(),
            args: args.iter().map(|v| (*v).clone()).collect(),
        }
    }

    pub fn eq(a: &Var, b: &Var) -> Formula {
        Formula::Eq(a.clone(), b.clone())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &Var, body: Formula) -> Formula {
        Formula::Exists(v.clone(), Box::new(body))
    }

    pub fn forall(v: &Var, body: Formula) -> Formula {
        Formula::Forall(v.clone(), Box::new(body))
    }

    pub fn count_exists(k: usize, v: &Var, body: Formula) -> Formula {
        Formula::CountExists(k, v.clone(), Box::new(body))
    }

    /// Left-nested conjunction; `True` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` for an empty list.
    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => vec![],
            Formula::Not(a)
            | Formula::Exists(_, a)
            | Formula::Forall(_, a)
            | Formula::CountExists(_, _, a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Formula::True | Formula::False => BTreeSet::new(),
            Formula::Atom { args, .. } => args.iter().cloned().collect(),
            Formula::Eq(a, b) => [a.clone(), b.clone()].into_iter().collect(),
            Formula::Exists(v, body) | Formula::Forall(v, body) | Formula::CountExists(_, v, body) => {
                let mut fv = body.free_vars();
                fv.remove(v);
                fv
            }
            _ => self
                .children()
                .iter()
                .flat_map(|c| c.free_vars())
                .collect(),
        }
    }

    /// All variables occurring free or bound.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom { args, .. } => out.extend(args.iter().cloned()),
            Formula::Eq(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) | Formula::CountExists(_, v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn is_quantifier_free(&self) -> bool {
        let mut qf = true;
        self.visit(&mut |f| {
            if matches!(
                f,
                Formula::Exists(..) | Formula::Forall(..) | Formula::CountExists(..)
            ) {
                qf = false;
            }
        });
        qf
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Non-order relation symbols with the arities they are applied with.
    pub fn relation_symbols(&self) -> Result<BTreeMap<String, usize>, LogicError> {
        let mut out: BTreeMap<String, usize> = BTreeMap::new();
        let mut err = None;
        self.visit(&mut |f| {
            if let Formula::Atom { rel, args } = f {
                if is_order_name(rel) {
                    return;
                }
                match out.get(rel) {
                    Some(&a) if a != args.len() => err = Some(LogicError::InconsistentArity(rel.clone())),
                    _ => {
                        out.insert(rel.clone(), args.len());
                    }
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    pub fn order_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom { rel, .. } = f {
                if is_order_name(rel) {
                    out.insert(rel.clone());
                }
            }
        });
        out
    }

    pub fn mentions(&self, symbol: &str) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if let Formula::Atom { rel, .. } = f {
                if rel == symbol {
                    found = true;
                }
            }
        });
        found
    }

    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Exists(_, b) | Formula::Forall(_, b) | Formula::CountExists(_, _, b) => {
                1 + b.quantifier_rank()
            }
            _ => self
                .children()
                .iter()
                .map(|c| c.quantifier_rank())
                .max()
                .unwrap_or(0),
        }
    }

    pub fn analyze(&self) -> FragmentReport {
        let vars = self.all_vars();
        let mut uses_counting = false;
        let mut counting_index_max = 0;
        self.visit(&mut |f| {
            if let Formula::CountExists(k, ..) = f {
                uses_counting = true;
                counting_index_max = counting_index_max.max(*k);
            }
        });
        FragmentReport {
            uses_only_xy: vars.iter().all(|v| v.name() == "x" || v.name() == "y"),
            uses_counting,
            order_symbols_used: self.order_symbols(),
            quantifier_rank: self.quantifier_rank(),
            counting_index_max,
        }
    }

    /// Structural map over atoms; other nodes are rebuilt unchanged.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&str, &[Var]) -> Formula) -> Formula {
        let mut b = |x: &Formula| Box::new(x.map_atoms(f));
        match self {
            Formula::Atom { rel, args } => f(rel, args),
            Formula::True | Formula::False | Formula::Eq(..) => self.clone(),
            Formula::Not(a) => Formula::Not(b(a)),
            Formula::And(x, y) => {
                let x = b(x);
                Formula::And(x, b(y))
            }
            Formula::Or(x, y) => {
                let x = b(x);
                Formula::Or(x, b(y))
            }
            Formula::Implies(x, y) => {
                let x = b(x);
                Formula::Implies(x, b(y))
            }
            Formula::Iff(x, y) => {
                let x = b(x);
                Formula::Iff(x, b(y))
            }
            Formula::Exists(v, x) => Formula::Exists(v.clone(), b(x)),
            Formula::Forall(v, x) => Formula::Forall(v.clone(), b(x)),
            Formula::CountExists(k, v, x) => Formula::CountExists(*k, v.clone(), b(x)),
        }
    }

    /// Renames relation symbol `from` to `to` everywhere.
    pub fn substitute_symbol(&self, from: &str, to: &str) -> Result<Formula, LogicError> {
        let symbols = self.relation_symbols()?;
        let arity_of = |s: &str| -> Option<usize> {
            if is_order_name(s) {
                Some(2)
            } else {
                symbols.get(s).copied()
            }
        };
        if let (Some(a), Some(b)) = (arity_of(from), arity_of(to)) {
            let from_used = self.mentions(from);
            let to_used = self.mentions(to);
            if from_used && to_used && a != b {
                return Err(LogicError::ArityMismatch {
                    name: to.to_string(),
                    expected: b,
                    found: a,
                });
            }
        }
        if is_order_name(to) || is_order_name(from) {
            let mut bad = None;
            self.visit(&mut |f| {
                if let Formula::Atom { rel, args } = f {
                    if rel == from && args.len() != 2 {
                        bad = Some(args.len());
                    }
                }
            });
            if let Some(found) = bad {
                return Err(LogicError::ArityMismatch {
                    name: to.to_string(),
                    expected: 2,
                    found,
                });
            }
        }
        Ok(self.map_atoms(&mut |rel, args| Formula::Atom {
            rel: if rel == from { to.to_string() } else { rel.to_string() },
            args: args.to_vec(),
        }))
    }

    /// Exchanges the variable names `x` and `y` throughout (an alpha-renaming).
    pub fn swap_xy(&self) -> Formula {
        let sw = |v: &Var| -> Var {
            match v.name() {
                "x" => Var::y(),
                "y" => Var::x(),
                _ => v.clone(),
            }
        };
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom { rel, args } => Formula::Atom {
                rel: rel.clone(),
                args: args.iter().map(sw).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(sw(a), sw(b)),
            Formula::Not(a) => Formula::not(a.swap_xy()),
            Formula::And(a, b) => Formula::and(a.swap_xy(), b.swap_xy()),
            Formula::Or(a, b) => Formula::or(a.swap_xy(), b.swap_xy()),
            Formula::Implies(a, b) => Formula::implies(a.swap_xy(), b.swap_xy()),
            Formula::Iff(a, b) => Formula::iff(a.swap_xy(), b.swap_xy()),
            Formula::Exists(v, a) => Formula::exists(&sw(v), a.swap_xy()),
            Formula::Forall(v, a) => Formula::forall(&sw(v), a.swap_xy()),
            Formula::CountExists(k, v, a) => Formula::count_exists(*k, &sw(v), a.swap_xy()),
        }
    }
}

/// Free function form of [`Formula::substitute_symbol`].
pub fn substitute_symbol(phi: &Formula, from: &str, to: &str) -> Result<Formula, LogicError> {
    phi.substitute_symbol(from, to)
}

/// Free function form of [`Formula::analyze`].
pub fn analyze(phi: &Formula) -> FragmentReport {
    phi.analyze()
}

// Binding strength used by the printer: larger binds tighter.
fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..) => 5,
        Formula::Exists(..) | Formula::Forall(..) | Formula::CountExists(..) => 0,
        _ => 6,
    }
}

fn is_quantifier(f: &Formula) -> bool {
    matches!(
        f,
        Formula::Exists(..) | Formula::Forall(..) | Formula::CountExists(..)
    )
}

fn is_infix_atom(f: &Formula) -> bool {
    match f {
        Formula::Eq(..) => true,
        Formula::Atom { rel, args } => is_order_name(rel) && args.len() == 2,
        _ => false,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, sub: &Formula, min_prec: u8) -> fmt::Result {
    if is_quantifier(sub) || precedence(sub) < min_prec {
        write!(f, "({sub})")
    } else {
        write!(f, "{sub}")
    }
}

impl fmt::Display for Formula {
    /// Minimal-parenthesis rendering that parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom { rel, args } if is_order_name(rel) && args.len() == 2 => {
                write!(f, "{} {} {}", args[0], rel, args[1])
            }
            Formula::Atom { rel, args } => {
                let a: Vec<&str> = args.iter().map(Var::name).collect();
                write!(f, "{}({})", rel, a.join(", "))
            }
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(a) => {
                f.write_str("!")?;
                if is_infix_atom(a) {
                    write!(f, "({a})")
                } else {
                    write_operand(f, a, 5)
                }
            }
            Formula::And(a, b) => {
                write_operand(f, a, 4)?;
                f.write_str(" & ")?;
                write_operand(f, b, 5)
            }
            Formula::Or(a, b) => {
                write_operand(f, a, 3)?;
                f.write_str(" | ")?;
                write_operand(f, b, 4)
            }
            Formula::Implies(a, b) => {
                write_operand(f, a, 3)?;
                f.write_str(" -> ")?;
                write_operand(f, b, 2)
            }
            Formula::Iff(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str(" <-> ")?;
                write_operand(f, b, 2)
            }
            Formula::Exists(v, a) => write!(f, "exists {v}. {a}"),
            Formula::Forall(v, a) => write!(f, "forall {v}. {a}"),
            Formula::CountExists(k, v, a) => write!(f, "exists>={k} {v}. {a}"),
        }
    }
}

/// Free function form of the printer.
pub fn print_formula(phi: &Formula) -> String {
    phi.to_string()
}
