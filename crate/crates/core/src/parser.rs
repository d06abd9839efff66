//! Concrete syntax for formulas.
//!
//! ```text
//! exists x. forall y. (x < y | x = y) -> P(x)
//! exists>=2 x. E(x, y)
//! ```
//!
//! Precedence from tightest to loosest: `!`, `&`, `|`, `->` (right
//! associative), `<->`. A quantifier body extends as far right as possible.
//! `x <= y` abbreviates `x < y | x = y` and `x != y` abbreviates `!(x = y)`.

use crate::formula::{Formula, LogicError, Var};
use crate::structure::Signature;

/// Which logic a parsed formula must belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fragment {
    /// Variables `x`, `y` only; no counting quantifiers.
    Fo2,
    /// Any variables; counting quantifiers allowed.
    Fo,
    /// Variables `x`, `y` only; counting quantifiers allowed.
    C2,
}

impl std::str::FromStr for Fragment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fo2" => Ok(Fragment::Fo2),
            "fo" => Ok(Fragment::Fo),
            "c2" => Ok(Fragment::C2),
            _ => Err(format!("unknown fragment `{s}` (expected fo2, fo or c2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Neq,
    Order(&'static str),
    Le,
    Ge,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let err = |offset: usize, message: String| LogicError::Parse { offset, message };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let rest = &text[i..];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            (Tok::Ident(rest[..len].to_string()), len)
        } else if c.is_ascii_digit() {
            let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let n = rest[..len]
                .parse()
                .map_err(|_| err(start, "number too large".into()))?;
            (Tok::Num(n), len)
        } else if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if rest.starts_with("<0") {
            (Tok::Order("<0"), 2)
        } else if rest.starts_with("<1") {
            (Tok::Order("<1"), 2)
        } else if rest.starts_with("->") {
            (Tok::Implies, 2)
        } else if rest.starts_with("!=") {
            (Tok::Neq, 2)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else {
            let t = match c {
                '<' => Tok::Order("<"),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '!' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                '=' => Tok::Eq,
                _ => return Err(err(start, format!("unexpected character `{c}`"))),
            };
            (t, 1)
        };
        out.push((start, tok));
        i += len;
    }
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["exists", "forall", "true", "false"];

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, message: impl Into<String>) -> LogicError {
        LogicError::Parse {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn var(&mut self) -> Result<Var, LogicError> {
        match self.peek() {
            Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => {
                let v = Var::new(name);
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("expected a variable")),
        }
    }

    fn iff(&mut self) -> Result<Formula, LogicError> {
        let mut left = self.implies()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let right = self.implies()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    fn implies(&mut self) -> Result<Formula, LogicError> {
        let left = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let right = self.implies()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, LogicError> {
        let mut left = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let right = self.and()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula, LogicError> {
        let mut left = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(k)) if k == "exists" || k == "forall" => {
                let universal = k == "forall";
                self.pos += 1;
                let mut count = None;
                if self.peek() == Some(&Tok::Ge) {
                    if universal {
                        return Err(self.error("counting applies to `exists` only"));
                    }
                    self.pos += 1;
                    match self.next() {
                        Some(Tok::Num(k)) => count = Some(k),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("expected a number after `exists>=`"));
                        }
                    }
                }
                let v = self.var()?;
                self.expect(Tok::Dot, "`.` after the quantified variable")?;
                let body = self.iff()?;
                Ok(match (universal, count) {
                    (true, _) => Formula::forall(&v, body),
                    (false, None) => Formula::exists(&v, body),
                    (false, Some(k)) => Formula::count_exists(k, &v, body),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, LogicError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(name)) if name == "true" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::Ident(name)) if name == "false" => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Tok::Ident(name)) if self.peek2() == Some(&Tok::LParen) => {
                self.pos += 2;
                let mut args = vec![self.var()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.var()?);
                }
                self.expect(Tok::RParen, "`)` closing the argument list")?;
                Ok(Formula::Atom { rel: name, args })
            }
            Some(Tok::Ident(_)) => {
                let a = self.var()?;
                let op = self.next();
                let b = self.var()?;
                match op {
                    Some(Tok::Eq) => Ok(Formula::eq(&a, &b)),
                    Some(Tok::Neq) => Ok(Formula::not(Formula::eq(&a, &b))),
                    Some(Tok::Order(o)) => Ok(Formula::atom(o, &[&a, &b])),
                    Some(Tok::Le) => Ok(Formula::or(
                        Formula::atom("<", &[&a, &b]),
                        Formula::eq(&a, &b),
                    )),
                    _ => {
                        self.pos -= 2;
                        Err(self.error("expected `=`, `!=`, `<`, `<=`, `<0` or `<1`"))
                    }
                }
            }
            Some(_) => Err(self.error("expected a formula")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses a formula, checking fragment membership and, if a signature is
/// supplied, that every relation symbol is declared with the right arity.
pub fn parse_formula(
    text: &str,
    fragment: Fragment,
    signature: Option<&Signature>,
) -> Result<Formula, LogicError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.iff()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    check_formula(&f, fragment, signature)?;
    Ok(f)
}

/// Fragment and signature checks applied by [`parse_formula`].
pub fn check_formula(f: &Formula, fragment: Fragment, signature: Option<&Signature>) -> Result<(), LogicError> {
    let report = f.analyze();
    if fragment != Fragment::Fo {
        if let Some(v) = f.all_vars().into_iter().find(|v| v.name() != "x" && v.name() != "y") {
            return Err(LogicError::NotTwoVariable(v.name().to_string()));
        }
    }
    if fragment == Fragment::Fo2 && report.uses_counting {
        return Err(LogicError::CountingNotAllowed);
    }
    let mut err = None;
    f.visit(&mut |g| {
        if let Formula::Atom { rel, args } = g {
            if crate::structure::is_order_name(rel) {
                return;
            }
            if let Some(sig) = signature {
                match sig.arity(rel) {
                    None => err = err.clone().or(Some(LogicError::UnknownRelation(rel.clone()))),
                    Some(a) if a != args.len() => {
                        err = err.clone().or(Some(LogicError::ArityMismatch {
                            name: rel.clone(),
                            expected: a,
                            found: args.len(),
                        }))
                    }
                    _ => {}
                }
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    f.relation_symbols()?;
    Ok(())
}

/// Reads a formula file: one formula per non-empty line, `#` starts a comment.
pub fn parse_formula_file(
    text: &str,
    fragment: Fragment,
    signature: Option<&Signature>,
) -> Result<Vec<Formula>, LogicError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f = parse_formula(line, fragment, signature).map_err(|e| LogicError::File {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(f);
    }
    Ok(out)
}

/// Number of lexical tokens in the printed form of `f`.
pub fn token_count(f: &Formula) -> usize {
    lex(&f.to_string()).map_or(0, |t| t.len())
}

/// Signature of the non-order relation symbols occurring in `f`.
pub fn infer_signature(f: &Formula) -> Result<Signature, LogicError> {
    let mut sig = Signature::new();
    for (name, arity) in f.relation_symbols()? {
        sig.add_relation(&name, arity).map_err(|e| LogicError::Parse {
            offset: 0,
            message: e.to_string(),
        })?;
    }
    Ok(sig)
}
