//! Plain-text structure files.
//!
//! ```text
//! # comment
//! signature P/1 E/2
//! domain 3
//! rel P 0
//! rel E 0 1
//! const c 2
//! order < : 2 0 1
//! ```
//!
//! `signature` is optional; when absent, arities are inferred from the first
//! `rel` line of each symbol. `domain` must precede every line that mentions
//! elements. An order may alternatively be listed pairwise (`rel <0 a b`), in
//! which case the pairs must form a strict linear order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::structure::{
    is_order_name, Element, LinearOrder, Signature, Structure, StructureError,
};

fn parse_err(line: usize, message: impl Into<String>) -> StructureError {
    StructureError::Parse {
        line,
        message: message.into(),
    }
}

enum Line<'a> {
    Rel(&'a str, Vec<Element>),
    Const(&'a str, Element),
    Order(&'a str, Vec<Element>),
}

fn parse_elements(line: usize, words: &[&str], size: usize) -> Result<Vec<Element>, StructureError> {
    words
        .iter()
        .map(|w| {
            let e: Element = w
                .parse()
                .map_err(|_| parse_err(line, format!("expected an element, found `{w}`")))?;
            if e >= size {
                return Err(parse_err(
                    line,
                    format!("element {e} out of range for domain of size {size}"),
                ));
            }
            Ok(e)
        })
        .collect()
}

/// Parses a structure file.
pub fn parse_structure(text: &str) -> Result<Structure, StructureError> {
    let mut declared: Option<Signature> = None;
    let mut size: Option<usize> = None;
    let mut lines: Vec<(usize, Line)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words[0] {
            "signature" => {
                if declared.is_some() {
                    return Err(parse_err(lineno, "signature declared twice"));
                }
                let mut sig = Signature::new();
                for w in &words[1..] {
                    let (name, arity) = w
                        .split_once('/')
                        .ok_or_else(|| parse_err(lineno, format!("expected NAME/ARITY, found `{w}`")))?;
                    let arity: usize = arity
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad arity in `{w}`")))?;
                    sig.add_relation(name, arity)
                        .map_err(|e| parse_err(lineno, e.to_string()))?;
                }
                declared = Some(sig);
            }
            "domain" => {
                if size.is_some() {
                    return Err(parse_err(lineno, "domain declared twice"));
                }
                let n: usize = match words.as_slice() {
                    [_, n] => n
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad domain size `{n}`")))?,
                    _ => return Err(parse_err(lineno, "expected `domain N`")),
                };
                if n == 0 {
                    return Err(parse_err(lineno, "domain must be non-empty"));
                }
                size = Some(n);
            }
            kw @ ("rel" | "const" | "order") => {
                let n = size.ok_or_else(|| parse_err(lineno, "`domain` must come first"))?;
                if words.len() < 2 {
                    return Err(parse_err(lineno, format!("`{kw}` needs a symbol name")));
                }
                let name = words[1];
                let parsed = match kw {
                    "rel" => {
                        if words.len() < 3 {
                            return Err(parse_err(lineno, "`rel` needs at least one element"));
                        }
                        Line::Rel(name, parse_elements(lineno, &words[2..], n)?)
                    }
                    "const" => {
                        if words.len() != 3 {
                            return Err(parse_err(lineno, "expected `const NAME ELEMENT`"));
                        }
                        Line::Const(name, parse_elements(lineno, &words[2..], n)?[0])
                    }
                    _ => {
                        if !is_order_name(name) {
                            return Err(parse_err(lineno, format!("`{name}` is not an order symbol")));
                        }
                        let rest = match words.get(2) {
                            Some(&":") => &words[3..],
                            _ => return Err(parse_err(lineno, "expected `order NAME : e0 .. e_{n-1}`")),
                        };
                        Line::Order(name, parse_elements(lineno, rest, n)?)
                    }
                };
                lines.push((lineno, parsed));
            }
            other => return Err(parse_err(lineno, format!("unknown keyword `{other}`"))),
        }
    }
    let n = size.ok_or_else(|| parse_err(0, "missing `domain` line"))?;

    let explicit = declared.is_some();
    let mut sig = declared.unwrap_or_default();
    for (lineno, l) in &lines {
        match l {
            Line::Rel(name, tuple) if !is_order_name(name) => match sig.arity(name) {
                Some(a) if a != tuple.len() => {
                    return Err(parse_err(
                        *lineno,
                        format!("relation `{name}` has arity {a} but {} elements were given", tuple.len()),
                    ))
                }
                Some(_) => {}
                None if explicit => {
                    return Err(parse_err(*lineno, format!("relation `{name}` is not in the signature")))
                }
                None => sig
                    .add_relation(name, tuple.len())
                    .map_err(|e| parse_err(*lineno, e.to_string()))?,
            },
            Line::Const(name, _) => {
                if sig.constant_index(name).is_some() {
                    return Err(parse_err(*lineno, format!("constant `{name}` set twice")));
                }
                sig.add_constant(name)
                    .map_err(|e| parse_err(*lineno, e.to_string()))?;
            }
            _ => {}
        }
    }

    let mut s = Structure::new(sig, n)?;
    let mut pair_orders: BTreeMap<String, (usize, Vec<(Element, Element)>)> = BTreeMap::new();
    for (lineno, l) in lines {
        match l {
            Line::Rel(name, tuple) if is_order_name(name) => {
                if tuple.len() != 2 {
                    return Err(parse_err(lineno, format!("order `{name}` is binary")));
                }
                if s.order(name).is_some() {
                    return Err(parse_err(lineno, format!("order `{name}` declared twice")));
                }
                pair_orders
                    .entry(name.to_string())
                    .or_insert((lineno, Vec::new()))
                    .1
                    .push((tuple[0], tuple[1]));
            }
            Line::Rel(name, tuple) => {
                s.insert(name, &tuple)
                    .map_err(|e| parse_err(lineno, e.to_string()))?;
            }
            Line::Const(name, e) => s
                .set_constant(name, e)
                .map_err(|e| parse_err(lineno, e.to_string()))?,
            Line::Order(name, seq) => {
                if s.order(name).is_some() || pair_orders.contains_key(name) {
                    return Err(parse_err(lineno, format!("order `{name}` declared twice")));
                }
                if seq.len() != n {
                    return Err(parse_err(
                        lineno,
                        format!("order `{name}` lists {} elements, domain has {n}", seq.len()),
                    ));
                }
                let ord = LinearOrder::from_sequence(seq)
                    .map_err(|_| parse_err(lineno, format!("order `{name}` is not a permutation of the domain")))?;
                s.set_order(name, ord)?;
            }
        }
    }
    for (name, (lineno, pairs)) in pair_orders {
        let ord = order_from_pairs(n, &pairs)
            .ok_or_else(|| parse_err(lineno, format!("relation `{name}` is not a strict linear order")))?;
        s.set_order(&name, ord)?;
    }
    Ok(s)
}

/// Validates a set of pairs as a strict linear order on `0..n`.
pub fn order_from_pairs(n: usize, pairs: &[(Element, Element)]) -> Option<LinearOrder> {
    let mut less = vec![vec![false; n]; n];
    for &(a, b) in pairs {
        less[a][b] = true;
    }
    for a in 0..n {
        if less[a][a] {
            return None;
        }
        for b in 0..n {
            if a != b && less[a][b] == less[b][a] {
                return None;
            }
            for c in 0..n {
                if less[a][b] && less[b][c] && !less[a][c] {
                    return None;
                }
            }
        }
    }
    let ranks: Vec<usize> = (0..n)
        .map(|a| (0..n).filter(|&b| less[b][a]).count())
        .collect();
    LinearOrder::from_ranks(&ranks).ok()
}

/// Prints a structure in the format accepted by [`parse_structure`].
pub fn print_structure(s: &Structure) -> String {
    let mut out = String::new();
    let sig = s.signature();
    if !sig.relations().is_empty() {
        let _ = writeln!(out, "signature {sig}");
    }
    let _ = writeln!(out, "domain {}", s.size());
    for (rel, sym) in sig.relations().iter().enumerate() {
        for t in s.tuples(rel) {
            let elems: Vec<String> = t.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "rel {} {}", sym.name, elems.join(" "));
        }
    }
    for (c, v) in sig.constants().iter().zip(s.constant_values()) {
        let _ = writeln!(out, "const {c} {v}");
    }
    for (name, ord) in s.orders() {
        let _ = writeln!(out, "order {name} : {ord}");
    }
    out
}
