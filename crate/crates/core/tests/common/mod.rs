#![allow(dead_code)]

use fo2inv::{Formula, Signature, Structure, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn graph_signature() -> Signature {
    Signature::new().with_relation("E", 2)
}

/// Undirected graph on `0..n` stored as a symmetric `E`.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let mut s = Structure::new(graph_signature(), n).unwrap();
    for &(a, b) in edges {
        s.insert("E", &[a, b]).unwrap();
        s.insert("E", &[b, a]).unwrap();
    }
    s
}

pub fn cycle(n: usize) -> Structure {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph(n, &edges)
}

pub fn path(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    graph(n, &edges)
}

/// `n` disjoint edges `2i -- 2i+1`.
pub fn matching(n: usize) -> Structure {
    let edges: Vec<_> = (0..n).map(|i| (2 * i, 2 * i + 1)).collect();
    graph(2 * n, &edges)
}

/// Disjoint union of graphs given as (size, edges).
pub fn disjoint(parts: &[Structure]) -> Structure {
    let total: usize = parts.iter().map(|p| p.size()).sum();
    let mut s = Structure::new(graph_signature(), total).unwrap();
    let mut off = 0;
    for p in parts {
        for t in p.tuples(0) {
            s.insert("E", &[t[0] + off, t[1] + off]).unwrap();
        }
        off += p.size();
    }
    s
}

/// Random undirected graph of maximum degree `d`.
pub fn random_bounded(n: usize, d: usize, tries: usize, seed: u64) -> Structure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deg = vec![0; n];
    let mut edges = Vec::new();
    for _ in 0..tries {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && deg[a] < d && deg[b] < d && !edges.contains(&(a.min(b), a.max(b))) {
            deg[a] += 1;
            deg[b] += 1;
            edges.push((a.min(b), a.max(b)));
        }
    }
    graph(n, &edges)
}

/// All-pairs distances by Floyd-Warshall over the symmetric `E`.
pub fn distances(s: &Structure) -> Vec<Vec<usize>> {
    let n = s.size();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (a, row) in d.iter_mut().enumerate() {
        row[a] = 0;
    }
    for t in s.tuples(0) {
        if t[0] != t[1] {
            d[t[0]][t[1]] = 1;
            d[t[1]][t[0]] = 1;
        }
    }
    for m in 0..n {
        for a in 0..n {
            for b in 0..n {
                if d[a][m] + d[m][b] < d[a][b] {
                    d[a][b] = d[a][m] + d[m][b];
                }
            }
        }
    }
    d
}

/// Random structure over `E/2` and `P/1` with `order` installed as `<` when given.
pub fn random_ep(n: usize, density: f64, rng: &mut ChaCha8Rng, ordered: bool) -> Structure {
    let sig = Signature::new().with_relation("E", 2).with_relation("P", 1);
    let mut s = Structure::new(sig, n).unwrap();
    for a in 0..n {
        if rng.gen_bool(0.5) {
            s.insert("P", &[a]).unwrap();
        }
        for b in 0..n {
            if rng.gen_bool(density) {
                s.insert("E", &[a, b]).unwrap();
            }
        }
    }
    if ordered {
        let mut seq: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(seq.as_mut_slice(), rng);
        s.set_order("<", fo2inv::LinearOrder::from_sequence(seq).unwrap()).unwrap();
    }
    s
}

/// Random two-variable formula over `E/2`, `P/1` and (optionally) `<`;
/// `counting` bounds the index of counting quantifiers (0 for none).
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize, with_order: bool, counting: usize) -> Formula {
    let x = Var::x();
    let y = Var::y();
    let var = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Var::x() } else { Var::y() };
    if depth == 0 {
        let (u, v) = (var(rng), var(rng));
        return match rng.gen_range(0..if with_order { 4 } else { 3 }) {
            0 => Formula::atom("P", &[&u]),
            1 => Formula::atom("E", &[&u, &v]),
            2 => Formula::eq(&x, &y),
            _ => Formula::atom("<", &[&u, &v]),
        };
    }
    match rng.gen_range(0..6) {
        0 => Formula::not(random_formula(rng, depth - 1, with_order, counting)),
        1 => Formula::and(
            random_formula(rng, depth - 1, with_order, counting),
            random_formula(rng, depth - 1, with_order, counting),
        ),
        2 => Formula::or(
            random_formula(rng, depth - 1, with_order, counting),
            random_formula(rng, depth - 1, with_order, counting),
        ),
        3 => Formula::forall(&var(rng), random_formula(rng, depth - 1, with_order, counting)),
        4 if counting >= 2 => Formula::count_exists(
            rng.gen_range(1..=counting),
            &var(rng),
            random_formula(rng, depth - 1, with_order, counting),
        ),
        _ => Formula::exists(&var(rng), random_formula(rng, depth - 1, with_order, counting)),
    }
}

/// Existentially closes the free variables of `phi`.
pub fn close(phi: Formula) -> Formula {
    let mut out = phi;
    for v in out.free_vars() {
        out = Formula::exists(&v, out);
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Disjoint union of `copies` copies of `part`.
pub fn copies(part: &Structure, copies: usize) -> Structure {
    disjoint(&vec![part.clone(); copies])
}

/// Star with `leaves` leaves around element 0.
pub fn star(leaves: usize) -> Structure {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    graph(leaves + 1, &edges)
}

/// Two structures of the same shape with the elements of the second shuffled.
pub fn shuffled(s: &Structure, seed: u64) -> Structure {
    let mut perm: Vec<usize> = (0..s.size()).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng(seed));
    s.relabel(&perm).unwrap()
}

/// Direct recursive evaluation over an assignment map; orders are looked up by name.
pub fn naive_eval(s: &Structure, phi: &Formula, env: &mut std::collections::HashMap<String, usize>) -> bool {
    match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { rel, args } => {
            let tuple: Vec<usize> = args.iter().map(|v| env[v.name()]).collect();
            match s.order(rel) {
                Some(o) => o.less(tuple[0], tuple[1]),
                None => s.holds(rel, &tuple).unwrap(),
            }
        }
        Formula::Eq(a, b) => env[a.name()] == env[b.name()],
        Formula::Not(f) => !naive_eval(s, f, env),
        Formula::And(a, b) => naive_eval(s, a, env) && naive_eval(s, b, env),
        Formula::Or(a, b) => naive_eval(s, a, env) || naive_eval(s, b, env),
        Formula::Implies(a, b) => !naive_eval(s, a, env) || naive_eval(s, b, env),
        Formula::Iff(a, b) => naive_eval(s, a, env) == naive_eval(s, b, env),
        Formula::Exists(v, f) => count_witnesses(s, v, f, env) >= 1,
        Formula::Forall(v, f) => count_witnesses(s, v, f, env) == s.size(),
        Formula::CountExists(k, v, f) => count_witnesses(s, v, f, env) >= *k,
    }
}

fn count_witnesses(s: &Structure, v: &Var, f: &Formula, env: &mut std::collections::HashMap<String, usize>) -> usize {
    let saved = env.get(v.name()).copied();
    let mut n = 0;
    for e in 0..s.size() {
        env.insert(v.name().to_string(), e);
        if naive_eval(s, f, env) {
            n += 1;
        }
    }
    match saved {
        Some(e) => env.insert(v.name().to_string(), e),
        None => env.remove(v.name()),
    };
    n
}

pub fn naive_sentence(s: &Structure, phi: &Formula) -> bool {
    naive_eval(s, phi, &mut std::collections::HashMap::new())
}
