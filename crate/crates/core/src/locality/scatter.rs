//! Selection of scattered occurrences.
//!
//! Colours the `delta`-th power of the Gaifman graph greedily (at most
//! `d^delta + 1` colours when the degree is `d`), then, class by class, takes
//! same-coloured elements outside the closed `delta`-neighbourhood of
//! everything chosen so far. Same-coloured elements are pairwise more than
//! `delta` apart.

use std::collections::BTreeMap;

use super::LocalityError;
use crate::structure::{Element, GaifmanGraph, Structure};

fn power_coloring(g: &GaifmanGraph, delta: usize) -> Vec<usize> {
    let n = g.len();
    let mut color = vec![usize::MAX; n];
    for a in 0..n {
        let dist = g.bfs(&[a], delta);
        let used: Vec<usize> = (0..n)
            .filter(|&b| b != a && dist[b] <= delta && color[b] != usize::MAX)
            .map(|b| color[b])
            .collect();
        color[a] = (0..).find(|c| !used.contains(c)).expect("unbounded range");
    }
    color
}

/// `m` elements of each class, pairwise more than `delta` apart and more
/// than `delta` away from every element of `b`.
pub fn scatter_select(
    s: &Structure,
    b: &[Element],
    classes: &[Vec<Element>],
    m: usize,
    delta: usize,
) -> Result<Vec<Vec<Element>>, LocalityError> {
    let counts = vec![m; classes.len()];
    scatter_select_counts(s, b, classes, &counts, delta)
}

/// As [`scatter_select`], with `counts[j]` elements from class `j`.
pub fn scatter_select_counts(
    s: &Structure,
    b: &[Element],
    classes: &[Vec<Element>],
    counts: &[usize],
    delta: usize,
) -> Result<Vec<Vec<Element>>, LocalityError> {
    for &e in b.iter().chain(classes.iter().flatten()) {
        super::check_element(s, e)?;
    }
    let g = s.without_orders().gaifman();
    let color = power_coloring(&g, delta);
    let mut chosen_all: Vec<Element> = b.to_vec();
    let mut out = Vec::with_capacity(classes.len());
    for (j, (class, &need)) in classes.iter().zip(counts).enumerate() {
        let dist = g.bfs(&chosen_all, delta);
        let free: Vec<Element> = {
            let mut v: Vec<Element> = class.iter().copied().filter(|&e| dist[e] > delta).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut by_color: BTreeMap<usize, Vec<Element>> = BTreeMap::new();
        for &e in &free {
            by_color.entry(color[e]).or_default().push(e);
        }
        let best = by_color
            .values()
            .max_by(|x, y| x.len().cmp(&y.len()).then_with(|| y[0].cmp(&x[0])));
        let picked: Vec<Element> = match best {
            Some(group) if group.len() >= need => group[..need].to_vec(),
            _ => {
                let mut picked: Vec<Element> = Vec::new();
                for &e in &free {
                    if picked.len() == need {
                        break;
                    }
                    let d = g.bfs(&[e], delta);
                    if picked.iter().all(|&p| d[p] > delta) {
                        picked.push(e);
                    }
                }
                if picked.len() < need {
                    return Err(LocalityError::ScatterFailure {
                        class: j,
                        found: picked.len(),
                        needed: need,
                    });
                }
                picked
            }
        };
        chosen_all.extend(&picked);
        out.push(picked);
    }
    Ok(out)
}
