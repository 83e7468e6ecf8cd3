//! Brute-force oracles shared by the integration tests. Everything here is
//! written against the raw relation sets, independent of the search code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fraisse_core::structure::Element;
use fraisse_core::FinStructure;
use rand::Rng;

pub fn permutations(n: usize) -> Vec<Vec<Element>> {
    fn go(cur: &mut Vec<Element>, used: &mut [bool], out: &mut Vec<Vec<Element>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Injective maps `0..k -> 0..n` in lexicographic order.
pub fn injections(k: usize, n: usize) -> Vec<Vec<Element>> {
    fn go(k: usize, n: usize, cur: &mut Vec<Element>, out: &mut Vec<Vec<Element>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in 0..n {
            if !cur.contains(&x) {
                cur.push(x);
                go(k, n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(k, n, &mut Vec::new(), &mut out);
    out
}

/// `map` preserves and reflects every relation.
pub fn is_embedding(source: &FinStructure, target: &FinStructure, map: &[Element]) -> bool {
    let k = source.size();
    if map.len() != k || map.iter().collect::<BTreeSet<_>>().len() != k {
        return false;
    }
    for (r, sym) in source.signature().relations().iter().enumerate() {
        for t in injections_with_repeats(sym.arity, k) {
            let image: Vec<Element> = t.iter().map(|&x| map[x]).collect();
            if source.relation(r).contains(&t) != target.relation(r).contains(&image) {
                return false;
            }
        }
    }
    true
}

fn injections_with_repeats(arity: usize, n: usize) -> Vec<Vec<Element>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn brute_embeddings(host: &FinStructure, pattern: &FinStructure) -> Vec<Vec<Element>> {
    injections(pattern.size(), host.size()).into_iter().filter(|m| is_embedding(pattern, host, m)).collect()
}

pub fn brute_isomorphic(a: &FinStructure, b: &FinStructure) -> bool {
    a.size() == b.size()
        && a.signature() == b.signature()
        && permutations(a.size()).iter().any(|p| is_embedding(a, b, p))
}

/// Smallest edge bitmask over all relabelings of a graph: an exact
/// isomorphism invariant for graphs.
pub fn brute_graph_code(g: &FinStructure) -> u64 {
    let n = g.size();
    permutations(n)
        .iter()
        .map(|p| {
            let mut code = 0u64;
            let mut bit = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if g.holds(0, &[p[i], p[j]]) {
                        code |= 1 << bit;
                    }
                    bit += 1;
                }
            }
            code
        })
        .min()
        .unwrap_or(0)
}

pub fn graph_from_mask(n: usize, mask: u64) -> FinStructure {
    let mut edges = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    FinStructure::graph(n, &edges).unwrap()
}

pub fn all_graphs(n: usize) -> Vec<FinStructure> {
    (0..1u64 << (n * n.saturating_sub(1) / 2)).map(|m| graph_from_mask(n, m)).collect()
}

pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> FinStructure {
    graph_from_mask(n, (0..n * n.saturating_sub(1) / 2).fold(0, |m, b| m | (u64::from(rng.gen_bool(p)) << b)))
}

/// Number of isomorphism types among `graphs`, via the brute-force code.
pub fn count_types(graphs: &[FinStructure]) -> usize {
    graphs.iter().map(brute_graph_code).collect::<BTreeSet<_>>().len()
}
