//! Embeddings, partial automorphisms and the backtracking search behind them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::structure::{Element, FinStructure, Incidence};

const UNSET: usize = usize::MAX;

/// An injective map between carriers that preserves and reflects every
/// relation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Embedding {
    source: Arc<FinStructure>,
    target: Arc<FinStructure>,
    map: Vec<Element>,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Embedding({:?})", self.map)
    }
}

impl Embedding {
    pub fn new(source: Arc<FinStructure>, target: Arc<FinStructure>, map: Vec<Element>) -> Result<Self> {
        check_embedding(&source, &target, &map).map_err(Error::NotAnEmbedding)?;
        Ok(Embedding { source, target, map })
    }

    pub(crate) fn new_unchecked(source: Arc<FinStructure>, target: Arc<FinStructure>, map: Vec<Element>) -> Self {
        debug_assert_eq!(check_embedding(&source, &target, &map), Ok(()));
        Embedding { source, target, map }
    }

    pub fn identity(structure: Arc<FinStructure>) -> Self {
        let map = (0..structure.size()).collect();
        Embedding { source: structure.clone(), target: structure, map }
    }

    pub fn source(&self) -> &FinStructure {
        &self.source
    }

    pub fn target(&self) -> &FinStructure {
        &self.target
    }

    pub fn source_arc(&self) -> &Arc<FinStructure> {
        &self.source
    }

    pub fn target_arc(&self) -> &Arc<FinStructure> {
        &self.target
    }

    pub fn map(&self) -> &[Element] {
        &self.map
    }

    pub fn apply(&self, e: Element) -> Element {
        self.map[e]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Embedding) -> Result<Embedding> {
        if inner.target != self.source {
            return Err(Error::CompositionMismatch);
        }
        let map = inner.map.iter().map(|&e| self.map[e]).collect();
        Ok(Embedding { source: inner.source.clone(), target: self.target.clone(), map })
    }

    /// Restriction to `subset` of the source, with the source replaced by the
    /// induced substructure on `subset`.
    pub fn restrict(&self, subset: &[Element]) -> Result<Embedding> {
        let sub = self.source.induced_substructure(subset)?;
        let mut elems = subset.to_vec();
        elems.sort_unstable();
        elems.dedup();
        let map = elems.iter().map(|&e| self.map[e]).collect();
        Ok(Embedding { source: Arc::new(sub), target: self.target.clone(), map })
    }

    /// `embed SRC->TGT: 0->3 1->5`
    pub fn serialize(&self, source_name: &str, target_name: &str) -> String {
        let mut s = format!("embed {source_name}->{target_name}:");
        for (a, b) in self.map.iter().enumerate() {
            s.push_str(&format!(" {a}->{b}"));
        }
        s
    }

    /// Parses one `embed` line; `resolve` maps structure names to structures.
    pub fn parse(line: &str, resolve: impl Fn(&str) -> Option<Arc<FinStructure>>) -> Result<Embedding> {
        let rest = line.trim().strip_prefix("embed ").ok_or_else(|| Error::parse(1, "expected `embed`"))?;
        let (names, pairs) = rest.split_once(':').ok_or_else(|| Error::parse(1, "missing `:`"))?;
        let (src, tgt) = names.trim().split_once("->").ok_or_else(|| Error::parse(1, "expected SRC->TGT"))?;
        let source = resolve(src.trim()).ok_or_else(|| Error::parse(1, format!("unknown structure {src}")))?;
        let target = resolve(tgt.trim()).ok_or_else(|| Error::parse(1, format!("unknown structure {tgt}")))?;
        let pairs = parse_pairs(pairs)?;
        let mut map = vec![UNSET; source.size()];
        for (a, b) in pairs {
            if a >= map.len() || map[a] != UNSET {
                return Err(Error::parse(1, format!("bad or repeated source element {a}")));
            }
            map[a] = b;
        }
        if map.contains(&UNSET) {
            return Err(Error::parse(1, "embedding is not total"));
        }
        Embedding::new(source, target, map)
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(Element, Element)>> {
    text.split_whitespace()
        .map(|p| {
            let (a, b) = p.split_once("->").ok_or_else(|| Error::parse(1, format!("bad pair {p}")))?;
            let a = a.parse().map_err(|_| Error::parse(1, format!("bad pair {p}")))?;
            let b = b.parse().map_err(|_| Error::parse(1, format!("bad pair {p}")))?;
            Ok((a, b))
        })
        .collect()
}

/// Exhaustive check that `map` is an embedding of `source` into `target`.
pub fn check_embedding(
    source: &FinStructure,
    target: &FinStructure,
    map: &[Element],
) -> std::result::Result<(), String> {
    if !source.same_signature(target) {
        return Err("signature mismatch".into());
    }
    if map.len() != source.size() {
        return Err(format!("map has {} entries for a source of size {}", map.len(), source.size()));
    }
    let mut inverse = vec![UNSET; target.size()];
    for (a, &b) in map.iter().enumerate() {
        if b >= target.size() {
            return Err(format!("{a}->{b} leaves the target carrier"));
        }
        if inverse[b] != UNSET {
            return Err(format!("not injective at {b}"));
        }
        inverse[b] = a;
    }
    for r in 0..source.signature().len() {
        for t in source.relation(r) {
            let image: Vec<_> = t.iter().map(|&e| map[e]).collect();
            if !target.holds(r, &image) {
                return Err(format!("tuple {t:?} not preserved"));
            }
        }
        for t in target.relation(r) {
            if t.iter().all(|&e| inverse[e] != UNSET) {
                let pre: Vec<_> = t.iter().map(|&e| inverse[e]).collect();
                if !source.holds(r, &pre) {
                    return Err(format!("tuple {t:?} not reflected"));
                }
            }
        }
    }
    Ok(())
}

/// Backtracking matcher for injective relation-preserving-and-reflecting maps
/// from `source` into `target`, with forward checking on every relation.
pub(crate) struct Matcher<'a> {
    source: &'a FinStructure,
    target: &'a FinStructure,
    src: Arc<Incidence>,
    tgt: Arc<Incidence>,
}

struct State {
    assign: Vec<Element>,
    inverse: Vec<Element>,
}

impl<'a> Matcher<'a> {
    pub fn new(source: &'a FinStructure, target: &'a FinStructure) -> Self {
        Matcher { source, target, src: source.incidence(), tgt: target.incidence() }
    }

    fn consistent(&self, st: &State, v: Element, x: Element) -> bool {
        if st.inverse[x] != UNSET {
            return false;
        }
        let image_of = |e: Element| if e == v { x } else { st.assign[e] };
        for (r, per) in self.src.by_element.iter().enumerate() {
            for &ti in &per[v] {
                let t = &self.src.tuples[r][ti as usize];
                if t.iter().all(|&e| e == v || st.assign[e] != UNSET) {
                    let image: Vec<_> = t.iter().map(|&e| image_of(e)).collect();
                    if !self.target.holds(r, &image) {
                        return false;
                    }
                }
            }
        }
        let preimage_of = |y: Element| if y == x { v } else { st.inverse[y] };
        for (r, per) in self.tgt.by_element.iter().enumerate() {
            for &ti in &per[x] {
                let t = &self.tgt.tuples[r][ti as usize];
                if t.iter().all(|&y| y == x || st.inverse[y] != UNSET) {
                    let pre: Vec<_> = t.iter().map(|&y| preimage_of(y)).collect();
                    if !self.source.holds(r, &pre) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn candidates(&self, st: &State, v: Element) -> Vec<Element> {
        // Narrow to co-occurrences with an already placed element when a
        // source tuple links `v` to one.
        for (r, per) in self.src.by_element.iter().enumerate() {
            for &ti in &per[v] {
                let t = &self.src.tuples[r][ti as usize];
                let Some(q) = t.iter().position(|&e| e != v && st.assign[e] != UNSET) else {
                    continue;
                };
                let Some(pv) = t.iter().position(|&e| e == v) else { continue };
                let anchor = st.assign[t[q]];
                let mut out: Vec<Element> = self.tgt.by_element[r][anchor]
                    .iter()
                    .map(|&i| &self.tgt.tuples[r][i as usize])
                    .filter(|tt| tt[q] == anchor)
                    .map(|tt| tt[pv])
                    .filter(|&y| st.inverse[y] == UNSET)
                    .collect();
                out.sort_unstable();
                out.dedup();
                return out;
            }
        }
        (0..self.target.size()).filter(|&y| st.inverse[y] == UNSET).collect()
    }

    fn place(st: &mut State, v: Element, x: Element) {
        st.assign[v] = x;
        st.inverse[x] = v;
    }

    fn unplace(st: &mut State, v: Element, x: Element) {
        st.assign[v] = UNSET;
        st.inverse[x] = UNSET;
    }

    fn recurse(
        &self,
        st: &mut State,
        order: &[Element],
        depth: usize,
        visit: &mut dyn FnMut(&[Element]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if depth == order.len() {
            return visit(&st.assign);
        }
        let v = order[depth];
        for x in self.candidates(st, v) {
            if self.consistent(st, v, x) {
                Self::place(st, v, x);
                let flow = self.recurse(st, order, depth + 1, visit);
                Self::unplace(st, v, x);
                flow?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Visits every embedding extending `fixed`, in lexicographic order of
    /// the free variables (taken in ascending order).
    pub fn search(&self, fixed: &[Option<Element>], visit: &mut dyn FnMut(&[Element]) -> ControlFlow<()>) {
        let n = self.source.size();
        if n > self.target.size() || !self.source.same_signature(self.target) {
            return;
        }
        let mut st = State { assign: vec![UNSET; n], inverse: vec![UNSET; self.target.size()] };
        for (v, x) in fixed.iter().enumerate() {
            if let Some(x) = *x {
                if x >= self.target.size() || !self.consistent(&st, v, x) {
                    return;
                }
                Self::place(&mut st, v, x);
            }
        }
        let order: Vec<Element> = (0..n).filter(|&v| st.assign[v] == UNSET).collect();
        let _ = self.recurse(&mut st, &order, 0, visit);
    }

    fn first_level(&self) -> Vec<Element> {
        let st = State { assign: vec![UNSET; self.source.size()], inverse: vec![UNSET; self.target.size()] };
        self.candidates(&st, 0).into_iter().filter(|&x| self.consistent(&st, 0, x)).collect()
    }
}

/// All embeddings of `pattern` into `host`, in lexicographic order of the
/// image sequence. The search is split over the image of element 0; the
/// merged order does not depend on the thread pool.
pub fn enumerate_embeddings(host: &Arc<FinStructure>, pattern: &Arc<FinStructure>) -> Vec<Embedding> {
    enumerate_maps(host, pattern)
        .into_iter()
        .map(|map| Embedding { source: pattern.clone(), target: host.clone(), map })
        .collect()
}

pub(crate) fn enumerate_maps(host: &FinStructure, pattern: &FinStructure) -> Vec<Vec<Element>> {
    let matcher = Matcher::new(pattern, host);
    if pattern.size() == 0 {
        return if pattern.same_signature(host) { vec![Vec::new()] } else { Vec::new() };
    }
    if pattern.size() > host.size() || !pattern.same_signature(host) {
        return Vec::new();
    }
    let firsts = matcher.first_level();
    let chunks: Vec<Vec<Vec<Element>>> = firsts
        .par_iter()
        .map(|&x| {
            let mut fixed = vec![None; pattern.size()];
            fixed[0] = Some(x);
            let mut out = Vec::new();
            matcher.search(&fixed, &mut |m| {
                out.push(m.to_vec());
                ControlFlow::Continue(())
            });
            out
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Whether `pattern` embeds into `host` at all.
pub fn embeds(host: &FinStructure, pattern: &FinStructure) -> bool {
    first_embedding(host, pattern).is_some()
}

pub(crate) fn first_embedding(host: &FinStructure, pattern: &FinStructure) -> Option<Vec<Element>> {
    let mut found = None;
    Matcher::new(pattern, host).search(&vec![None; pattern.size()], &mut |m| {
        found = Some(m.to_vec());
        ControlFlow::Break(())
    });
    found
}

/// A partial injective map of a structure into itself that preserves and
/// reflects every relation between its domain and its image.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialAutomorphism {
    structure: Arc<FinStructure>,
    map: BTreeMap<Element, Element>,
}

impl fmt::Debug for PartialAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialAutomorphism({:?})", self.map)
    }
}

impl PartialAutomorphism {
    pub fn new(structure: Arc<FinStructure>, map: BTreeMap<Element, Element>) -> Result<Self> {
        check_partial(&structure, &map).map_err(Error::NotAPartialAutomorphism)?;
        Ok(PartialAutomorphism { structure, map })
    }

    pub fn empty(structure: Arc<FinStructure>) -> Self {
        PartialAutomorphism { structure, map: BTreeMap::new() }
    }

    pub fn identity_on(structure: Arc<FinStructure>, elements: impl IntoIterator<Item = Element>) -> Result<Self> {
        let map = elements.into_iter().map(|e| (e, e)).collect();
        Self::new(structure, map)
    }

    pub fn structure(&self) -> &FinStructure {
        &self.structure
    }

    pub fn structure_arc(&self) -> &Arc<FinStructure> {
        &self.structure
    }

    pub fn map(&self) -> &BTreeMap<Element, Element> {
        &self.map
    }

    pub fn get(&self, e: Element) -> Option<Element> {
        self.map.get(&e).copied()
    }

    pub fn covers(&self, e: Element) -> bool {
        self.map.contains_key(&e)
    }

    pub fn is_total(&self) -> bool {
        self.map.len() == self.structure.size()
    }

    /// The left action `g·h = g∘h`.
    pub fn apply_to(&self, h: &Embedding) -> Result<Embedding> {
        if h.target != self.structure {
            return Err(Error::CompositionMismatch);
        }
        let map = h.map.iter().map(|&e| self.get(e).ok_or(Error::DomainNotCovered(e))).collect::<Result<Vec<_>>>()?;
        Ok(Embedding::new_unchecked(h.source.clone(), h.target.clone(), map))
    }

    /// `pauto NAME: 3->7 5->5`
    pub fn serialize(&self, name: &str) -> String {
        let mut s = format!("pauto {name}:");
        for (a, b) in &self.map {
            s.push_str(&format!(" {a}->{b}"));
        }
        s
    }

    pub fn parse(line: &str, resolve: impl Fn(&str) -> Option<Arc<FinStructure>>) -> Result<Self> {
        let rest = line.trim().strip_prefix("pauto ").ok_or_else(|| Error::parse(1, "expected `pauto`"))?;
        let (name, pairs) = rest.split_once(':').ok_or_else(|| Error::parse(1, "missing `:`"))?;
        let structure = resolve(name.trim()).ok_or_else(|| Error::parse(1, format!("unknown structure {name}")))?;
        let mut map = BTreeMap::new();
        for (a, b) in parse_pairs(pairs)? {
            if map.insert(a, b).is_some() {
                return Err(Error::parse(1, format!("element {a} mapped twice")));
            }
        }
        Self::new(structure, map)
    }
}

fn check_partial(structure: &FinStructure, map: &BTreeMap<Element, Element>) -> std::result::Result<(), String> {
    let n = structure.size();
    let mut inverse = vec![UNSET; n];
    for (&a, &b) in map {
        if a >= n || b >= n {
            return Err(format!("{a}->{b} leaves the carrier"));
        }
        if inverse[b] != UNSET {
            return Err(format!("not injective at {b}"));
        }
        inverse[b] = a;
    }
    for r in 0..structure.signature().len() {
        for t in structure.relation(r) {
            if t.iter().all(|e| map.contains_key(e)) {
                let image: Vec<_> = t.iter().map(|e| map[e]).collect();
                if !structure.holds(r, &image) {
                    return Err(format!("tuple {t:?} not preserved"));
                }
            }
            if t.iter().all(|&e| inverse[e] != UNSET) {
                let pre: Vec<_> = t.iter().map(|&e| inverse[e]).collect();
                if !structure.holds(r, &pre) {
                    return Err(format!("tuple {t:?} not reflected"));
                }
            }
        }
    }
    Ok(())
}

pub fn compose_embeddings(outer: &Embedding, inner: &Embedding) -> Result<Embedding> {
    outer.compose(inner)
}

pub fn apply_partial(g: &PartialAutomorphism, h: &Embedding) -> Result<Embedding> {
    g.apply_to(h)
}

/// Union of partial automorphisms with pairwise disjoint domains and images.
pub fn union_partials(parts: &[PartialAutomorphism]) -> Result<PartialAutomorphism> {
    let first =
        parts.first().ok_or_else(|| Error::ParameterOutOfRange("union of zero partial automorphisms".into()))?;
    let structure = first.structure.clone();
    let mut map = BTreeMap::new();
    let mut images = vec![false; structure.size()];
    for p in parts {
        if p.structure != structure {
            return Err(Error::SignatureMismatch);
        }
        for (&a, &b) in &p.map {
            if map.insert(a, b).is_some() {
                return Err(Error::DomainOverlap(a));
            }
            if std::mem::replace(&mut images[b], true) {
                return Err(Error::DomainOverlap(b));
            }
        }
    }
    PartialAutomorphism::new(structure, map)
}

/// Backtracking search for a total automorphism agreeing with `g` on its
/// domain. `None` means no extension exists inside `g`'s structure.
pub fn extend_partial_to_automorphism(g: &PartialAutomorphism) -> Option<PartialAutomorphism> {
    let f = &*g.structure;
    let mut fixed = vec![None; f.size()];
    for (&a, &b) in &g.map {
        fixed[a] = Some(b);
    }
    let mut found = None;
    Matcher::new(f, f).search(&fixed, &mut |m| {
        found = Some(m.to_vec());
        ControlFlow::Break(())
    });
    found.map(|m| PartialAutomorphism { structure: g.structure.clone(), map: m.into_iter().enumerate().collect() })
}
