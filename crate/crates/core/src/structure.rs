//! Finite relational structures over an explicit relational signature.
//!
//! Carriers are always initial segments `0..n` of the naturals, so every map
//! between structures is a plain index vector.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::embedding::Embedding;
use crate::error::{Error, Result};

pub type Element = usize;
pub type Tuple = Vec<Element>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Axioms {
    /// No tuple repeats an entry.
    pub irreflexive: bool,
    /// Closed under swapping the two entries (binary relations only).
    pub symmetric: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
    pub axioms: Axioms,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, arity: usize, axioms: Axioms) -> Self {
        RelationSymbol { name: name.into(), arity, axioms }
    }

    /// Whether `tuple` is allowed by the arity and axioms of this symbol.
    pub fn admits(&self, tuple: &[Element]) -> bool {
        if tuple.len() != self.arity {
            return false;
        }
        if self.axioms.irreflexive {
            for (i, a) in tuple.iter().enumerate() {
                if tuple[i + 1..].contains(a) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for RelationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)?;
        let mut flags = Vec::new();
        if self.axioms.irreflexive {
            flags.push("ir");
        }
        if self.axioms.symmetric {
            flags.push("sym");
        }
        if !flags.is_empty() {
            write!(f, ":{}", flags.join("+"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    relations: Vec<RelationSymbol>,
}

impl Signature {
    pub fn new(relations: Vec<RelationSymbol>) -> Result<Self> {
        for (i, r) in relations.iter().enumerate() {
            if r.name.is_empty() || !r.name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::InvalidSignature(format!("bad relation name {:?}", r.name)));
            }
            if r.arity == 0 {
                return Err(Error::InvalidSignature(format!("{} has arity 0", r.name)));
            }
            if r.axioms.symmetric && r.arity != 2 {
                return Err(Error::InvalidSignature(format!("{} is symmetric but has arity {}", r.name, r.arity)));
            }
            if relations[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::InvalidSignature(format!("duplicate relation {}", r.name)));
            }
        }
        Ok(Signature { relations })
    }

    /// One irreflexive symmetric binary relation `E`.
    pub fn graph() -> Self {
        Signature { relations: vec![RelationSymbol::new("E", 2, Axioms { irreflexive: true, symmetric: true })] }
    }

    /// One irreflexive binary relation `L`, the language of strict orders.
    pub fn order() -> Self {
        Signature { relations: vec![RelationSymbol::new("L", 2, Axioms { irreflexive: true, symmetric: false })] }
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "signature")?;
        for r in &self.relations {
            write!(f, " {r}")?;
        }
        Ok(())
    }
}

impl FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        if words.next() != Some("signature") {
            return Err(Error::InvalidSignature("expected `signature`".into()));
        }
        let mut relations = Vec::new();
        for item in words {
            let (head, flags) = match item.split_once(':') {
                Some((h, fl)) => (h, Some(fl)),
                None => (item, None),
            };
            let (name, arity) = head
                .split_once('/')
                .ok_or_else(|| Error::InvalidSignature(format!("expected name/arity, got {item}")))?;
            let arity: usize = arity.parse().map_err(|_| Error::InvalidSignature(format!("bad arity in {item}")))?;
            let mut axioms = Axioms::default();
            if let Some(flags) = flags {
                for flag in flags.split('+') {
                    match flag {
                        "ir" => axioms.irreflexive = true,
                        "sym" => axioms.symmetric = true,
                        other => return Err(Error::InvalidSignature(format!("unknown flag {other}"))),
                    }
                }
            }
            relations.push(RelationSymbol::new(name, arity, axioms));
        }
        Signature::new(relations)
    }
}

/// For each relation and element, the indices (into the sorted tuple list) of
/// tuples mentioning that element.
#[derive(Debug)]
pub(crate) struct Incidence {
    pub tuples: Vec<Vec<Tuple>>,
    pub by_element: Vec<Vec<Vec<u32>>>,
}

#[derive(Clone)]
pub struct FinStructure {
    signature: Arc<Signature>,
    size: usize,
    relations: Vec<BTreeSet<Tuple>>,
    incidence: OnceLock<Arc<Incidence>>,
}

impl PartialEq for FinStructure {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size && self.relations == other.relations && self.signature == other.signature
    }
}

impl Eq for FinStructure {}

impl std::hash::Hash for FinStructure {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.signature.hash(state);
        self.size.hash(state);
        self.relations.hash(state);
    }
}

impl fmt::Debug for FinStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinStructure({})", self.to_string().replace('\n', "; "))
    }
}

impl FinStructure {
    /// Builds a structure and checks every signature axiom.
    pub fn new(signature: Arc<Signature>, size: usize, relations: Vec<BTreeSet<Tuple>>) -> Result<Self> {
        if relations.len() != signature.len() {
            return Err(Error::InvalidStructure(format!(
                "{} relation sets for a signature of {} symbols",
                relations.len(),
                signature.len()
            )));
        }
        for (sym, set) in signature.relations().iter().zip(&relations) {
            for t in set {
                if t.len() != sym.arity {
                    return Err(Error::InvalidStructure(format!("{}: tuple {t:?} has wrong arity", sym.name)));
                }
                if let Some(&e) = t.iter().find(|&&e| e >= size) {
                    return Err(Error::InvalidSubset { element: e, carrier: size });
                }
                if !sym.admits(t) {
                    return Err(Error::InvalidStructure(format!("{}: tuple {t:?} violates irreflexivity", sym.name)));
                }
                if sym.axioms.symmetric && !set.contains(&vec![t[1], t[0]]) {
                    return Err(Error::InvalidStructure(format!("{}: tuple {t:?} has no symmetric partner", sym.name)));
                }
            }
        }
        Ok(Self::from_parts(signature, size, relations))
    }

    /// Like [`FinStructure::new`], but closes symmetric relations first.
    pub fn from_tuples(
        signature: Arc<Signature>,
        size: usize,
        tuples: impl IntoIterator<Item = (usize, Tuple)>,
    ) -> Result<Self> {
        let mut relations = vec![BTreeSet::new(); signature.len()];
        for (r, t) in tuples {
            let sym = signature
                .relations()
                .get(r)
                .ok_or_else(|| Error::InvalidStructure(format!("relation index {r} out of range")))?;
            if sym.axioms.symmetric && t.len() == 2 {
                relations[r].insert(vec![t[1], t[0]]);
            }
            relations[r].insert(t);
        }
        Self::new(signature, size, relations)
    }

    pub(crate) fn from_parts(signature: Arc<Signature>, size: usize, relations: Vec<BTreeSet<Tuple>>) -> Self {
        FinStructure { signature, size, relations, incidence: OnceLock::new() }
    }

    pub fn empty(signature: Arc<Signature>, size: usize) -> Self {
        let relations = vec![BTreeSet::new(); signature.len()];
        Self::from_parts(signature, size, relations)
    }

    /// A simple graph on `n` vertices.
    pub fn graph(n: usize, edges: &[(Element, Element)]) -> Result<Self> {
        Self::from_tuples(Arc::new(Signature::graph()), n, edges.iter().map(|&(a, b)| (0, vec![a, b])))
    }

    pub fn complete_graph(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::graph(n, &edges).expect("complete graph is valid")
    }

    pub fn path_graph(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|b| (b - 1, b)).collect();
        Self::graph(n, &edges).expect("path graph is valid")
    }

    /// The strict order `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let tuples = (0..n).flat_map(|a| (a + 1..n).map(move |b| (0, vec![a, b])));
        Self::from_tuples(Arc::new(Signature::order()), n, tuples).expect("chain is valid")
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn signature_arc(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, r: usize) -> &BTreeSet<Tuple> {
        &self.relations[r]
    }

    pub fn relations(&self) -> &[BTreeSet<Tuple>] {
        &self.relations
    }

    pub fn holds(&self, r: usize, tuple: &[Element]) -> bool {
        self.relations[r].contains(tuple)
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(BTreeSet::len).sum()
    }

    pub fn same_signature(&self, other: &FinStructure) -> bool {
        Arc::ptr_eq(&self.signature, &other.signature) || self.signature == other.signature
    }

    pub(crate) fn incidence(&self) -> Arc<Incidence> {
        self.incidence
            .get_or_init(|| {
                let tuples: Vec<Vec<Tuple>> = self.relations.iter().map(|s| s.iter().cloned().collect()).collect();
                let by_element = tuples
                    .iter()
                    .map(|ts| {
                        let mut per = vec![Vec::new(); self.size];
                        for (i, t) in ts.iter().enumerate() {
                            let mut seen: Vec<Element> = Vec::with_capacity(t.len());
                            for &e in t {
                                if !seen.contains(&e) {
                                    seen.push(e);
                                    per[e].push(i as u32);
                                }
                            }
                        }
                        per
                    })
                    .collect();
                Arc::new(Incidence { tuples, by_element })
            })
            .clone()
    }

    /// The substructure induced on `subset`, re-indexed in increasing order
    /// of the original elements.
    pub fn induced_substructure(&self, subset: &[Element]) -> Result<FinStructure> {
        let mut elems: Vec<Element> = subset.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if let Some(&e) = elems.iter().find(|&&e| e >= self.size) {
            return Err(Error::InvalidSubset { element: e, carrier: self.size });
        }
        let mut index = vec![usize::MAX; self.size];
        for (i, &e) in elems.iter().enumerate() {
            index[e] = i;
        }
        let relations = self
            .relations
            .iter()
            .map(|set| {
                set.iter()
                    .filter(|t| t.iter().all(|&e| index[e] != usize::MAX))
                    .map(|t| t.iter().map(|&e| index[e]).collect())
                    .collect()
            })
            .collect();
        Ok(Self::from_parts(self.signature.clone(), elems.len(), relations))
    }

    /// Relabels the carrier: element `e` becomes `perm[e]`. `perm` must be a
    /// permutation of `0..size`.
    pub fn permuted(&self, perm: &[Element]) -> FinStructure {
        debug_assert_eq!(perm.len(), self.size);
        let relations = self
            .relations
            .iter()
            .map(|set| set.iter().map(|t| t.iter().map(|&e| perm[e]).collect()).collect())
            .collect();
        Self::from_parts(self.signature.clone(), self.size, relations)
    }

    /// Copies `other` into a fresh block after this structure's carrier, with
    /// no tuples mixing the two blocks.
    pub fn free_join(&self, other: &FinStructure) -> Result<FinStructure> {
        if !self.same_signature(other) {
            return Err(Error::SignatureMismatch);
        }
        let offset = self.size;
        let relations = self
            .relations
            .iter()
            .zip(&other.relations)
            .map(|(mine, theirs)| {
                let mut set = mine.clone();
                set.extend(theirs.iter().map(|t| t.iter().map(|&e| e + offset).collect::<Tuple>()));
                set
            })
            .collect();
        Ok(Self::from_parts(self.signature.clone(), self.size + other.size, relations))
    }

    /// Free join of `copies` copies of `self`; copy `c` occupies
    /// `c*size..(c+1)*size`.
    pub fn free_power(&self, copies: usize) -> FinStructure {
        let n = self.size;
        let relations = self
            .relations
            .iter()
            .map(|set| {
                (0..copies).flat_map(|c| set.iter().map(move |t| t.iter().map(|&e| e + c * n).collect())).collect()
            })
            .collect();
        Self::from_parts(self.signature.clone(), n * copies, relations)
    }

    /// Adds one new element whose tuples are exactly `tuples` (each must
    /// mention the new element `self.size()`).
    pub(crate) fn with_new_point(&self, tuples: &[(usize, Tuple)]) -> FinStructure {
        let mut relations = self.relations.clone();
        for (r, t) in tuples {
            relations[*r].insert(t.clone());
        }
        Self::from_parts(self.signature.clone(), self.size + 1, relations)
    }
}

/// Free amalgam of `B` and `C` over their common source `A`: `B ⊔ C` with
/// `f1(a)` and `f2(a)` identified and no other relations.
///
/// `D` lists `B`'s elements first (same indices), then the elements of `C`
/// outside `f2(A)` in increasing order.
pub fn free_amalgam(f1: &Embedding, f2: &Embedding) -> Result<(Arc<FinStructure>, Embedding, Embedding)> {
    if f1.source() != f2.source() {
        return Err(Error::AmalgamationBaseMismatch);
    }
    let b = f1.target();
    let c = f2.target();
    if !b.same_signature(c) || !b.same_signature(f1.source()) {
        return Err(Error::SignatureMismatch);
    }
    let mut c_to_d = vec![usize::MAX; c.size()];
    for (a, &cb) in f2.map().iter().enumerate() {
        c_to_d[cb] = f1.map()[a];
    }
    let mut next = b.size();
    for slot in c_to_d.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    let relations = b
        .relations()
        .iter()
        .zip(c.relations())
        .map(|(bs, cs)| {
            let mut set = bs.clone();
            set.extend(cs.iter().map(|t| t.iter().map(|&e| c_to_d[e]).collect::<Tuple>()));
            set
        })
        .collect();
    let d = Arc::new(FinStructure::from_parts(b.signature_arc().clone(), next, relations));
    let g1 = Embedding::new_unchecked(f1.target_arc().clone(), d.clone(), (0..b.size()).collect());
    let g2 = Embedding::new_unchecked(f2.target_arc().clone(), d.clone(), c_to_d);
    Ok((d, g1, g2))
}

impl fmt::Display for FinStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.signature)?;
        write!(f, "carrier {}", self.size)?;
        for (sym, set) in self.signature.relations().iter().zip(&self.relations) {
            write!(f, "\n{}:", sym.name)?;
            for t in set {
                let parts: Vec<String> = t.iter().map(ToString::to_string).collect();
                write!(f, " ({})", parts.join(","))?;
            }
        }
        Ok(())
    }
}

/// Parses the body of a structure (`carrier N` and relation lines) against a
/// known signature. `lines` carry their 1-based line numbers for errors.
pub fn parse_structure_body(signature: Arc<Signature>, lines: &[(usize, &str)]) -> Result<FinStructure> {
    let mut iter = lines.iter().filter(|(_, l)| !l.trim().is_empty());
    let &(line_no, carrier_line) =
        iter.next().ok_or_else(|| Error::parse(lines.first().map_or(0, |l| l.0), "missing carrier line"))?;
    let size: usize = carrier_line
        .trim()
        .strip_prefix("carrier")
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| Error::parse(line_no, "expected `carrier N`"))?;
    let mut tuples = Vec::new();
    let mut seen = vec![false; signature.len()];
    for &(line_no, line) in iter {
        let (name, rest) = line.split_once(':').ok_or_else(|| Error::parse(line_no, "expected `name: (..) (..)`"))?;
        let r = signature
            .index_of(name.trim())
            .ok_or_else(|| Error::parse(line_no, format!("unknown relation {}", name.trim())))?;
        if std::mem::replace(&mut seen[r], true) {
            return Err(Error::parse(line_no, format!("relation {} listed twice", name.trim())));
        }
        let arity = signature.relations()[r].arity;
        let mut rest = rest.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .and_then(|s| s.split_once(')'))
                .ok_or_else(|| Error::parse(line_no, "malformed tuple"))?;
            let tuple: Tuple = body
                .0
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(line_no, format!("bad tuple entry in ({})", body.0)))?;
            if tuple.len() != arity {
                return Err(Error::parse(line_no, format!("tuple ({}) has wrong arity", body.0)));
            }
            if tuple.iter().any(|&e| e >= size) {
                return Err(Error::parse(line_no, format!("tuple ({}) leaves the carrier", body.0)));
            }
            tuples.push((r, tuple));
            rest = body.1.trim_start();
        }
    }
    FinStructure::from_tuples(signature, size, tuples).map_err(|e| Error::parse(line_no, e.to_string()))
}

impl FromStr for FinStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> =
            s.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty()).collect();
        let &(line_no, first) = lines.first().ok_or_else(|| Error::parse(1, "empty structure text"))?;
        let signature: Signature = first.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        parse_structure_body(Arc::new(signature), &lines[1..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induced_substructure_examples() {
        let k3 = FinStructure::complete_graph(3);
        assert_eq!(k3.induced_substructure(&[0, 1]).unwrap(), FinStructure::complete_graph(2));
        let empty = k3.induced_substructure(&[]).unwrap();
        assert_eq!(empty.size(), 0);
        assert_eq!(empty.tuple_count(), 0);
        let p3 = FinStructure::path_graph(3);
        let sub = p3.induced_substructure(&[0, 2]).unwrap();
        assert_eq!(sub, FinStructure::graph(2, &[]).unwrap());
        assert!(matches!(k3.induced_substructure(&[0, 3]), Err(Error::InvalidSubset { element: 3, carrier: 3 })));
    }

    #[test]
    fn free_join_examples() {
        let k2 = FinStructure::complete_graph(2);
        let j = k2.free_join(&k2).unwrap();
        assert_eq!(j.size(), 4);
        assert_eq!(j.relation(0).len(), 4); // two edges, both orientations
        assert!(!j.holds(0, &[1, 2]));
        let k3 = FinStructure::complete_graph(3);
        let v = FinStructure::graph(1, &[]).unwrap();
        assert_eq!(k3.free_join(&v).unwrap().relation(0).len(), 6);
        let e = FinStructure::graph(0, &[]).unwrap();
        assert_eq!(e.free_join(&k3).unwrap(), k3);
        assert!(matches!(k2.free_join(&FinStructure::chain(2)), Err(Error::SignatureMismatch)));
    }

    #[test]
    fn axioms_enforced() {
        assert!(FinStructure::graph(2, &[(0, 0)]).is_err());
        let sig = Arc::new(Signature::graph());
        let mut set = BTreeSet::new();
        set.insert(vec![0, 1]);
        assert!(FinStructure::new(sig, 2, vec![set]).is_err());
        assert!("signature T/3:sym".parse::<Signature>().is_err());
        assert!("signature E/2 E/2".parse::<Signature>().is_err());
        assert!("signature E/0".parse::<Signature>().is_err());
    }

    #[test]
    fn text_format() {
        let p3 = FinStructure::path_graph(3);
        let text = p3.to_string();
        assert_eq!(text, "signature E/2:ir+sym\ncarrier 3\nE: (0,1) (1,0) (1,2) (2,1)");
        assert_eq!(text.parse::<FinStructure>().unwrap(), p3);
        // one orientation is enough for symmetric relations
        let short: FinStructure = "signature E/2:ir+sym\ncarrier 3\nE: (0,1) (1,2)".parse().unwrap();
        assert_eq!(short, p3);
        let err = "signature E/2:ir+sym\ncarrier 3\nE: (0,1) (1,5)".parse::<FinStructure>();
        assert!(matches!(err, Err(Error::Parse { line: 3, .. })));
        let err = "signature E/2:ir+sym\ncarier 3".parse::<FinStructure>();
        assert!(matches!(err, Err(Error::Parse { line: 2, .. })));
    }
}
