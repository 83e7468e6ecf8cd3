//! Classes of finite structures given by forbidden substructures (plus an
//! optional built-in predicate), their amalgamation-type properties, and
//! finite approximants of their limits.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::canon::{canonical_form, canonical_representative, CanonicalForm};
use crate::embedding::{embeds, enumerate_embeddings, Embedding, Matcher};
use crate::error::{Error, Result};
use crate::structure::{free_amalgam, parse_structure_body, Element, FinStructure, Signature, Tuple};

/// Largest number of candidate tuples for which all structures of a given
/// size are enumerated by brute force.
pub const MAX_GENERATION_BITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Irreflexive, transitive, total binary relation (relation 0).
    LinearOrder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSpec {
    pub name: String,
    signature: Arc<Signature>,
    forbidden: Vec<FinStructure>,
    builtin: Option<Builtin>,
}

impl ClassSpec {
    pub fn new(
        name: impl Into<String>,
        signature: Arc<Signature>,
        forbidden: Vec<FinStructure>,
        builtin: Option<Builtin>,
    ) -> Result<Self> {
        if forbidden.iter().any(|f| f.signature() != &*signature) {
            return Err(Error::SignatureMismatch);
        }
        if builtin == Some(Builtin::LinearOrder) && signature.relations().first().map(|r| r.arity) != Some(2) {
            return Err(Error::InvalidSignature("linear_order needs a binary relation first in the signature".into()));
        }
        Ok(ClassSpec { name: name.into(), signature, forbidden, builtin })
    }

    pub fn graphs() -> Self {
        ClassSpec::new("graphs", Arc::new(Signature::graph()), Vec::new(), None).unwrap()
    }

    /// Graphs omitting the complete graph `K_n`.
    pub fn k_free(n: usize) -> Self {
        let kn = FinStructure::complete_graph(n);
        ClassSpec::new(format!("K{n}-free"), kn.signature_arc().clone(), vec![kn], None).unwrap()
    }

    pub fn linear_orders() -> Self {
        ClassSpec::new("linear-orders", Arc::new(Signature::order()), Vec::new(), Some(Builtin::LinearOrder)).unwrap()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn signature_arc(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn forbidden(&self) -> &[FinStructure] {
        &self.forbidden
    }

    pub fn builtin(&self) -> Option<Builtin> {
        self.builtin
    }

    /// Membership: signature, no forbidden substructure, built-in predicate.
    /// Signature axioms already hold for every constructed structure.
    pub fn is_member(&self, s: &FinStructure) -> bool {
        if s.signature() != &*self.signature {
            return false;
        }
        if let Some(Builtin::LinearOrder) = self.builtin {
            if !is_linear_order(s) {
                return false;
            }
        }
        !self.forbidden.iter().any(|f| embeds(s, f))
    }

    pub fn empty_structure(&self) -> FinStructure {
        FinStructure::empty(self.signature.clone(), 0)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim_end()))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        let mut iter = lines.iter().peekable();
        let &(n, header) = iter.next().ok_or_else(|| Error::parse(1, "empty class file"))?;
        let name = header
            .trim()
            .strip_prefix("class")
            .ok_or_else(|| Error::parse(n, "expected `class` header"))?
            .trim()
            .to_string();
        let &(n, sig_line) = iter.next().ok_or_else(|| Error::parse(n, "missing signature"))?;
        let signature: Arc<Signature> =
            Arc::new(sig_line.trim().parse().map_err(|e: Error| Error::parse(n, e.to_string()))?);
        let mut forbidden = Vec::new();
        let mut builtin = None;
        while let Some(&(n, line)) = iter.next() {
            let line = line.trim();
            if line == "forbid" {
                let mut body = Vec::new();
                while let Some(&&(m, l)) = iter.peek() {
                    let t = l.trim();
                    if t == "forbid" || t.starts_with("builtin") {
                        break;
                    }
                    body.push((m, t));
                    iter.next();
                }
                if body.first().is_some_and(|(_, l)| l.starts_with("signature")) {
                    let (m, l) = body.remove(0);
                    let sig: Signature = l.parse().map_err(|e: Error| Error::parse(m, e.to_string()))?;
                    if sig != *signature {
                        return Err(Error::parse(m, "forbidden structure signature differs from class"));
                    }
                }
                if body.is_empty() {
                    return Err(Error::parse(n, "empty forbid block"));
                }
                forbidden.push(parse_structure_body(signature.clone(), &body)?);
            } else if let Some(rest) = line.strip_prefix("builtin") {
                match rest.trim() {
                    "linear_order" => builtin = Some(Builtin::LinearOrder),
                    other => return Err(Error::parse(n, format!("unknown builtin {other:?}"))),
                }
            } else {
                return Err(Error::parse(n, format!("unexpected line {line:?}")));
            }
        }
        let name = if name.is_empty() { "class".to_string() } else { name };
        ClassSpec::new(name, signature, forbidden, builtin).map_err(|e| Error::parse(1, e.to_string()))
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class {}", self.name)?;
        write!(f, "{}", self.signature)?;
        for s in &self.forbidden {
            write!(f, "\nforbid")?;
            for line in s.to_string().lines().skip(1) {
                write!(f, "\n{line}")?;
            }
        }
        if let Some(Builtin::LinearOrder) = self.builtin {
            write!(f, "\nbuiltin linear_order")?;
        }
        Ok(())
    }
}

fn is_linear_order(s: &FinStructure) -> bool {
    let n = s.size();
    let lt = |a: Element, b: Element| s.holds(0, &[a, b]);
    for a in 0..n {
        if lt(a, a) {
            return false;
        }
        for b in 0..n {
            if a != b && lt(a, b) == lt(b, a) {
                return false;
            }
            if lt(a, b) && (0..n).any(|c| lt(b, c) && !lt(a, c)) {
                return false;
            }
        }
    }
    true
}

/// Candidate tuples for one relation on `0..size`, grouped so that a
/// symmetric pair is one choice.
fn tuple_universe(signature: &Signature, size: usize, must_contain: Option<Element>) -> Vec<(usize, Vec<Tuple>)> {
    let mut out = Vec::new();
    for (r, sym) in signature.relations().iter().enumerate() {
        let total = size.pow(sym.arity as u32);
        for code in 0..total {
            let mut rest = code;
            let mut t = vec![0; sym.arity];
            for slot in t.iter_mut().rev() {
                *slot = rest % size;
                rest /= size;
            }
            if must_contain.is_some_and(|e| !t.contains(&e)) || !sym.admits(&t) {
                continue;
            }
            if sym.axioms.symmetric {
                if t[0] < t[1] {
                    out.push((r, vec![t.clone(), vec![t[1], t[0]]]));
                } else if t[0] == t[1] {
                    out.push((r, vec![t]));
                }
            } else {
                out.push((r, vec![t]));
            }
        }
    }
    out
}

/// Members of size `size` from those of size `size - 1`: membership is
/// hereditary, so every member is a one-point extension of a smaller one.
fn next_level(spec: &ClassSpec, prev: &[FinStructure], size: usize) -> Result<Vec<FinStructure>> {
    if spec.builtin == Some(Builtin::LinearOrder) && spec.signature.len() == 1 {
        let chain = FinStructure::from_tuples(
            spec.signature.clone(),
            size,
            (0..size).flat_map(|a| (a + 1..size).map(move |b| (0, vec![a, b]))),
        )?;
        return Ok(if spec.is_member(&chain) { vec![canonical_representative(&chain).1] } else { Vec::new() });
    }
    let bits = tuple_universe(&spec.signature, size, Some(size - 1)).len();
    if bits > MAX_GENERATION_BITS {
        return Err(Error::ParameterOutOfRange(format!(
            "{bits} candidate tuples per new point at size {size}; generation is capped at {MAX_GENERATION_BITS}"
        )));
    }
    let found: BTreeMap<CanonicalForm, FinStructure> = prev
        .par_iter()
        .flat_map_iter(|base| raw_extensions(spec, base).into_iter().map(|(ext, _, _)| canonical_representative(&ext)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(found.into_values().collect())
}

/// Levels `0..=n` of one canonical representative per isomorphism type,
/// each ordered by canonical form.
fn levels(spec: &ClassSpec, n: usize) -> Result<Vec<Vec<FinStructure>>> {
    let empty = spec.empty_structure();
    let mut out = vec![if spec.is_member(&empty) { vec![empty] } else { Vec::new() }];
    for size in 1..=n {
        let next = next_level(spec, &out[size - 1], size)?;
        out.push(next);
    }
    Ok(out)
}

/// One canonical representative per isomorphism type of members of exactly
/// `size` elements, ordered by canonical form.
pub fn members_of_size(spec: &ClassSpec, size: usize) -> Result<Vec<FinStructure>> {
    Ok(levels(spec, size)?.pop().unwrap_or_default())
}

/// Members of carrier at most `n`, one per isomorphism type, ordered by size
/// then canonical form.
pub fn generate_members(spec: &ClassSpec, n: usize) -> Result<Vec<FinStructure>> {
    Ok(levels(spec, n)?.into_iter().flatten().collect())
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Counterexample {
    pub description: String,
    /// Named structures involved, in the text format.
    pub structures: Vec<(String, String)>,
    pub embeddings: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PropertyResult {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

impl PropertyResult {
    fn from(ce: Option<Counterexample>) -> Self {
        PropertyResult { holds: ce.is_none(), counterexample: ce }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ClassReport {
    pub class: String,
    pub max_size: usize,
    pub members_per_size: Vec<usize>,
    pub hp: PropertyResult,
    pub jep: PropertyResult,
    pub ap: PropertyResult,
    pub free_jep: PropertyResult,
    pub free_ap: PropertyResult,
    /// Largest carrier for which candidate amalgams were enumerated; absent
    /// when free amalgams settled every instance.
    pub amalgam_search_bound: Option<usize>,
}

/// Largest catalog level kept for the amalgam search.
const MAX_CATALOG_LEVEL: usize = 200_000;

/// Member catalog used by the AP/JEP searches. Sizes up to `n` are built
/// up front; sizes `n+1..=2n` only when a free amalgam fails, and only as
/// far as generation allows.
struct Catalog<'a> {
    spec: &'a ClassSpec,
    n: usize,
    small: Vec<Vec<Arc<FinStructure>>>,
    large: OnceLock<Vec<Vec<Arc<FinStructure>>>>,
}

impl<'a> Catalog<'a> {
    fn build(spec: &'a ClassSpec, n: usize) -> Result<Self> {
        let small = levels(spec, n)?.into_iter().map(|l| l.into_iter().map(Arc::new).collect()).collect();
        Ok(Catalog { spec, n, small, large: OnceLock::new() })
    }

    fn up_to(&self, n: usize) -> impl Iterator<Item = &Arc<FinStructure>> {
        self.small.iter().take(n + 1).flatten()
    }

    fn large(&self) -> &[Vec<Arc<FinStructure>>] {
        self.large.get_or_init(|| {
            let mut out: Vec<Vec<Arc<FinStructure>>> = Vec::new();
            let mut prev: Vec<FinStructure> = self.small[self.n].iter().map(|s| (**s).clone()).collect();
            for size in self.n + 1..=2 * self.n {
                match next_level(self.spec, &prev, size) {
                    Ok(level) if level.len() <= MAX_CATALOG_LEVEL => {
                        out.push(level.iter().cloned().map(Arc::new).collect());
                        prev = level;
                    }
                    _ => break,
                }
            }
            out
        })
    }

    fn level(&self, size: usize) -> &[Arc<FinStructure>] {
        if size <= self.n {
            &self.small[size]
        } else {
            self.large().get(size - self.n - 1).map_or(&[], Vec::as_slice)
        }
    }

    /// Largest size searched, if the larger levels were needed.
    fn bound(&self) -> Option<usize> {
        self.large.get().map(|l| self.n + l.len())
    }
}

/// Searches the catalog for `D` with `g1: B → D`, `g2: C → D` and
/// `g1∘f1 = g2∘f2`.
fn find_amalgam(catalog: &Catalog, f1: &Embedding, f2: &Embedding, n: usize) -> bool {
    let b = f1.target();
    let c = f2.target();
    let lo = b.size().max(c.size());
    for size in lo..=2 * n {
        for d in catalog.level(size) {
            let matcher_c = Matcher::new(c, d);
            let matcher_b = Matcher::new(b, d);
            let mut found = false;
            matcher_c.search(&vec![None; c.size()], &mut |g2| {
                let mut fixed = vec![None; b.size()];
                for (a, &fb) in f1.map().iter().enumerate() {
                    fixed[fb] = Some(g2[f2.map()[a]]);
                }
                matcher_b.search(&fixed, &mut |_| {
                    found = true;
                    ControlFlow::Break(())
                });
                if found {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            if found {
                return true;
            }
        }
    }
    false
}

fn named(pairs: &[(&str, &FinStructure)]) -> Vec<(String, String)> {
    pairs.iter().map(|(n, s)| (n.to_string(), s.to_string())).collect()
}

/// Exhaustive HP/JEP/AP/free-JEP/free-AP check over members of carrier `≤ n`.
pub fn check_class_properties(spec: &ClassSpec, n: usize) -> Result<ClassReport> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("max size must be at least 1".into()));
    }
    let catalog = Catalog::build(spec, n)?;
    let members: Vec<Arc<FinStructure>> = catalog.up_to(n).cloned().collect();

    let hp = members.par_iter().find_map_first(|m| {
        (0u64..1 << m.size()).find_map(|mask| {
            let subset: Vec<Element> = (0..m.size()).filter(|i| mask >> i & 1 == 1).collect();
            let sub = m.induced_substructure(&subset).expect("subset within carrier");
            (!spec.is_member(&sub)).then(|| Counterexample {
                description: format!("substructure on {subset:?} is not a member"),
                structures: named(&[("M", m), ("S", &sub)]),
                embeddings: Vec::new(),
            })
        })
    });

    let pairs: Vec<(&Arc<FinStructure>, &Arc<FinStructure>)> =
        members.iter().flat_map(|a| members.iter().map(move |b| (a, b))).collect();

    let free_jep = pairs.par_iter().find_map_first(|(a, b)| {
        if a.size() + b.size() > n {
            return None;
        }
        let j = a.free_join(b).expect("shared signature");
        (!spec.is_member(&j)).then(|| Counterexample {
            description: "free join is not a member".into(),
            structures: named(&[("A", a), ("B", b), ("D", &j)]),
            embeddings: Vec::new(),
        })
    });

    // Amalgamation instances (A, f1: A→B, f2: A→C). JEP is the A = ∅ case.
    let mut instances: Vec<(Embedding, Embedding)> = Vec::new();
    for a in &members {
        let targets: Vec<Vec<Embedding>> = members.iter().map(|b| enumerate_embeddings(b, a)).collect();
        for f1s in &targets {
            for f2s in &targets {
                for f1 in f1s {
                    for f2 in f2s {
                        instances.push((f1.clone(), f2.clone()));
                    }
                }
            }
        }
    }

    let amalgam_ce = |f1: &Embedding, f2: &Embedding, free_only: bool| -> Option<Counterexample> {
        let (d, _, _) = free_amalgam(f1, f2).expect("same base");
        if spec.is_member(&d) {
            return None;
        }
        if !free_only && find_amalgam(&catalog, f1, f2, n) {
            return None;
        }
        let what = if free_only { "free amalgam is not a member" } else { "no amalgam found" };
        let mut structures = named(&[("A", f1.source()), ("B", f1.target()), ("C", f2.target())]);
        if free_only {
            structures.push(("D".into(), d.to_string()));
        }
        Some(Counterexample {
            description: what.into(),
            structures,
            embeddings: vec![f1.serialize("A", "B"), f2.serialize("A", "C")],
        })
    };

    let free_ap = instances.par_iter().find_map_first(|(f1, f2)| amalgam_ce(f1, f2, true));
    let ap = instances.par_iter().find_map_first(|(f1, f2)| amalgam_ce(f1, f2, false));
    let jep = instances.par_iter().filter(|(f1, _)| f1.source().size() == 0).find_map_first(|(f1, f2)| {
        amalgam_ce(f1, f2, false).map(|mut ce| {
            ce.description = "no joint embedding found".into();
            ce
        })
    });

    Ok(ClassReport {
        class: spec.name.clone(),
        max_size: n,
        members_per_size: catalog.small.iter().map(Vec::len).collect(),
        hp: PropertyResult::from(hp),
        jep: PropertyResult::from(jep),
        ap: PropertyResult::from(ap),
        free_jep: PropertyResult::from(free_jep),
        free_ap: PropertyResult::from(free_ap),
        amalgam_search_bound: catalog.bound(),
    })
}

/// Explicit graph on `2^m` vertices: for `i < j`, `{i, j}` is an edge iff
/// bit `i` of `j` is set.
pub fn builtin_bit_graph(m: u32) -> Result<FinStructure> {
    if m == 0 || m > 16 {
        return Err(Error::ParameterOutOfRange(format!("bit graph exponent {m} not in 1..=16")));
    }
    let n = 1usize << m;
    let edges: Vec<(Element, Element)> = (0..n)
        .flat_map(|j| (0..j).filter(move |&i| i < usize::BITS as usize && (j >> i) & 1 == 1).map(move |i| (i, j)))
        .collect();
    FinStructure::graph(n, &edges)
}

/// A one-point extension type over a fixed substructure `S` of size `s`:
/// the tuples (over `0..=s`, each mentioning the new point `s`) it adds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionType {
    pub extension: FinStructure,
    pub new_tuples: Vec<(usize, Tuple)>,
    mask: u64,
}

/// All one-point extensions of `base` that are members of the class.
pub fn one_point_extensions(spec: &ClassSpec, base: &FinStructure) -> Vec<ExtensionType> {
    let mut out: Vec<(CanonicalForm, ExtensionType)> = raw_extensions(spec, base)
        .into_iter()
        .map(|(extension, new_tuples, mask)| {
            (canonical_form(&extension), ExtensionType { extension, new_tuples, mask })
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.mask.cmp(&b.1.mask)));
    out.into_iter().map(|(_, t)| t).collect()
}

/// An extension, its new tuples (relation index, tuple) and its mask.
type RawExtension = (FinStructure, Vec<(usize, Tuple)>, u64);

/// Member one-point extensions of `base` in mask order.
fn raw_extensions(spec: &ClassSpec, base: &FinStructure) -> Vec<RawExtension> {
    let s = base.size();
    let universe = tuple_universe(&spec.signature, s + 1, Some(s));
    assert!(universe.len() < 63, "extension type universe too large");
    (0..1u64 << universe.len())
        .filter_map(|mask| {
            let new_tuples: Vec<(usize, Tuple)> = universe
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .flat_map(|(_, (r, orbit))| orbit.iter().map(move |t| (*r, t.clone())))
                .collect();
            let extension = base.with_new_point(&new_tuples);
            spec.is_member(&extension).then_some((extension, new_tuples, mask))
        })
        .collect()
}

fn realized(m: &FinStructure, subset: &[Element], ty: &ExtensionType, universe: &[(usize, Vec<Tuple>)]) -> bool {
    let s = subset.len();
    (0..m.size()).filter(|x| !subset.contains(x)).any(|x| {
        let map = |e: Element| if e == s { x } else { subset[e] };
        universe.iter().enumerate().all(|(bit, (r, orbit))| {
            let image: Tuple = orbit[0].iter().map(|&e| map(e)).collect();
            m.holds(*r, &image) == (ty.mask >> bit & 1 == 1)
        })
    })
}

fn subsets_below(n: usize, k: usize) -> Vec<Vec<Element>> {
    fn go(start: usize, n: usize, left: usize, cur: &mut Vec<Element>, out: &mut Vec<Vec<Element>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for e in start..n {
            cur.push(e);
            go(e + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        go(0, n, k - 1, &mut Vec::new(), &mut out);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionFailure {
    pub subset: Vec<Element>,
    pub extension: FinStructure,
}

/// Checks that every one-point extension (in the class) of every
/// substructure of size `< k` is realized in `m` over that substructure.
pub fn check_extension_property(
    spec: &ClassSpec,
    m: &FinStructure,
    k: usize,
) -> std::result::Result<(), ExtensionFailure> {
    let subsets = subsets_below(m.size(), k);
    let failure = subsets.par_iter().find_map_first(|subset| {
        let base = m.induced_substructure(subset).expect("subset within carrier");
        let universe = tuple_universe(&spec.signature, subset.len() + 1, Some(subset.len()));
        one_point_extensions(spec, &base)
            .into_iter()
            .find(|ty| !realized(m, subset, ty, &universe))
            .map(|ty| ExtensionFailure { subset: subset.clone(), extension: ty.extension })
    });
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

#[derive(Clone, Debug)]
pub struct Approximant {
    pub structure: FinStructure,
    pub class_spec: ClassSpec,
    pub extension_rank: usize,
}

/// Realizes missing one-point extensions by free amalgamation over the base
/// substructure, round by round, until the rank-`k` extension property
/// holds or the carrier would exceed `budget`.
pub fn build_approximant(spec: &ClassSpec, k: usize, budget: usize) -> Result<Approximant> {
    if k == 0 {
        return Err(Error::ParameterOutOfRange("extension rank must be at least 1".into()));
    }
    let mut m = spec.empty_structure();
    loop {
        let mut missing: Vec<(Vec<Element>, ExtensionType)> = Vec::new();
        for subset in subsets_below(m.size(), k) {
            let base = m.induced_substructure(&subset)?;
            let universe = tuple_universe(&spec.signature, subset.len() + 1, Some(subset.len()));
            for ty in one_point_extensions(spec, &base) {
                if !realized(&m, &subset, &ty, &universe) {
                    missing.push((subset.clone(), ty));
                }
            }
        }
        if missing.is_empty() {
            break;
        }
        let total = missing.len();
        for (done, (subset, ty)) in missing.into_iter().enumerate() {
            let universe = tuple_universe(&spec.signature, subset.len() + 1, Some(subset.len()));
            if realized(&m, &subset, &ty, &universe) {
                continue;
            }
            if m.size() >= budget {
                return Err(Error::BudgetExceeded { budget, partial: Box::new(m), unrealized: total - done });
            }
            let s = subset.len();
            let fresh = m.size();
            let tuples: Vec<(usize, Tuple)> = ty
                .new_tuples
                .iter()
                .map(|(r, t)| (*r, t.iter().map(|&e| if e == s { fresh } else { subset[e] }).collect()))
                .collect();
            let next = m.with_new_point(&tuples);
            if !spec.is_member(&next) {
                return Err(Error::NotClosed("free amalgamation".into()));
            }
            m = next;
        }
    }
    debug_assert!(check_extension_property(spec, &m, k).is_ok());
    Ok(Approximant { structure: m, class_spec: spec.clone(), extension_rank: k })
}
