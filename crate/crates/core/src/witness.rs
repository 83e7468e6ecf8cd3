//! Finite certificate systems showing a colouring is not null (all index
//! sets `I ⊆ n`) or not tame (nonempty `I ⊆ m`, constraints only up to
//! `max I`), their verifiers, and the independence sets they induce.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::colouring::{parse_rational, Colouring, Rational};
use crate::embedding::{enumerate_maps, Embedding, PartialAutomorphism};
use crate::error::{Error, Result};
use crate::structure::{Element, FinStructure};

/// Families are materialized explicitly, so the index range is capped.
pub const MAX_WITNESS_INDEX: usize = 12;

/// A finite subset of `0..32` as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(pub u32);

impl IndexSet {
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros() as usize)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        IndexSet(indices.into_iter().fold(0, |m, i| m | 1 << i))
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for IndexSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::parse(1, format!("bad index set {s:?}")))?;
        let mut set = 0u32;
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let i: usize = part.parse().map_err(|_| Error::parse(1, format!("bad index {part:?}")))?;
            if i >= 32 {
                return Err(Error::parse(1, format!("index {i} too large")));
            }
            set |= 1 << i;
        }
        Ok(IndexSet(set))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    NonNull,
    NonTame,
}

impl WitnessKind {
    fn header(self) -> &'static str {
        match self {
            WitnessKind::NonNull => "nonnull-witness",
            WitnessKind::NonTame => "nontame-witness",
        }
    }

    fn size_key(self) -> &'static str {
        match self {
            WitnessKind::NonNull => "n",
            WitnessKind::NonTame => "m",
        }
    }

    /// Whether the inequality for `(i, I)` is constrained, and if so whether
    /// it is the lower (`< r`, true) or upper (`> s`, false) one.
    fn constraint(self, i: usize, set: IndexSet) -> Option<bool> {
        if set.contains(i) {
            return Some(true);
        }
        match self {
            WitnessKind::NonNull => Some(false),
            WitnessKind::NonTame => set.max().filter(|&mx| i <= mx).map(|_| false),
        }
    }
}

/// Shared data of both witness kinds: thresholds, the colour pair they
/// separate, partial automorphisms `g_i` and embeddings `x_I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessSystem {
    kind: WitnessKind,
    pub ambient: Arc<FinStructure>,
    pub pattern: Arc<FinStructure>,
    pub r: Rational,
    pub s: Rational,
    pub epsilon: Rational,
    pub colour_pair: (Rational, Rational),
    pub g: Vec<PartialAutomorphism>,
    pub x: BTreeMap<IndexSet, Embedding>,
}

impl WitnessSystem {
    #[allow(clippy::too_many_arguments)]
    fn new(
        kind: WitnessKind,
        ambient: Arc<FinStructure>,
        pattern: Arc<FinStructure>,
        r: Rational,
        s: Rational,
        epsilon: Rational,
        colour_pair: (Rational, Rational),
        g: Vec<PartialAutomorphism>,
        x: BTreeMap<IndexSet, Embedding>,
    ) -> Result<Self> {
        let n = g.len();
        if n > MAX_WITNESS_INDEX {
            return Err(Error::ParameterOutOfRange(format!("witness size {n} exceeds {MAX_WITNESS_INDEX}")));
        }
        let (k0, k1) = colour_pair;
        let gap_ok = r < s
            && k0 < r
            && s < k1
            && k1 - k0 > epsilon * 2
            && r - k0 > epsilon
            && k1 - s > epsilon
            && epsilon >= Rational::from_integer(0);
        if !gap_ok {
            return Err(Error::WitnessInvalid(format!(
                "gap conditions fail for k0={k0} r={r} s={s} k1={k1} epsilon={epsilon}"
            )));
        }
        let expected: Vec<IndexSet> =
            (0..1u32 << n).map(IndexSet).filter(|set| kind == WitnessKind::NonNull || !set.is_empty()).collect();
        if !x.keys().copied().eq(expected.iter().copied()) {
            return Err(Error::WitnessInvalid("index family does not match the witness size".into()));
        }
        for gi in &g {
            if gi.structure() != &*ambient {
                return Err(Error::WitnessInvalid("g_i lives on a different structure".into()));
            }
        }
        for h in x.values() {
            if h.target() != &*ambient || h.source() != &*pattern {
                return Err(Error::WitnessInvalid("x_I is not an embedding of the pattern into the ambient".into()));
            }
        }
        Ok(WitnessSystem { kind, ambient, pattern, r, s, epsilon, colour_pair, g, x })
    }

    pub fn kind(&self) -> WitnessKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.g.len()
    }

    /// Every `g_i` must be defined on the image of every `x_I`.
    pub fn check_coverage(&self) -> Result<()> {
        for gi in &self.g {
            for h in self.x.values() {
                if let Some(&e) = h.map().iter().find(|&&e| !gi.covers(e)) {
                    return Err(Error::DomainNotCovered(e));
                }
            }
        }
        Ok(())
    }

    /// Text form; `ambient_name`/`pattern_name` label the two structures.
    pub fn serialize(&self, pattern_name: &str, ambient_name: &str) -> String {
        let (k0, k1) = self.colour_pair;
        let mut out = vec![
            self.kind.header().to_string(),
            format!("{} = {}", self.kind.size_key(), self.size()),
            format!("epsilon = {}", self.epsilon),
            format!("r = {}", self.r),
            format!("s = {}", self.s),
            format!("colour_pair = {k0} {k1}"),
        ];
        for (i, gi) in self.g.iter().enumerate() {
            out.push(format!("g {i} = {}", gi.serialize(ambient_name)));
        }
        for (set, h) in &self.x {
            out.push(format!("x {set} = {}", h.serialize(pattern_name, ambient_name)));
        }
        out.join("\n")
    }

    fn parse(text: &str, resolve: impl Fn(&str) -> Option<Arc<FinStructure>>) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (n0, header) = lines.next().ok_or_else(|| Error::parse(1, "empty witness"))?;
        let kind = match header {
            "nonnull-witness" => WitnessKind::NonNull,
            "nontame-witness" => WitnessKind::NonTame,
            _ => return Err(Error::parse(n0, "expected nonnull-witness or nontame-witness")),
        };
        let mut scalars: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        let mut g: BTreeMap<usize, PartialAutomorphism> = BTreeMap::new();
        let mut x = BTreeMap::new();
        let mut names: Option<(Arc<FinStructure>, Arc<FinStructure>)> = None;
        for (n, line) in lines {
            let (key, value) = line.split_once('=').ok_or_else(|| Error::parse(n, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(i) = key.strip_prefix("g ") {
                let i: usize = i.trim().parse().map_err(|_| Error::parse(n, "bad g index"))?;
                let gi = PartialAutomorphism::parse(value, &resolve).map_err(|e| Error::parse(n, e.to_string()))?;
                g.insert(i, gi);
            } else if let Some(set) = key.strip_prefix("x ") {
                let set: IndexSet = set.parse().map_err(|e: Error| Error::parse(n, e.to_string()))?;
                let h = Embedding::parse(value, &resolve).map_err(|e| Error::parse(n, e.to_string()))?;
                if names.is_none() {
                    names = Some((h.source_arc().clone(), h.target_arc().clone()));
                }
                if x.insert(set, h).is_some() {
                    return Err(Error::parse(n, format!("x {set} given twice")));
                }
            } else {
                scalars.insert(key, (n, value));
            }
        }
        let get = |key: &str| -> Result<(usize, &str)> {
            scalars.get(key).copied().ok_or_else(|| Error::parse(n0, format!("missing {key}")))
        };
        let rational = |key: &str| -> Result<Rational> {
            let (n, v) = get(key)?;
            parse_rational(v).map_err(|e| Error::parse(n, e.to_string()))
        };
        let (n_line, size) = get(kind.size_key())?;
        let size: usize = size.parse().map_err(|_| Error::parse(n_line, "bad witness size"))?;
        if g.len() != size || g.keys().copied().ne(0..size) {
            return Err(Error::parse(n_line, format!("expected g 0..{size}")));
        }
        let (pair_line, pair) = get("colour_pair")?;
        let pair: Vec<Rational> = pair
            .split_whitespace()
            .map(parse_rational)
            .collect::<Result<_>>()
            .map_err(|e| Error::parse(pair_line, e.to_string()))?;
        let [k0, k1] = pair[..] else {
            return Err(Error::parse(pair_line, "colour_pair needs two values"));
        };
        let (pattern, ambient) = match names {
            Some(p) => p,
            None => return Err(Error::parse(n0, "witness has no x entries")),
        };
        WitnessSystem::new(
            kind,
            ambient,
            pattern,
            rational("r")?,
            rational("s")?,
            rational("epsilon")?,
            (k0, k1),
            g.into_values().collect(),
            x,
        )
        .map_err(|e| Error::parse(n0, e.to_string()))
    }
}

/// Witness that a colouring is not null: for all `I ⊆ {0..n-1}` and `i < n`,
/// `χ(g_i·x_I) < r` if `i ∈ I` and `> s` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonNullWitness(WitnessSystem);

/// Witness that a colouring is not tame, truncated at `m`: for nonempty
/// `I ⊆ {0..m-1}`, `χ(g_i·x_I) < r` if `i ∈ I` and `> s` if `i ∉ I, i ≤ max I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonTameWitness(WitnessSystem);

macro_rules! witness_impl {
    ($ty:ident, $kind:expr) => {
        impl $ty {
            #[allow(clippy::too_many_arguments)]
            pub fn new(
                ambient: Arc<FinStructure>,
                pattern: Arc<FinStructure>,
                r: Rational,
                s: Rational,
                epsilon: Rational,
                colour_pair: (Rational, Rational),
                g: Vec<PartialAutomorphism>,
                x: BTreeMap<IndexSet, Embedding>,
            ) -> Result<Self> {
                WitnessSystem::new($kind, ambient, pattern, r, s, epsilon, colour_pair, g, x).map($ty)
            }

            pub fn system(&self) -> &WitnessSystem {
                &self.0
            }

            pub fn serialize(&self, pattern_name: &str, ambient_name: &str) -> String {
                self.0.serialize(pattern_name, ambient_name)
            }

            pub fn parse(text: &str, resolve: impl Fn(&str) -> Option<Arc<FinStructure>>) -> Result<Self> {
                let system = WitnessSystem::parse(text, resolve)?;
                if system.kind != $kind {
                    return Err(Error::parse(1, "wrong witness kind"));
                }
                Ok($ty(system))
            }
        }
    };
}

witness_impl!(NonNullWitness, WitnessKind::NonNull);
witness_impl!(NonTameWitness, WitnessKind::NonTame);

impl NonTameWitness {
    /// Reads a non-null witness as a non-tame one by dropping `I = ∅`.
    pub fn from_nonnull(w: &NonNullWitness) -> Self {
        let mut system = w.0.clone();
        system.kind = WitnessKind::NonTame;
        system.x.remove(&IndexSet(0));
        NonTameWitness(system)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    /// Least failing `(i, I)` in `(i, I)` order.
    pub failure: Option<(usize, String)>,
    pub checked: usize,
}

fn verify_system(w: &WitnessSystem, chi: &Colouring) -> Result<Verdict> {
    if chi.pattern() != &w.pattern || chi.ambient() != &w.ambient {
        return Err(Error::InvalidColouring("colouring domain differs from the witness".into()));
    }
    w.check_coverage()?;
    let pairs: Vec<(usize, IndexSet, bool)> = (0..w.size())
        .flat_map(|i| w.x.keys().filter_map(move |&set| w.kind.constraint(i, set).map(|lower| (i, set, lower))))
        .collect();
    let failed = pairs.par_iter().find_first(|&&(i, set, lower)| {
        let moved = w.g[i].apply_to(&w.x[&set]).expect("coverage checked");
        let v = chi.value(&moved).expect("embedding into the ambient");
        if lower {
            v >= w.r
        } else {
            v <= w.s
        }
    });
    Ok(Verdict {
        passed: failed.is_none(),
        failure: failed.map(|&(i, set, _)| (i, set.to_string())),
        checked: pairs.len(),
    })
}

pub fn verify_nonnull_witness(w: &NonNullWitness, chi: &Colouring) -> Result<Verdict> {
    verify_system(&w.0, chi)
}

pub fn verify_nontame_witness(w: &NonTameWitness, chi: &Colouring) -> Result<Verdict> {
    verify_system(&w.0, chi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceResult {
    pub holds: bool,
    /// `(J, σ)` with `⋂_{j∈J} j⁻¹A_{σ(j)} = ∅`: candidate indices and the
    /// chosen set index for each.
    pub counterexample: Option<(Vec<usize>, Vec<usize>)>,
}

/// Whether `candidates` form an independence set for `sets` over
/// `Binom(ambient, pattern)`: every `⋂_{j∈J} j⁻¹A_{σ(j)}` is nonempty, where
/// `j⁻¹A = {h : j·h defined and in A}`.
pub fn is_independence_set(
    ambient: &Arc<FinStructure>,
    pattern: &Arc<FinStructure>,
    sets: &[Vec<Embedding>],
    candidates: &[PartialAutomorphism],
) -> IndependenceResult {
    let points = enumerate_maps(ambient, pattern);
    let members: Vec<HashSet<&[Element]>> = sets.iter().map(|s| s.iter().map(|h| h.map()).collect()).collect();
    let k = sets.len();
    let c = candidates.len();
    // profile[p][j]: bitmask of sets containing g_j·p (0 if undefined).
    let profiles: Vec<Vec<u64>> = points
        .iter()
        .map(|p| {
            candidates
                .iter()
                .map(|g| {
                    let moved: Option<Vec<Element>> = p.iter().map(|&e| g.get(e)).collect();
                    moved.map_or(0, |m| {
                        members
                            .iter()
                            .enumerate()
                            .filter(|(_, set)| set.contains(m.as_slice()))
                            .fold(0, |acc, (idx, _)| acc | 1 << idx)
                    })
                })
                .collect()
        })
        .collect();
    let realized = |js: &[usize], sigma: &[usize]| {
        profiles.iter().any(|prof| js.iter().zip(sigma).all(|(&j, &t)| prof[j] >> t & 1 == 1))
    };
    if k == 0 {
        // Only J = ∅ admits a σ; the empty intersection is every point.
        return IndependenceResult {
            holds: !points.is_empty(),
            counterexample: points.is_empty().then(|| (Vec::new(), Vec::new())),
        };
    }
    // Total assignments suffice: any (J, σ) extends to all candidates and
    // the intersection only shrinks.
    let total = (k as u64).pow(c as u32);
    let all: Vec<usize> = (0..c).collect();
    let failing = (0..total).into_par_iter().find_first(|&code| {
        let sigma = decode(code, k, c);
        !realized(&all, &sigma)
    });
    let Some(code) = failing else {
        return IndependenceResult { holds: true, counterexample: None };
    };
    let mut js = all;
    let mut sigma = decode(code, k, c);
    // Shrink J while the intersection stays empty.
    let mut idx = 0;
    while idx < js.len() {
        let mut js2 = js.clone();
        let mut s2 = sigma.clone();
        js2.remove(idx);
        s2.remove(idx);
        if !realized(&js2, &s2) {
            js = js2;
            sigma = s2;
        } else {
            idx += 1;
        }
    }
    IndependenceResult { holds: false, counterexample: Some((js, sigma)) }
}

fn decode(mut code: u64, k: usize, c: usize) -> Vec<usize> {
    let mut sigma = vec![0; c];
    for slot in sigma.iter_mut().rev() {
        *slot = (code % k as u64) as usize;
        code /= k as u64;
    }
    sigma
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub below_r: usize,
    pub above_s: usize,
    pub candidates: usize,
    pub result: IndependenceResult,
}

fn system_to_independence(w: &WitnessSystem, chi: &Colouring) -> Result<IndependenceReport> {
    let verdict = verify_system(w, chi)?;
    if !verdict.passed {
        return Err(Error::WitnessInvalid(format!("failing pair {:?}", verdict.failure)));
    }
    let mut a0 = Vec::new();
    let mut a1 = Vec::new();
    for h in chi.embeddings() {
        let v = chi.value(&h)?;
        if v <= w.r {
            a0.push(h.clone());
        }
        if v >= w.s {
            a1.push(h);
        }
    }
    let result = is_independence_set(&w.ambient, &w.pattern, &[a0.clone(), a1.clone()], &w.g);
    Ok(IndependenceReport { below_r: a0.len(), above_s: a1.len(), candidates: w.g.len(), result })
}

/// Candidate independence set `{g_i}` for `A_0 = {χ ≤ r}`, `A_1 = {χ ≥ s}`.
pub fn nonnull_to_independence_set(w: &NonNullWitness, chi: &Colouring) -> Result<IndependenceReport> {
    system_to_independence(&w.0, chi)
}

/// As [`nonnull_to_independence_set`]; the result is reported, not assumed.
pub fn nontame_to_independence_set(w: &NonTameWitness, chi: &Colouring) -> Result<IndependenceReport> {
    system_to_independence(&w.0, chi)
}
