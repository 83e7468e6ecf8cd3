//! Colourings of embedding sets with exact rational values, oscillation, and
//! the approximate Ramsey search.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::embedding::{enumerate_embeddings, enumerate_maps, Embedding};
use crate::error::{Error, Result};
use crate::structure::{Element, FinStructure};

pub type Rational = Rational64;

pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let value: Rational = t.parse().map_err(|_| Error::parse(1, format!("bad rational {t:?}")))?;
    Ok(value)
}

/// A total function from `Binom(ambient, pattern)` to the rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Colouring {
    pattern: Arc<FinStructure>,
    ambient: Arc<FinStructure>,
    // Sorted lexicographically, as produced by the enumerator.
    maps: Vec<Vec<Element>>,
    values: Vec<Rational>,
    palette: Vec<Rational>,
}

impl fmt::Debug for Colouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Colouring({} embeddings, palette {:?})", self.maps.len(), self.palette)
    }
}

impl Colouring {
    pub fn from_fn(ambient: Arc<FinStructure>, pattern: Arc<FinStructure>, f: impl Fn(&[Element]) -> Rational) -> Self {
        let maps = enumerate_maps(&ambient, &pattern);
        let values = maps.iter().map(|m| f(m)).collect();
        Self::assemble(ambient, pattern, maps, values)
    }

    /// Builds a colouring from explicit `(embedding, value)` entries, which
    /// must cover every embedding of `pattern` into `ambient` exactly once.
    pub fn from_table(
        ambient: Arc<FinStructure>,
        pattern: Arc<FinStructure>,
        entries: Vec<(Vec<Element>, Rational)>,
    ) -> Result<Self> {
        let maps = enumerate_maps(&ambient, &pattern);
        let mut entries = entries;
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidColouring("embedding listed twice".into()));
        }
        if entries.len() != maps.len() || entries.iter().zip(&maps).any(|(e, m)| &e.0 != m) {
            return Err(Error::InvalidColouring(format!(
                "table has {} entries but there are {} embeddings",
                entries.len(),
                maps.len()
            )));
        }
        let values = entries.into_iter().map(|(_, v)| v).collect();
        Ok(Self::assemble(ambient, pattern, maps, values))
    }

    fn assemble(
        ambient: Arc<FinStructure>,
        pattern: Arc<FinStructure>,
        maps: Vec<Vec<Element>>,
        values: Vec<Rational>,
    ) -> Self {
        let mut palette: Vec<Rational> = values.clone();
        palette.sort();
        palette.dedup();
        Colouring { pattern, ambient, maps, values, palette }
    }

    pub fn pattern(&self) -> &Arc<FinStructure> {
        &self.pattern
    }

    pub fn ambient(&self) -> &Arc<FinStructure> {
        &self.ambient
    }

    pub fn palette(&self) -> &[Rational] {
        &self.palette
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn embeddings(&self) -> impl Iterator<Item = Embedding> + '_ {
        self.maps.iter().map(|m| Embedding::new_unchecked(self.pattern.clone(), self.ambient.clone(), m.clone()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[Element], Rational)> {
        self.maps.iter().map(Vec::as_slice).zip(self.values.iter().copied())
    }

    pub fn value_of_map(&self, map: &[Element]) -> Option<Rational> {
        self.maps.binary_search_by(|m| m.as_slice().cmp(map)).ok().map(|i| self.values[i])
    }

    pub fn value(&self, h: &Embedding) -> Result<Rational> {
        if h.source() != &*self.pattern || h.target() != &*self.ambient {
            return Err(Error::OutOfDomain);
        }
        self.value_of_map(h.map()).ok_or(Error::OutOfDomain)
    }

    /// The colouring `h ↦ f(h, χ(h))` on the same domain.
    pub fn map_values(&self, mut f: impl FnMut(&[Element], Rational) -> Rational) -> Colouring {
        let values = self.maps.iter().zip(&self.values).map(|(m, &v)| f(m, v)).collect();
        Self::assemble(self.ambient.clone(), self.pattern.clone(), self.maps.clone(), values)
    }

    /// Colouring file: a header line then `<embedding> = <value>` lines.
    pub fn serialize(&self, pattern_name: &str, ambient_name: &str) -> String {
        let mut out = format!("colouring pattern={pattern_name} ambient={ambient_name}");
        for (m, v) in self.maps.iter().zip(&self.values) {
            let h = Embedding::new_unchecked(self.pattern.clone(), self.ambient.clone(), m.clone());
            out.push('\n');
            out.push_str(&h.serialize(pattern_name, ambient_name));
            out.push_str(&format!(" = {v}"));
        }
        out
    }

    pub fn parse(text: &str, resolve: impl Fn(&str) -> Option<Arc<FinStructure>>) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (n, header) = lines.next().ok_or_else(|| Error::parse(1, "empty colouring file"))?;
        let mut pattern = None;
        let mut ambient = None;
        let mut words = header.split_whitespace();
        if words.next() != Some("colouring") {
            return Err(Error::parse(n, "expected `colouring` header"));
        }
        for w in words {
            match w.split_once('=') {
                Some(("pattern", name)) => pattern = Some(name.to_string()),
                Some(("ambient", name)) => ambient = Some(name.to_string()),
                _ => return Err(Error::parse(n, format!("unexpected header item {w:?}"))),
            }
        }
        let (pattern_name, ambient_name) =
            pattern.zip(ambient).ok_or_else(|| Error::parse(n, "header needs pattern= and ambient="))?;
        let pattern_s =
            resolve(&pattern_name).ok_or_else(|| Error::parse(n, format!("unknown structure {pattern_name}")))?;
        let ambient_s =
            resolve(&ambient_name).ok_or_else(|| Error::parse(n, format!("unknown structure {ambient_name}")))?;
        let lookup = |name: &str| {
            if name == pattern_name {
                Some(pattern_s.clone())
            } else if name == ambient_name {
                Some(ambient_s.clone())
            } else {
                None
            }
        };
        let mut entries = Vec::new();
        for (n, line) in lines {
            let (emb, value) = line
                .rsplit_once('=')
                .filter(|(e, _)| e.trim_end().ends_with(|c: char| c.is_ascii_digit()))
                .ok_or_else(|| Error::parse(n, "expected `<embedding> = <value>`"))?;
            let h = Embedding::parse(emb, lookup).map_err(|e| Error::parse(n, e.to_string()))?;
            let v = parse_rational(value).map_err(|_| Error::parse(n, format!("bad value {value:?}")))?;
            entries.push((h.map().to_vec(), v));
        }
        Colouring::from_table(ambient_s, pattern_s, entries).map_err(|e| Error::parse(n, e.to_string()))
    }
}

/// Max minus min of `χ` over `set`; zero on empty or singleton sets.
pub fn oscillation(chi: &Colouring, set: &[Embedding]) -> Result<Rational> {
    let mut values = set.iter().map(|h| chi.value(h));
    let Some(first) = values.next() else { return Ok(Rational::from_integer(0)) };
    let first = first?;
    let (mut lo, mut hi) = (first, first);
    for v in values {
        let v = v?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi - lo)
}

/// Oscillation of `χ` on `h∘Binom(B, A)`, given the inner maps.
pub(crate) fn oscillation_on_copy(chi: &Colouring, h: &[Element], inner: &[Vec<Element>]) -> Rational {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for e in inner {
        let composed: Vec<Element> = e.iter().map(|&x| h[x]).collect();
        let v = chi.value_of_map(&composed).expect("composition of embeddings is an embedding");
        lo = Some(lo.map_or(v, |l| l.min(v)));
        hi = Some(hi.map_or(v, |u| u.max(v)));
    }
    match (lo, hi) {
        (Some(l), Some(u)) => u - l,
        _ => Rational::from_integer(0),
    }
}

/// Rule-based colouring definitions that induce a table on any ambient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ColouringFamily {
    Constant,
    /// 0 if the embedding is increasing on carrier indices, else 1.
    Orientation,
    /// Parity of the image of pattern element 0 (0 for the empty pattern).
    Parity,
    /// Pseudo-random value in `0..palette`, a function of the seed and the
    /// image sequence.
    SeededRandom {
        seed: u64,
        palette: u32,
    },
}

impl ColouringFamily {
    pub fn value(&self, map: &[Element]) -> Rational {
        let v = match self {
            ColouringFamily::Constant => 0,
            ColouringFamily::Orientation => i64::from(!map.windows(2).all(|w| w[0] < w[1])),
            ColouringFamily::Parity => map.first().map_or(0, |&x| (x % 2) as i64),
            ColouringFamily::SeededRandom { seed, palette } => {
                let mut state = *seed ^ 0x9e37_79b9_7f4a_7c15;
                for &x in map {
                    state = (state.rotate_left(23) ^ x as u64).wrapping_mul(0x2545_f491_4f6c_dd1d);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(state);
                i64::from(rng.gen_range(0..*palette))
            }
        };
        Rational::from_integer(v)
    }

    /// Upper bound on the number of distinct values on any ambient.
    pub fn palette_size(&self) -> usize {
        match self {
            ColouringFamily::Constant => 1,
            ColouringFamily::Orientation | ColouringFamily::Parity => 2,
            ColouringFamily::SeededRandom { palette, .. } => *palette as usize,
        }
    }

    pub fn colouring(&self, ambient: &Arc<FinStructure>, pattern: &Arc<FinStructure>) -> Colouring {
        Colouring::from_fn(ambient.clone(), pattern.clone(), |m| self.value(m))
    }

    /// Parses a family name; a bare `seeded-random` takes `default_seed` and
    /// a palette of 3.
    pub fn parse_with_seed(text: &str, default_seed: u64) -> Result<Self> {
        let t = text.trim();
        match t {
            "constant" => return Ok(ColouringFamily::Constant),
            "orientation" => return Ok(ColouringFamily::Orientation),
            "parity" => return Ok(ColouringFamily::Parity),
            "seeded-random" => return Ok(ColouringFamily::SeededRandom { seed: default_seed, palette: 3 }),
            _ => {}
        }
        let args = t
            .strip_prefix("seeded-random(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::parse(1, format!("unknown colouring family {t:?}")))?;
        let (seed, palette) =
            args.split_once(',').ok_or_else(|| Error::parse(1, "seeded-random needs (seed, palette)"))?;
        let seed = seed.trim().parse().map_err(|_| Error::parse(1, format!("bad seed {seed:?}")))?;
        let palette: u32 = palette.trim().parse().map_err(|_| Error::parse(1, format!("bad palette {palette:?}")))?;
        if palette == 0 {
            return Err(Error::parse(1, "palette must be positive"));
        }
        Ok(ColouringFamily::SeededRandom { seed, palette })
    }
}

impl FromStr for ColouringFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_seed(s, 0)
    }
}

impl fmt::Display for ColouringFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColouringFamily::Constant => write!(f, "constant"),
            ColouringFamily::Orientation => write!(f, "orientation"),
            ColouringFamily::Parity => write!(f, "parity"),
            ColouringFamily::SeededRandom { seed, palette } => write!(f, "seeded-random({seed}, {palette})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RamseyQuery {
    pub pattern: Arc<FinStructure>,
    pub copy: Arc<FinStructure>,
    pub colourings: Vec<Colouring>,
    pub epsilon: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RamseyOutcome {
    /// Least `h ∈ Binom(ambient, B)` on whose `h∘Binom(B, A)` every
    /// colouring oscillates by at most ε.
    Monochromatic { h: Embedding },
    /// No such `h` in the ambient; worst oscillation per `h`, in order.
    Exhausted { worst: Vec<(Embedding, Rational)> },
}

pub fn check_ramsey_upto(q: &RamseyQuery) -> Result<RamseyOutcome> {
    let Some(first) = q.colourings.first() else {
        return Err(Error::InvalidColouring("query has no colourings".into()));
    };
    let ambient = first.ambient().clone();
    for chi in &q.colourings {
        if chi.pattern() != &q.pattern || chi.ambient() != &ambient {
            return Err(Error::InvalidColouring("colourings must share pattern and ambient".into()));
        }
    }
    if q.epsilon < Rational::from_integer(0) {
        return Err(Error::ParameterOutOfRange("epsilon must be non-negative".into()));
    }
    let inner = enumerate_maps(&q.copy, &q.pattern);
    let copies = enumerate_embeddings(&ambient, &q.copy);
    let worst = |h: &Embedding| {
        q.colourings
            .iter()
            .map(|chi| oscillation_on_copy(chi, h.map(), &inner))
            .max()
            .unwrap_or_else(|| Rational::from_integer(0))
    };
    if let Some(h) = copies.par_iter().find_first(|h| worst(h) <= q.epsilon) {
        return Ok(RamseyOutcome::Monochromatic { h: h.clone() });
    }
    let table = copies.par_iter().map(|h| (h.clone(), worst(h))).collect();
    Ok(RamseyOutcome::Exhausted { worst: table })
}
