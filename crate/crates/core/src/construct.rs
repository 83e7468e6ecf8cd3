//! Turning a Ramsey failure in a free power of `B` (or of an EPPA witness
//! `C ⊇ B`) into a verified non-null or non-tame witness.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;

use crate::class::ClassSpec;
use crate::colouring::{Colouring, ColouringFamily, Rational};
use crate::embedding::{
    enumerate_maps, extend_partial_to_automorphism, union_partials, Embedding, PartialAutomorphism,
};
use crate::error::{Error, Result};
use crate::structure::{Element, FinStructure};
use crate::witness::{
    verify_nonnull_witness, verify_nontame_witness, IndexSet, NonNullWitness, NonTameWitness, MAX_WITNESS_INDEX,
};

#[derive(Clone, Debug)]
pub enum Construction<W> {
    Witness {
        witness: W,
        colour_index: usize,
        /// The selected family evaluated on the constructed ambient.
        colouring: Colouring,
    },
    /// A copy `h: B → U` on which every family oscillates by at most 2ε.
    NoRamseyFailure { h: Embedding, oscillations: Vec<Rational> },
}

/// Per-copy colour data: `values[j][k]` is family `j` on `copy ∘ inner[k]`.
struct CopyData {
    values: Vec<Vec<Rational>>,
    oscillations: Vec<Rational>,
}

struct Layout {
    ambient: Arc<FinStructure>,
    pattern: Arc<FinStructure>,
    /// Block structure each copy is a copy of (`B` or `C`).
    block: Arc<FinStructure>,
    b: Arc<FinStructure>,
    /// `B → block`.
    base: Vec<Element>,
    /// `Binom(B, A)` in lexicographic order.
    inner: Vec<Vec<Element>>,
}

impl Layout {
    fn copy_map(&self, copy: usize, map: &[Element]) -> Vec<Element> {
        map.iter().map(|&x| copy * self.block.size() + self.base[x]).collect()
    }
}

struct Selection {
    colour_index: usize,
    k0: Rational,
    k1: Rational,
    copies: Vec<usize>,
}

fn copy_count(families: &[ColouringFamily], sets: usize) -> usize {
    let p = families.iter().map(ColouringFamily::palette_size).max().unwrap_or(1);
    (families.len() * p * p.saturating_sub(1) / 2 * sets).max(1)
}

fn check_inputs(
    spec: &ClassSpec,
    a: &FinStructure,
    b: &FinStructure,
    families: &[ColouringFamily],
    epsilon: Rational,
    size: usize,
) -> Result<()> {
    if families.is_empty() {
        return Err(Error::ParameterOutOfRange("no colouring families".into()));
    }
    if epsilon < Rational::from_integer(0) {
        return Err(Error::ParameterOutOfRange("epsilon must be nonnegative".into()));
    }
    if size > MAX_WITNESS_INDEX {
        return Err(Error::ParameterOutOfRange(format!("witness size {size} exceeds {MAX_WITNESS_INDEX}")));
    }
    for (name, s) in [("A", a), ("B", b)] {
        if !spec.is_member(s) {
            return Err(Error::InvalidStructure(format!("{name} is not a member of class {}", spec.name)));
        }
    }
    if enumerate_maps(b, a).is_empty() {
        return Err(Error::InvalidStructure("A does not embed into B".into()));
    }
    Ok(())
}

fn build_ambient(spec: &ClassSpec, block: &FinStructure, copies: usize) -> Result<Arc<FinStructure>> {
    let ambient = block.free_power(copies);
    if !spec.is_member(&ambient) {
        return Err(Error::NotClosed(format!("free joins ({} copies leave class {})", copies, spec.name)));
    }
    Ok(Arc::new(ambient))
}

fn copy_data(layout: &Layout, families: &[ColouringFamily], copies: usize) -> Vec<CopyData> {
    (0..copies)
        .into_par_iter()
        .map(|c| {
            let maps: Vec<Vec<Element>> = layout.inner.iter().map(|m| layout.copy_map(c, m)).collect();
            let values: Vec<Vec<Rational>> =
                families.iter().map(|f| maps.iter().map(|m| f.value(m)).collect()).collect();
            let oscillations = values
                .iter()
                .map(|vs| {
                    let lo = vs.iter().min().copied().unwrap_or_default();
                    let hi = vs.iter().max().copied().unwrap_or_default();
                    hi - lo
                })
                .collect();
            CopyData { values, oscillations }
        })
        .collect()
}

/// Either the first copy without a 2ε-failure, or the least qualifying
/// `(colour_index, k0, k1)` realized in at least `required` copies.
fn select(
    data: &[CopyData],
    epsilon: Rational,
    required: usize,
) -> Result<std::result::Result<Selection, (usize, Vec<Rational>)>> {
    let two_eps = epsilon * 2;
    if let Some(c) = data.iter().position(|d| d.oscillations.iter().all(|&o| o <= two_eps)) {
        return Ok(Err((c, data[c].oscillations.clone())));
    }
    let mut realized: BTreeMap<(usize, Rational, Rational), Vec<usize>> = BTreeMap::new();
    for (c, d) in data.iter().enumerate() {
        for (j, vs) in d.values.iter().enumerate() {
            let distinct: BTreeSet<Rational> = vs.iter().copied().collect();
            for &k0 in &distinct {
                for &k1 in distinct.range(k0..) {
                    if k1 - k0 > two_eps {
                        realized.entry((j, k0, k1)).or_default().push(c);
                    }
                }
            }
        }
    }
    match realized.iter().find(|(_, cs)| cs.len() >= required) {
        Some((&(colour_index, k0, k1), cs)) => {
            Ok(Ok(Selection { colour_index, k0, k1, copies: cs[..required].to_vec() }))
        }
        None => {
            Err(Error::InsufficientCopies { achieved: realized.values().map(Vec::len).max().unwrap_or(0), required })
        }
    }
}

fn thresholds(k0: Rational, k1: Rational, epsilon: Rational) -> (Rational, Rational) {
    let delta = (k1 - k0 - epsilon * 2) / 4;
    (k0 + epsilon + delta, k1 - epsilon - delta)
}

/// Lexicographically least inner embeddings of value `k0` and `k1`.
fn least_pair(data: &CopyData, j: usize, k0: Rational, k1: Rational) -> (usize, usize) {
    let find = |k: Rational| data.values[j].iter().position(|&v| v == k).expect("selected copy realizes k");
    (find(k0), find(k1))
}

fn no_failure<W>(layout: &Layout, copy: usize, oscillations: Vec<Rational>) -> Result<Construction<W>> {
    let map = layout.copy_map(copy, &(0..layout.b.size()).collect::<Vec<_>>());
    let h = Embedding::new(layout.b.clone(), layout.ambient.clone(), map)?;
    Ok(Construction::NoRamseyFailure { h, oscillations })
}

fn check_exact(
    chi: &Colouring,
    g: &[PartialAutomorphism],
    x: &BTreeMap<IndexSet, Embedding>,
    k0: Rational,
    k1: Rational,
) -> Result<()> {
    for (i, gi) in g.iter().enumerate() {
        for (&set, h) in x {
            let expected = if set.contains(i) { k0 } else { k1 };
            let got = chi.value(&gi.apply_to(h)?)?;
            if got != expected {
                return Err(Error::WitnessInvalid(format!("colour of g_{i} x_{set} is {got}, expected {expected}")));
            }
        }
    }
    Ok(())
}

/// Non-null witness of size `n` for one of `families` on `Binom(U, A)`,
/// with `U` a free power of `b`.
pub fn construct_nonnull_witness(
    spec: &ClassSpec,
    a: &Arc<FinStructure>,
    b: &Arc<FinStructure>,
    families: &[ColouringFamily],
    epsilon: Rational,
    n: usize,
) -> Result<Construction<NonNullWitness>> {
    check_inputs(spec, a, b, families, epsilon, n)?;
    let sets = 1usize << n;
    let copies = copy_count(families, sets);
    let layout = Layout {
        ambient: build_ambient(spec, b, copies)?,
        pattern: a.clone(),
        block: b.clone(),
        b: b.clone(),
        base: (0..b.size()).collect(),
        inner: enumerate_maps(b, a),
    };
    let data = copy_data(&layout, families, copies);
    let sel = match select(&data, epsilon, sets)? {
        Ok(sel) => sel,
        Err((c, osc)) => return no_failure(&layout, c, osc),
    };
    let (r, s) = thresholds(sel.k0, sel.k1, epsilon);
    // (I, copy, inner index for k0, inner index for k1)
    let blocks: Vec<(IndexSet, usize, usize, usize)> = sel
        .copies
        .iter()
        .enumerate()
        .map(|(mask, &c)| {
            let (i0, i1) = least_pair(&data[c], sel.colour_index, sel.k0, sel.k1);
            (IndexSet(mask as u32), c, i0, i1)
        })
        .collect();
    let mut x = BTreeMap::new();
    for &(set, c, _, i1) in &blocks {
        let map = layout.copy_map(c, &layout.inner[i1]);
        x.insert(set, Embedding::new_unchecked(a.clone(), layout.ambient.clone(), map));
    }
    let g = (0..n)
        .into_par_iter()
        .map(|i| {
            let parts: Vec<PartialAutomorphism> = blocks
                .iter()
                .map(|&(set, c, i0, i1)| {
                    let from = layout.copy_map(c, &layout.inner[i1]);
                    let to = if set.contains(i) { layout.copy_map(c, &layout.inner[i0]) } else { from.clone() };
                    PartialAutomorphism::new(layout.ambient.clone(), from.into_iter().zip(to).collect())
                })
                .collect::<Result<_>>()?;
            union_partials(&parts)
        })
        .collect::<Result<Vec<_>>>()?;
    let chi = families[sel.colour_index].colouring(&layout.ambient, &layout.pattern);
    check_exact(&chi, &g, &x, sel.k0, sel.k1)?;
    let witness = NonNullWitness::new(layout.ambient.clone(), a.clone(), r, s, epsilon, (sel.k0, sel.k1), g, x)?;
    let verdict = verify_nonnull_witness(&witness, &chi)?;
    if !verdict.passed {
        return Err(Error::WitnessInvalid(format!("constructed witness fails at {:?}", verdict.failure)));
    }
    Ok(Construction::Witness { witness, colour_index: sel.colour_index, colouring: chi })
}

/// Non-tame witness of size `m`, with `U` a free power of the target of the
/// EPPA witness `eppa: B → C`.
pub fn construct_nontame_witness(
    spec: &ClassSpec,
    a: &Arc<FinStructure>,
    families: &[ColouringFamily],
    epsilon: Rational,
    m: usize,
    eppa: &Embedding,
) -> Result<Construction<NonTameWitness>> {
    let b = eppa.source_arc();
    let c_struct = eppa.target_arc();
    check_inputs(spec, a, b, families, epsilon, m)?;
    if !spec.is_member(c_struct) {
        return Err(Error::InvalidStructure(format!("EPPA target is not a member of class {}", spec.name)));
    }
    if m == 0 {
        return Err(Error::ParameterOutOfRange("non-tame witnesses need m >= 1".into()));
    }
    let sets = (1usize << m) - 1;
    let copies = copy_count(families, sets);
    let layout = Layout {
        ambient: build_ambient(spec, c_struct, copies)?,
        pattern: a.clone(),
        block: c_struct.clone(),
        b: b.clone(),
        base: eppa.map().to_vec(),
        inner: enumerate_maps(b, a),
    };
    let data = copy_data(&layout, families, copies);
    let sel = match select(&data, epsilon, sets)? {
        Ok(sel) => sel,
        Err((c, osc)) => return no_failure(&layout, c, osc),
    };
    let (r, s) = thresholds(sel.k0, sel.k1, epsilon);
    let csize = c_struct.size();
    // Per nonempty I: its copy and the automorphism of C extending
    // f h^1(a) ↦ f h^0(a).
    let blocks: Vec<(IndexSet, usize, usize, Vec<Element>)> = sel
        .copies
        .par_iter()
        .enumerate()
        .map(|(idx, &c)| {
            let set = IndexSet(idx as u32 + 1);
            let (i0, i1) = least_pair(&data[c], sel.colour_index, sel.k0, sel.k1);
            let local: BTreeMap<Element, Element> = layout.inner[i1]
                .iter()
                .zip(&layout.inner[i0])
                .map(|(&p, &q)| (layout.base[p], layout.base[q]))
                .collect();
            let partial = PartialAutomorphism::new(c_struct.clone(), local)?;
            let auto = extend_partial_to_automorphism(&partial).ok_or_else(|| {
                Error::EppaContractViolated(format!("{} has no extension to an automorphism", partial.serialize("C")))
            })?;
            let auto: Vec<Element> = (0..csize).map(|e| auto.get(e).expect("total")).collect();
            Ok((set, c, i1, auto))
        })
        .collect::<Result<_>>()?;
    let mut x = BTreeMap::new();
    for (set, c, i1, _) in &blocks {
        let map = layout.copy_map(*c, &layout.inner[*i1]);
        x.insert(*set, Embedding::new_unchecked(a.clone(), layout.ambient.clone(), map));
    }
    let g = (0..m)
        .into_par_iter()
        .map(|i| {
            let parts: Vec<PartialAutomorphism> = blocks
                .iter()
                .map(|(set, c, _, auto)| {
                    let offset = c * csize;
                    let map =
                        (0..csize).map(|e| (offset + e, offset + if set.contains(i) { auto[e] } else { e })).collect();
                    PartialAutomorphism::new(layout.ambient.clone(), map)
                })
                .collect::<Result<_>>()?;
            union_partials(&parts)
        })
        .collect::<Result<Vec<_>>>()?;
    let chi = families[sel.colour_index].colouring(&layout.ambient, &layout.pattern);
    check_exact(&chi, &g, &x, sel.k0, sel.k1)?;
    let witness = NonTameWitness::new(layout.ambient.clone(), a.clone(), r, s, epsilon, (sel.k0, sel.k1), g, x)?;
    let verdict = verify_nontame_witness(&witness, &chi)?;
    if !verdict.passed {
        return Err(Error::WitnessInvalid(format!("constructed witness fails at {:?}", verdict.failure)));
    }
    Ok(Construction::Witness { witness, colour_index: sel.colour_index, colouring: chi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Arc<FinStructure> {
        Arc::new(FinStructure::complete_graph(2))
    }

    #[test]
    fn constant_family_has_no_failure() {
        let out = construct_nonnull_witness(
            &ClassSpec::graphs(),
            &k2(),
            &k2(),
            &[ColouringFamily::Constant],
            Rational::new(1, 4),
            2,
        )
        .unwrap();
        match out {
            Construction::NoRamseyFailure { h, .. } => assert_eq!(h.map(), &[0, 1]),
            Construction::Witness { .. } => panic!("constant colouring cannot fail"),
        }
    }

    #[test]
    fn orientation_witness_sizes() {
        let out = construct_nonnull_witness(
            &ClassSpec::graphs(),
            &k2(),
            &k2(),
            &[ColouringFamily::Orientation],
            Rational::new(1, 4),
            3,
        )
        .unwrap();
        let Construction::Witness { witness, colour_index, .. } = out else { panic!("expected a witness") };
        assert_eq!(colour_index, 0);
        let sys = witness.system();
        assert_eq!(sys.g.len(), 3);
        assert_eq!(sys.x.len(), 8);
        assert_eq!(sys.colour_pair, (Rational::from_integer(0), Rational::from_integer(1)));
    }

    #[test]
    fn tame_single_index() {
        let eppa = Embedding::identity(k2());
        let out = construct_nontame_witness(
            &ClassSpec::graphs(),
            &k2(),
            &[ColouringFamily::Orientation],
            Rational::new(1, 4),
            1,
            &eppa,
        )
        .unwrap();
        let Construction::Witness { witness, .. } = out else { panic!("expected a witness") };
        assert_eq!(witness.system().g.len(), 1);
        assert_eq!(witness.system().x.len(), 1);
    }

    #[test]
    fn free_joins_required() {
        let k2o = Arc::new(FinStructure::chain(2));
        let err = construct_nonnull_witness(
            &ClassSpec::linear_orders(),
            &k2o,
            &k2o,
            &[ColouringFamily::Orientation],
            Rational::from_integer(0),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotClosed(_)));
    }
}
