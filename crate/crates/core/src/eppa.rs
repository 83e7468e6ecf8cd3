//! EPPA witnesses: embeddings `A → B` such that every partial automorphism
//! of the image of `A` extends to an automorphism of `B`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::class::{generate_members, ClassSpec};
use crate::embedding::{enumerate_embeddings, extend_partial_to_automorphism, Embedding, PartialAutomorphism};
use crate::error::{Error, Result};
use crate::structure::{Element, FinStructure};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EppaWitness {
    pub inclusion: Embedding,
    /// Each partial automorphism of the image with its extension.
    pub proof: Vec<(PartialAutomorphism, PartialAutomorphism)>,
}

impl EppaWitness {
    /// One line per partial automorphism: `p => automorphism`.
    pub fn proof_log(&self, name: &str) -> Vec<String> {
        self.proof.iter().map(|(p, g)| format!("{} => {}", p.serialize(name), g.serialize(name))).collect()
    }
}

/// All partial automorphisms of `B` with domain and range inside `image`:
/// by domain size, then domain, then images, lexicographically.
pub fn image_partial_automorphisms(b: &Arc<FinStructure>, image: &[Element]) -> Vec<PartialAutomorphism> {
    let mut image = image.to_vec();
    image.sort_unstable();
    let k = image.len();
    let mut out = Vec::new();
    for size in 0..=k {
        let mut domains = Vec::new();
        choose(&image, size, &mut Vec::new(), &mut domains);
        for dom in domains {
            let mut targets = Vec::new();
            arrange(&image, size, &mut Vec::new(), &mut targets);
            for tgt in targets {
                let map: BTreeMap<Element, Element> = dom.iter().copied().zip(tgt).collect();
                if let Ok(p) = PartialAutomorphism::new(b.clone(), map) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn choose(items: &[Element], size: usize, cur: &mut Vec<Element>, out: &mut Vec<Vec<Element>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    let start = cur.last().map_or(0, |&l| items.iter().position(|&x| x == l).unwrap() + 1);
    for i in start..items.len() {
        cur.push(items[i]);
        choose(items, size, cur, out);
        cur.pop();
    }
}

fn arrange(items: &[Element], size: usize, cur: &mut Vec<Element>, out: &mut Vec<Vec<Element>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for &x in items {
        if !cur.contains(&x) {
            cur.push(x);
            arrange(items, size, cur, out);
            cur.pop();
        }
    }
}

/// The proof log on success; the least non-extendable partial automorphism
/// otherwise.
pub fn verify_eppa_witness(
    candidate: &Embedding,
) -> std::result::Result<Vec<(PartialAutomorphism, PartialAutomorphism)>, PartialAutomorphism> {
    let b = candidate.target_arc();
    let mut proof = Vec::new();
    for p in image_partial_automorphisms(b, candidate.map()) {
        match extend_partial_to_automorphism(&p) {
            Some(g) => proof.push((p, g)),
            None => return Err(p),
        }
    }
    Ok(proof)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EppaSearch {
    Found(EppaWitness),
    /// No witness among members of carrier at most `max_size`.
    Exhausted {
        candidates: usize,
    },
}

/// Members in generation order (size, then canonical form), then
/// embeddings of `a` in lexicographic order; the first passing candidate.
pub fn search_eppa_witness(a: &FinStructure, spec: &ClassSpec, max_size: usize) -> Result<EppaSearch> {
    if !spec.is_member(a) {
        return Err(Error::InvalidStructure(format!("pattern is not a member of class {}", spec.name)));
    }
    let a = Arc::new(a.clone());
    let members = generate_members(spec, max_size)?;
    let candidates: Vec<Embedding> = members
        .into_iter()
        .filter(|b| b.size() >= a.size())
        .flat_map(|b| enumerate_embeddings(&Arc::new(b), &a))
        .collect();
    let found = candidates
        .par_iter()
        .map(|e| verify_eppa_witness(e).ok().map(|proof| (e, proof)))
        .find_first(Option::is_some)
        .flatten();
    Ok(match found {
        Some((e, proof)) => EppaSearch::Found(EppaWitness { inclusion: e.clone(), proof }),
        None => EppaSearch::Exhausted { candidates: candidates.len() },
    })
}
