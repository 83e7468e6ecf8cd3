//! Canonical forms by colour refinement and individualization, with orbit
//! pruning from automorphisms found at equal leaves.

use std::cmp::Ordering;
use std::fmt;

use crate::structure::{Element, FinStructure};

/// Equal iff the structures are isomorphic (over the same signature).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    code: Vec<u32>,
}

impl CanonicalForm {
    pub fn as_slice(&self) -> &[u32] {
        &self.code
    }
}

impl fmt::Debug for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalForm({} words)", self.code.len())
    }
}

pub fn canonical_form(s: &FinStructure) -> CanonicalForm {
    canonical_labeling(s).0
}

/// The canonical form together with a labeling `perm` (element `e` goes to
/// `perm[e]`) such that `s.permuted(&perm)` is the canonical representative.
pub fn canonical_labeling(s: &FinStructure) -> (CanonicalForm, Vec<Element>) {
    let mut search = Search { s, best: None, automorphisms: Vec::new() };
    let root = initial_partition(s);
    search.explore(root, &mut Vec::new());
    let (code, lab) = search.best.expect("search visits at least one leaf");
    let mut full = signature_prefix(s);
    full.extend(code);
    (CanonicalForm { code: full }, lab)
}

/// Canonical representative of the isomorphism class of `s`.
pub fn canonical_representative(s: &FinStructure) -> (CanonicalForm, FinStructure) {
    let (form, perm) = canonical_labeling(s);
    (form, s.permuted(&perm))
}

pub fn isomorphic(a: &FinStructure, b: &FinStructure) -> bool {
    a.size() == b.size()
        && a.same_signature(b)
        && a.tuple_count() == b.tuple_count()
        && canonical_form(a) == canonical_form(b)
}

fn signature_prefix(s: &FinStructure) -> Vec<u32> {
    let text = s.signature().to_string();
    let mut out = vec![text.len() as u32];
    out.extend(text.bytes().map(u32::from));
    out
}

type Partition = Vec<Vec<Element>>;

fn initial_partition(s: &FinStructure) -> Partition {
    if s.size() == 0 {
        return Vec::new();
    }
    vec![(0..s.size()).collect()]
}

/// Splits cells by the multiset of (relation, positions of the element,
/// cells of every entry) over incident tuples until stable. Equivariant: the
/// result commutes with relabeling.
fn refine(s: &FinStructure, mut cells: Partition) -> Partition {
    let inc = s.incidence();
    loop {
        let mut cell_of = vec![0u32; s.size()];
        for (i, c) in cells.iter().enumerate() {
            for &e in c {
                cell_of[e] = i as u32;
            }
        }
        let descriptor = |e: Element| -> Vec<Vec<u32>> {
            let mut d = Vec::new();
            for (r, per) in inc.by_element.iter().enumerate() {
                for &ti in &per[e] {
                    let t = &inc.tuples[r][ti as usize];
                    let mut key = Vec::with_capacity(2 * t.len() + 1);
                    key.push(r as u32);
                    key.extend(t.iter().map(|&x| u32::from(x == e)));
                    key.extend(t.iter().map(|&x| cell_of[x]));
                    d.push(key);
                }
            }
            d.sort_unstable();
            d
        };
        let mut next: Partition = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<Vec<u32>>, Element)> = cell.iter().map(|&e| (descriptor(e), e)).collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|(_, e)| *e).collect());
                    start = i;
                }
            }
        }
        if next.len() == cells.len() {
            // Keep cell contents sorted so individualization order is stable.
            return next
                .into_iter()
                .map(|mut c| {
                    c.sort_unstable();
                    c
                })
                .collect();
        }
        cells = next;
    }
}

struct Search<'a> {
    s: &'a FinStructure,
    best: Option<(Vec<u32>, Vec<Element>)>,
    automorphisms: Vec<Vec<Element>>,
}

impl Search<'_> {
    fn leaf_code(&self, lab: &[Element]) -> Vec<u32> {
        let mut code = vec![self.s.size() as u32];
        for set in self.s.relations() {
            let mut tuples: Vec<Vec<u32>> = set.iter().map(|t| t.iter().map(|&e| lab[e] as u32).collect()).collect();
            tuples.sort_unstable();
            code.push(tuples.len() as u32);
            for t in tuples {
                code.extend(t);
            }
        }
        code
    }

    fn explore(&mut self, cells: Partition, prefix: &mut Vec<Element>) {
        let cells = refine(self.s, cells);
        let Some(target) = cells.iter().position(|c| c.len() > 1) else {
            let mut lab = vec![0; self.s.size()];
            for (i, c) in cells.iter().enumerate() {
                lab[c[0]] = i;
            }
            let code = self.leaf_code(&lab);
            match &self.best {
                None => self.best = Some((code, lab)),
                Some((best, best_lab)) => match code.cmp(best) {
                    Ordering::Less => self.best = Some((code, lab)),
                    Ordering::Equal => {
                        // lab and best_lab give the same structure, so
                        // best_lab^-1 ∘ lab is an automorphism.
                        let mut inv = vec![0; lab.len()];
                        for (e, &l) in best_lab.iter().enumerate() {
                            inv[l] = e;
                        }
                        let auto: Vec<Element> = lab.iter().map(|&l| inv[l]).collect();
                        if auto.iter().enumerate().any(|(i, &x)| i != x) {
                            self.automorphisms.push(auto);
                        }
                    }
                    Ordering::Greater => {}
                },
            }
            return;
        };
        let cell = cells[target].clone();
        let mut tried: Vec<Element> = Vec::new();
        for &x in &cell {
            if !tried.is_empty() && self.same_orbit(prefix, &tried, x) {
                continue;
            }
            let mut child = Vec::with_capacity(cells.len() + 1);
            child.extend(cells[..target].iter().cloned());
            child.push(vec![x]);
            child.push(cell.iter().copied().filter(|&y| y != x).collect());
            child.extend(cells[target + 1..].iter().cloned());
            prefix.push(x);
            self.explore(child, prefix);
            prefix.pop();
            tried.push(x);
        }
    }

    /// Whether `x` lies in the orbit of some tried element under the group
    /// generated by known automorphisms fixing `prefix` pointwise.
    fn same_orbit(&self, prefix: &[Element], tried: &[Element], x: Element) -> bool {
        let n = self.s.size();
        let mut parent: Vec<Element> = (0..n).collect();
        fn find(p: &mut [Element], mut a: Element) -> Element {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        for auto in &self.automorphisms {
            if prefix.iter().all(|&p| auto[p] == p) {
                for (a, &b) in auto.iter().enumerate() {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
            }
        }
        let rx = find(&mut parent, x);
        tried.iter().any(|&t| find(&mut parent, t) == rx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relabeled_triangle_has_same_form() {
        let k3 = FinStructure::complete_graph(3);
        let relabeled = k3.permuted(&[2, 0, 1]);
        assert_eq!(canonical_form(&k3), canonical_form(&relabeled));
        assert_ne!(canonical_form(&FinStructure::path_graph(3)), canonical_form(&k3));
    }

    #[test]
    fn representative_is_fixed_by_canonicalization() {
        let p4 = FinStructure::path_graph(4).permuted(&[3, 1, 0, 2]);
        let (form, rep) = canonical_representative(&p4);
        assert_eq!(canonical_representative(&rep).1, rep);
        assert_eq!(canonical_form(&rep), form);
    }

    #[test]
    fn empty_structure() {
        let e = FinStructure::graph(0, &[]).unwrap();
        let v = FinStructure::graph(1, &[]).unwrap();
        assert_ne!(canonical_form(&e), canonical_form(&v));
        assert_ne!(canonical_form(&e), canonical_form(&FinStructure::chain(0)));
    }
}
