mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::*;
use fraisse_core::class::{generate_members, members_of_size};
use fraisse_core::colouring::{oscillation, parse_rational};
use fraisse_core::embedding::{enumerate_embeddings, extend_partial_to_automorphism};
use fraisse_core::eppa::{image_partial_automorphisms, search_eppa_witness, EppaSearch};
use fraisse_core::witness::is_independence_set;
use fraisse_core::{canonical_form, ClassSpec, Colouring, Embedding, FinStructure, PartialAutomorphism, Rational};

#[test]
fn graph_member_counts_match_brute_force() {
    let graphs = ClassSpec::graphs();
    for n in 0..=5 {
        let expected = count_types(&all_graphs(n));
        assert_eq!(members_of_size(&graphs, n).unwrap().len(), expected, "size {n}");
    }
    assert_eq!(generate_members(&graphs, 3).unwrap().len(), 1 + 1 + 2 + 4);
}

#[test]
fn k_free_counts_match_brute_force() {
    for k in [3, 4] {
        let spec = ClassSpec::k_free(k);
        let kk = FinStructure::complete_graph(k);
        for n in 0..=5 {
            let members: Vec<FinStructure> =
                all_graphs(n).into_iter().filter(|g| brute_embeddings(g, &kk).is_empty()).collect();
            assert_eq!(members_of_size(&spec, n).unwrap().len(), count_types(&members), "K{k}-free size {n}");
        }
    }
}

#[test]
fn embedding_counts_on_small_graphs() {
    let k3 = Arc::new(FinStructure::complete_graph(3));
    let p3 = Arc::new(FinStructure::path_graph(3));
    let k2 = Arc::new(FinStructure::complete_graph(2));
    let c4 = Arc::new(FinStructure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap());
    assert_eq!(enumerate_embeddings(&k3, &k2).len(), 6);
    assert_eq!(enumerate_embeddings(&k3, &p3).len(), 0);
    assert_eq!(enumerate_embeddings(&c4, &p3).len(), brute_embeddings(&c4, &p3).len());
    assert_eq!(enumerate_embeddings(&c4, &p3).len(), 8);
}

#[test]
fn automorphism_extension_matches_brute_force() {
    for mask in 0..1u64 << 6 {
        let g = Arc::new(graph_from_mask(4, mask));
        let autos: Vec<Vec<usize>> = permutations(4).into_iter().filter(|p| is_embedding(&g, &g, p)).collect();
        for p in image_partial_automorphisms(&g, &[0, 1, 2, 3]) {
            let brute = autos.iter().find(|a| p.map().iter().all(|(&x, &y)| a[x] == y));
            let found = extend_partial_to_automorphism(&p);
            assert_eq!(found.is_some(), brute.is_some(), "graph {mask:b}, map {:?}", p.map());
            if let Some(ext) = found {
                let total: Vec<usize> = (0..4).map(|e| ext.get(e).unwrap()).collect();
                assert!(is_embedding(&g, &g, &total));
                assert!(p.map().iter().all(|(&x, &y)| total[x] == y));
            }
        }
    }
}

/// Brute-force independence: every `J ⊆ candidates` and every `σ: J → sets`.
fn brute_independent(
    ambient: &Arc<FinStructure>,
    pattern: &Arc<FinStructure>,
    sets: &[Vec<Vec<usize>>],
    candidates: &[PartialAutomorphism],
) -> bool {
    let points = brute_embeddings(ambient, pattern);
    let c = candidates.len();
    let k = sets.len();
    (0..1u32 << c).all(|jmask| {
        let js: Vec<usize> = (0..c).filter(|j| jmask >> j & 1 == 1).collect();
        (0..k.pow(js.len() as u32)).all(|mut code| {
            let sigma: Vec<usize> = js
                .iter()
                .map(|_| {
                    let t = code % k;
                    code /= k;
                    t
                })
                .collect();
            points.iter().any(|p| {
                js.iter().zip(&sigma).all(|(&j, &t)| {
                    let moved: Option<Vec<usize>> = p.iter().map(|&e| candidates[j].get(e)).collect();
                    moved.is_some_and(|m| sets[t].contains(&m))
                })
            })
        })
    })
}

#[test]
fn independence_check_matches_brute_force() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let c4 = Arc::new(FinStructure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap());
    let v = Arc::new(FinStructure::graph(1, &[]).unwrap());
    let k2 = Arc::new(FinStructure::complete_graph(2));
    let pas = image_partial_automorphisms(&c4, &[0, 1, 2, 3]);
    for pattern in [&v, &k2] {
        let points = brute_embeddings(&c4, pattern);
        for _ in 0..60 {
            let sets: Vec<Vec<Vec<usize>>> =
                (0..2).map(|_| points.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()).collect();
            let candidates: Vec<PartialAutomorphism> =
                (0..rng.gen_range(1..=3)).map(|_| pas[rng.gen_range(0..pas.len())].clone()).collect();
            let as_embeddings: Vec<Vec<Embedding>> = sets
                .iter()
                .map(|s| s.iter().map(|m| Embedding::new(pattern.clone(), c4.clone(), m.clone()).unwrap()).collect())
                .collect();
            let got = is_independence_set(&c4, pattern, &as_embeddings, &candidates);
            assert_eq!(got.holds, brute_independent(&c4, pattern, &sets, &candidates));
            if let Some((js, sigma)) = got.counterexample {
                // The reported selection really has an empty intersection.
                let chosen: Vec<PartialAutomorphism> = js.iter().map(|&j| candidates[j].clone()).collect();
                let picked: Vec<Vec<Vec<usize>>> = sigma.iter().map(|&t| sets[t].clone()).collect();
                let empty = brute_embeddings(&c4, pattern).iter().all(|p| {
                    !chosen.iter().zip(&picked).all(|(g, set)| {
                        let moved: Option<Vec<usize>> = p.iter().map(|&e| g.get(e)).collect();
                        moved.is_some_and(|m| set.contains(&m))
                    })
                });
                assert!(empty);
            }
        }
    }
}

#[test]
fn eppa_search_is_monotone_and_reverified() {
    let graphs = ClassSpec::graphs();
    let p3 = FinStructure::path_graph(3);
    for max in 0..=3 {
        assert!(matches!(search_eppa_witness(&p3, &graphs, max).unwrap(), EppaSearch::Exhausted { .. }));
    }
    match search_eppa_witness(&p3, &graphs, 5).unwrap() {
        EppaSearch::Found(w) => {
            // Independent check: every partial isomorphism of the image
            // extends to a brute-force automorphism of the target.
            let b = w.inclusion.target();
            let autos: Vec<Vec<usize>> = permutations(b.size()).into_iter().filter(|p| is_embedding(b, b, p)).collect();
            for p in image_partial_automorphisms(w.inclusion.target_arc(), w.inclusion.map()) {
                assert!(autos.iter().any(|a| p.map().iter().all(|(&x, &y)| a[x] == y)));
            }
        }
        other => panic!("expected a witness, got {other:?}"),
    }
}

#[test]
fn canonical_forms_separate_all_graphs_on_five_vertices() {
    let graphs = all_graphs(5);
    let mut by_code: BTreeMap<u64, fraisse_core::CanonicalForm> = BTreeMap::new();
    let mut forms = BTreeMap::new();
    for g in &graphs {
        let code = brute_graph_code(g);
        let form = canonical_form(g);
        if let Some(prev) = by_code.insert(code, form.clone()) {
            assert_eq!(prev, form);
        }
        forms.insert(form, code);
    }
    assert_eq!(forms.len(), by_code.len());
    assert_eq!(forms.len(), 34);
}

#[test]
fn oscillation_examples_from_tables() {
    let k3 = Arc::new(FinStructure::complete_graph(3));
    let v = Arc::new(FinStructure::graph(1, &[]).unwrap());
    let table = vec![
        (vec![0], parse_rational("1/3").unwrap()),
        (vec![1], parse_rational("-2").unwrap()),
        (vec![2], parse_rational("5/6").unwrap()),
    ];
    let chi = Colouring::from_table(k3.clone(), v.clone(), table).unwrap();
    let all: Vec<Embedding> = chi.embeddings().collect();
    assert_eq!(oscillation(&chi, &all).unwrap(), Rational::new(17, 6));
    assert!(Colouring::from_table(k3, v, vec![(vec![0], Rational::from_integer(0))]).is_err());
}
