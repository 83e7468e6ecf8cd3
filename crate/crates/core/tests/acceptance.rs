//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use fraisse_core::canon::isomorphic;
use fraisse_core::class::{build_approximant, builtin_bit_graph, check_class_properties, check_extension_property};
use fraisse_core::config::Config;
use fraisse_core::construct::{construct_nonnull_witness, construct_nontame_witness, Construction};
use fraisse_core::eppa::{search_eppa_witness, verify_eppa_witness, EppaSearch};
use fraisse_core::harness::{self, recheck_no_failure, EppaSource};
use fraisse_core::witness::{
    nonnull_to_independence_set, nontame_to_independence_set, verify_nonnull_witness, verify_nontame_witness,
};
use fraisse_core::{
    canonical_form, ClassSpec, Colouring, ColouringFamily, Error, FinStructure, NonNullWitness, Rational,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLASS_SUITE_LIMIT: Duration = Duration::from_secs(60);
const APPROXIMANT_LIMIT: Duration = Duration::from_secs(120);
const PIPELINE_LIMIT: Duration = Duration::from_secs(600);
const EPPA_LIMIT: Duration = Duration::from_secs(300);
const TAME_LIMIT: Duration = Duration::from_secs(300);

const RANDOM_PAIRS: usize = 1000;
const PERTURBATIONS: u64 = 100;
const RANDOM_SEEDS: [u64; 5] = [1, 2, 3, 5, 8];

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    check(took < limit, format!("took {took:.1?}, limit {limit:?}"))
}

fn families() -> Vec<ColouringFamily> {
    let mut out = vec![ColouringFamily::Constant, ColouringFamily::Orientation, ColouringFamily::Parity];
    out.extend(RANDOM_SEEDS.iter().map(|&seed| ColouringFamily::SeededRandom { seed, palette: 3 }));
    out
}

fn named(name: &str) -> Arc<FinStructure> {
    Arc::new(fraisse_core::config::builtin_structure(name).unwrap().unwrap())
}

fn class_suite() -> Outcome {
    let start = Instant::now();
    let graphs = check_class_properties(&ClassSpec::graphs(), 4).map_err(|e| e.to_string())?;
    for (name, p) in [
        ("HP", &graphs.hp),
        ("JEP", &graphs.jep),
        ("AP", &graphs.ap),
        ("freeJEP", &graphs.free_jep),
        ("freeAP", &graphs.free_ap),
    ] {
        check(p.holds, format!("graphs fail {name}"))?;
    }
    let k3 = check_class_properties(&ClassSpec::k_free(3), 4).map_err(|e| e.to_string())?;
    check(k3.free_ap.holds, "K3-free graphs fail freeAP")?;
    let orders = check_class_properties(&ClassSpec::linear_orders(), 2).map_err(|e| e.to_string())?;
    let ce = orders.free_jep.counterexample.as_ref().ok_or("linear orders pass freeJEP")?;
    check(!ce.structures.is_empty(), "counterexample names no structures")?;
    for (name, text) in &ce.structures {
        text.parse::<FinStructure>().map_err(|e| format!("counterexample {name} does not parse: {e}"))?;
    }
    within(start, CLASS_SUITE_LIMIT)?;
    Ok(format!("graphs {:?}, freeJEP counterexample: {}", graphs.members_per_size, ce.description))
}

fn isomorphism_oracle() -> Outcome {
    let mut compared = 0usize;
    for n in 0..=5 {
        let all = all_graphs(n);
        let codes: Vec<u64> = all.iter().map(brute_graph_code).collect();
        let forms: Vec<_> = all.iter().map(canonical_form).collect();
        for i in 0..all.len() {
            for j in i..all.len() {
                compared += 1;
                check(
                    (codes[i] == codes[j]) == (forms[i] == forms[j]),
                    format!("disagreement on {} and {}", all[i], all[j]),
                )?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut positives = 0usize;
    for k in 0..RANDOM_PAIRS {
        let a = random_graph(&mut rng, 6, 0.5);
        let b = if k % 2 == 0 {
            let perm = &permutations(6)[rng.gen_range(0..720)];
            a.permuted(perm)
        } else {
            random_graph(&mut rng, 6, 0.5)
        };
        let brute = brute_isomorphic(&a, &b);
        positives += usize::from(brute);
        check(brute == (canonical_form(&a) == canonical_form(&b)), format!("disagreement on {a} and {b}"))?;
        check(brute == isomorphic(&a, &b), format!("isomorphic() disagrees on {a} and {b}"))?;
    }
    Ok(format!("{compared} exhaustive pairs, {RANDOM_PAIRS} random pairs ({positives} isomorphic)"))
}

fn approximants() -> Outcome {
    let start = Instant::now();
    let bit = builtin_bit_graph(4).map_err(|e| e.to_string())?;
    check_extension_property(&ClassSpec::graphs(), &bit, 2).map_err(|f| format!("bit graph fails: {f:?}"))?;
    let spec = ClassSpec::k_free(3);
    let m = build_approximant(&spec, 2, 64).map_err(|e| e.to_string())?.structure;
    check(brute_embeddings(&m, &FinStructure::complete_graph(3)).is_empty(), "approximant contains a triangle")?;
    check_extension_property(&spec, &m, 2).map_err(|f| format!("approximant fails: {f:?}"))?;
    within(start, APPROXIMANT_LIMIT)?;
    Ok(format!("bit graph on {} vertices, K3-free approximant on {} vertices", bit.size(), m.size()))
}

struct PipelineRun {
    label: String,
    witness: NonNullWitness,
    colouring: Colouring,
    epsilon: Rational,
}

/// Every (family, A, B, epsilon, n) combination of the non-null pipeline.
fn pipeline_grid() -> Vec<(ColouringFamily, &'static str, &'static str, Rational, usize)> {
    let mut grid = Vec::new();
    for family in families() {
        for a in ["vertex", "K2"] {
            for b in ["K2", "P3", "K3"] {
                for eps in [Rational::from_integer(0), Rational::new(1, 4)] {
                    for n in 1..=3 {
                        grid.push((family.clone(), a, b, eps, n));
                    }
                }
            }
        }
    }
    grid
}

fn nonnull_pipeline(witnesses: &mut Vec<PipelineRun>) -> Outcome {
    let start = Instant::now();
    let graphs = ClassSpec::graphs();
    let grid = pipeline_grid();
    let mut no_failure = 0usize;
    for (family, a, b, eps, n) in &grid {
        let label = format!("{family} A={a} B={b} eps={eps} n={n}");
        let (pa, pb) = (named(a), named(b));
        match construct_nonnull_witness(&graphs, &pa, &pb, std::slice::from_ref(family), *eps, *n) {
            Ok(Construction::NoRamseyFailure { h, .. }) => {
                check(recheck_no_failure(&h, &pa, std::slice::from_ref(family), *eps), format!("{label}: recheck"))?;
                no_failure += 1;
            }
            Ok(Construction::Witness { witness, colouring, .. }) => {
                let verdict = verify_nonnull_witness(&witness, &colouring).map_err(|e| format!("{label}: {e}"))?;
                check(verdict.passed, format!("{label}: verification fails at {:?}", verdict.failure))?;
                let ind = nonnull_to_independence_set(&witness, &colouring).map_err(|e| format!("{label}: {e}"))?;
                check(ind.result.holds, format!("{label}: not an independence set"))?;
                witnesses.push(PipelineRun { label, witness, colouring, epsilon: *eps });
            }
            Err(e) => return Err(format!("{label}: {e}")),
        }
    }
    within(start, PIPELINE_LIMIT)?;
    Ok(format!("{} runs: {no_failure} without Ramsey failure, {} witnesses", grid.len(), witnesses.len()))
}

fn gap_robustness(witnesses: &[PipelineRun]) -> Outcome {
    let mut checked = 0usize;
    for (k, run) in witnesses.iter().enumerate() {
        for trial in 0..PERTURBATIONS {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64 * PERTURBATIONS + trial);
            let half = run.epsilon / 2;
            let perturbed =
                run.colouring.map_values(|_, v| v + half * Rational::new(rng.gen_range(-1000..=1000), 1000));
            let verdict = verify_nonnull_witness(&run.witness, &perturbed).map_err(|e| e.to_string())?;
            check(verdict.passed, format!("{} trial {trial}: fails at {:?}", run.label, verdict.failure))?;
            checked += 1;
        }
    }
    check(!witnesses.is_empty(), "no witnesses to perturb")?;
    Ok(format!("{checked} perturbed colourings"))
}

fn eppa() -> Outcome {
    let start = Instant::now();
    let graphs = ClassSpec::graphs();
    let identity = |s: FinStructure| {
        let s = Arc::new(s);
        fraisse_core::Embedding::new(s.clone(), s.clone(), (0..s.size()).collect()).unwrap()
    };
    check(verify_eppa_witness(&identity(FinStructure::complete_graph(2))).is_ok(), "K2 -> K2 rejected")?;
    let p3 = FinStructure::path_graph(3);
    match verify_eppa_witness(&identity(p3.clone())) {
        Ok(_) => return Err("P3 -> P3 accepted".into()),
        Err(p) => check(
            p.map().iter().map(|(&x, &y)| (x, y)).collect::<Vec<_>>() == [(0, 1)],
            format!("unexpected failing map {:?}", p.map()),
        )?,
    }
    let exhausted = search_eppa_witness(&p3, &graphs, 3).map_err(|e| e.to_string())?;
    check(matches!(exhausted, EppaSearch::Exhausted { .. }), "P3 has a witness on 3 vertices")?;
    let found = match search_eppa_witness(&p3, &graphs, 6).map_err(|e| e.to_string())? {
        EppaSearch::Found(w) => w,
        EppaSearch::Exhausted { .. } => return Err("no P3 witness up to 6 vertices".into()),
    };
    let proof = verify_eppa_witness(&found.inclusion).map_err(|p| format!("found witness fails at {:?}", p.map()))?;
    check(proof == found.proof, "proof log differs on re-verification")?;
    within(start, EPPA_LIMIT)?;
    Ok(format!("P3 witness on {} vertices, {} partial automorphisms", found.inclusion.target().size(), proof.len()))
}

fn k2_eppa() -> Result<fraisse_core::Embedding, String> {
    match search_eppa_witness(&FinStructure::complete_graph(2), &ClassSpec::graphs(), 3).map_err(|e| e.to_string())? {
        EppaSearch::Found(w) => Ok(w.inclusion),
        EppaSearch::Exhausted { .. } => Err("no EPPA witness for K2".into()),
    }
}

fn nontame_pipeline() -> Outcome {
    let start = Instant::now();
    let f = k2_eppa()?;
    verify_eppa_witness(&f).map_err(|p| format!("K2 witness fails at {:?}", p.map()))?;
    let k2 = named("K2");
    let eps = Rational::new(1, 4);
    for m in 1..=3 {
        match construct_nontame_witness(&ClassSpec::graphs(), &k2, &[ColouringFamily::Orientation], eps, m, &f) {
            Ok(Construction::Witness { witness, colouring, .. }) => {
                let verdict = verify_nontame_witness(&witness, &colouring).map_err(|e| e.to_string())?;
                check(verdict.passed, format!("m={m}: fails at {:?}", verdict.failure))?;
                let ind = nontame_to_independence_set(&witness, &colouring).map_err(|e| e.to_string())?;
                check(ind.result.holds, format!("m={m}: not an independence set"))?;
            }
            Ok(Construction::NoRamseyFailure { .. }) => return Err(format!("m={m}: orientation reported no failure")),
            Err(e @ Error::EppaContractViolated(_)) => return Err(format!("m={m}: {e}")),
            Err(e) => return Err(format!("m={m}: {e}")),
        }
    }
    within(start, TAME_LIMIT)?;
    Ok("m = 1, 2, 3 verified".into())
}

fn harness_configs() -> Vec<(Config, bool)> {
    let here = Path::new(".");
    let mut out = Vec::new();
    for (family, a, b, eps, n) in pipeline_grid() {
        let text = format!(
            "[null-witness]\nclass = graphs\npattern = {a}\ncopy = {b}\nfamilies = {family}\nepsilon = {eps}\nn = {n}\n"
        );
        out.push((Config::parse(&text, here).unwrap(), false));
    }
    for m in 1..=3 {
        let text = format!(
            "[tame-witness]\nclass = graphs\npattern = K2\ncopy = K2\nfamilies = orientation\nepsilon = 1/4\nm = {m}\n"
        );
        out.push((Config::parse(&text, here).unwrap(), true));
    }
    out
}

fn reports(threads: usize, configs: &[(Config, bool)]) -> Result<Vec<String>, String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        configs
            .iter()
            .map(|(cfg, tame)| {
                let run = if *tame {
                    harness::run_tame_witness(cfg, EppaSource::Search(3), 0)
                } else {
                    harness::run_null_witness(cfg, 0)
                };
                let run = run.map_err(|e| e.to_string())?;
                check(!run.negative, format!("negative outcome {}", run.report.outcome))?;
                run.report.to_json().map_err(|e| e.to_string())
            })
            .collect()
    })
}

fn determinism() -> Outcome {
    let configs = harness_configs();
    let one = reports(1, &configs)?;
    let four = reports(4, &configs)?;
    for (k, (a, b)) in one.iter().zip(&four).enumerate() {
        check(a == b, format!("report {k} differs between 1 and 4 threads"))?;
    }
    Ok(format!("{} reports byte-identical", one.len()))
}

fn main() {
    let mut witnesses = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("class properties", class_suite()),
        ("isomorphism oracle", isomorphism_oracle()),
        ("approximants", approximants()),
        ("non-null pipeline", nonnull_pipeline(&mut witnesses)),
        ("gap robustness", gap_robustness(&witnesses)),
        ("EPPA", eppa()),
        ("non-tame pipeline", nontame_pipeline()),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (k, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name} ({why})", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
