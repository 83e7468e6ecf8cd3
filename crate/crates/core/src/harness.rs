//! Run orchestration shared by the CLI and tests: each run produces a
//! report, whether its outcome is negative, and optional artifact files.

use std::path::Path;
use std::sync::Arc;

use serde_json::json;

use crate::class::{build_approximant, builtin_bit_graph, check_class_properties, check_extension_property, ClassSpec};
use crate::colouring::{check_ramsey_upto, oscillation_on_copy, ColouringFamily, RamseyOutcome, RamseyQuery, Rational};
use crate::config::{Bundle, Config, Section};
use crate::construct::{construct_nonnull_witness, construct_nontame_witness, Construction};
use crate::embedding::{enumerate_maps, Embedding};
use crate::eppa::{search_eppa_witness, verify_eppa_witness, EppaSearch, EppaWitness};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::structure::FinStructure;
use crate::witness::{
    nonnull_to_independence_set, nontame_to_independence_set, verify_nonnull_witness, verify_nontame_witness,
};

#[derive(Clone, Debug)]
pub struct Run {
    pub report: Report,
    /// Exhausted, insufficient copies or budget exceeded.
    pub negative: bool,
    /// `(file name, contents)` written next to the report.
    pub artifacts: Vec<(String, String)>,
}

impl Run {
    fn new(report: Report) -> Self {
        Run { report, negative: false, artifacts: Vec::new() }
    }

    fn negative(mut self, outcome: &str) -> Self {
        self.report.outcome = outcome.into();
        self.negative = true;
        self
    }
}

pub fn run_check_class(spec: &ClassSpec, max_size: usize, seed: u64) -> Result<Run> {
    let mut report = Report::new("check-class", seed);
    report.param("class", &spec.name).param("max_size", max_size);
    report.push(check_class_properties(spec, max_size)?)?;
    Ok(Run::new(report))
}

pub fn run_approximant(spec: &ClassSpec, rank: usize, budget: usize, builtin: Option<u32>, seed: u64) -> Result<Run> {
    let mut report = Report::new("approximant", seed);
    report.param("class", &spec.name).param("rank", rank).param("budget", budget);
    if let Some(m) = builtin {
        report.param("builtin", format!("bit-graph:{m}"));
        let s = builtin_bit_graph(m)?;
        let check = check_extension_property(spec, &s, rank);
        report.push(json!({
            "structure": s.to_string(),
            "size": s.size(),
            "extension_property": check.is_ok(),
            "failure": check.err().map(|f| json!({
                "subset": f.subset,
                "extension": f.extension.to_string(),
            })),
        }))?;
        return Ok(Run::new(report));
    }
    match build_approximant(spec, rank, budget) {
        Ok(a) => {
            let holds = check_extension_property(spec, &a.structure, rank).is_ok();
            report.push(json!({
                "structure": a.structure.to_string(),
                "size": a.structure.size(),
                "extension_property": holds,
            }))?;
            Ok(Run::new(report))
        }
        Err(Error::BudgetExceeded { budget, partial, unrealized }) => {
            report.push(json!({
                "partial": partial.to_string(),
                "size": partial.size(),
                "budget": budget,
                "unrealized": unrealized,
            }))?;
            Ok(Run::new(report).negative("budget-exceeded"))
        }
        Err(e) => Err(e),
    }
}

pub fn run_ramsey(cfg: &Config, seed: u64) -> Result<Run> {
    expect_section(cfg, Section::Ramsey)?;
    let pattern = cfg.structure("pattern")?;
    let copy = cfg.structure("copy")?;
    let ambient = cfg.structure("ambient")?;
    let families = cfg.families("families", seed)?;
    let epsilon = cfg.rational("epsilon")?;
    let mut report = Report::new("ramsey", seed);
    for (k, v) in cfg.values() {
        report.param(k, v);
    }
    let colourings = families.iter().map(|f| f.colouring(&ambient, &pattern)).collect();
    let q = RamseyQuery { pattern: pattern.clone(), copy, colourings, epsilon };
    match check_ramsey_upto(&q)? {
        RamseyOutcome::Monochromatic { h } => {
            report.push(json!({ "copy": h.serialize("B", "F") }))?;
            Ok(Run::new(report))
        }
        RamseyOutcome::Exhausted { worst } => {
            for (h, osc) in worst {
                report.push(json!({ "copy": h.serialize("B", "F"), "worst_oscillation": osc.to_string() }))?;
            }
            Ok(Run::new(report).negative("exhausted"))
        }
    }
}

fn expect_section(cfg: &Config, section: Section) -> Result<()> {
    if cfg.section != section {
        return Err(Error::parse(1, format!("expected a [{section}] config, found [{}]", cfg.section)));
    }
    Ok(())
}

fn no_failure_item(
    h: &Embedding,
    pattern: &Arc<FinStructure>,
    oscillations: &[Rational],
    families: &[ColouringFamily],
    epsilon: Rational,
) -> serde_json::Value {
    json!({
        "kind": "no-ramsey-failure",
        "copy": h.serialize("B", "U"),
        "oscillations": families
            .iter()
            .zip(oscillations)
            .map(|(f, o)| json!({ "family": f.to_string(), "oscillation": o.to_string() }))
            .collect::<Vec<_>>(),
        "recheck": recheck_no_failure(h, pattern, families, epsilon),
    })
}

/// Re-evaluates every family on `h ∘ Binom(B, A)` from scratch.
pub fn recheck_no_failure(
    h: &Embedding,
    pattern: &Arc<FinStructure>,
    families: &[ColouringFamily],
    epsilon: Rational,
) -> bool {
    let inner = enumerate_maps(h.source(), pattern);
    families.iter().all(|f| {
        let chi = f.colouring(h.target_arc(), pattern);
        oscillation_on_copy(&chi, h.map(), &inner) <= epsilon * 2
    })
}

fn witness_params(cfg: &Config, report: &mut Report) {
    for (k, v) in cfg.values() {
        report.param(k, v);
    }
}

pub fn run_null_witness(cfg: &Config, seed: u64) -> Result<Run> {
    expect_section(cfg, Section::NullWitness)?;
    let spec = cfg.class("class")?;
    let a = cfg.structure("pattern")?;
    let b = cfg.structure("copy")?;
    let families = cfg.families("families", seed)?;
    let epsilon = cfg.rational("epsilon")?;
    let n = cfg.integer("n")?;
    let mut report = Report::new("null-witness", seed);
    witness_params(cfg, &mut report);
    report.param("oscillation_bound", epsilon * 2);
    match construct_nonnull_witness(&spec, &a, &b, &families, epsilon, n) {
        Ok(Construction::NoRamseyFailure { h, oscillations }) => {
            report.outcome = "no-ramsey-failure".into();
            report.push(no_failure_item(&h, &a, &oscillations, &families, epsilon))?;
            Ok(Run::new(report))
        }
        Ok(Construction::Witness { witness, colour_index, colouring }) => {
            let verdict = verify_nonnull_witness(&witness, &colouring)?;
            let independence = nonnull_to_independence_set(&witness, &colouring)?;
            let sys = witness.system();
            let text = witness_bundle(&sys.pattern, &sys.ambient, &witness.serialize("A", "U"));
            report.outcome = "witness".into();
            report.push(json!({
                "kind": "nonnull-witness",
                "colour_index": colour_index,
                "family": families[colour_index].to_string(),
                "k0": sys.colour_pair.0.to_string(),
                "k1": sys.colour_pair.1.to_string(),
                "r": sys.r.to_string(),
                "s": sys.s.to_string(),
                "epsilon": sys.epsilon.to_string(),
                "oscillation_bound": (sys.epsilon * 2).to_string(),
                "copies": sys.ambient.size() / b.size(),
                "witness": text,
                "verification": verdict,
                "independence": independence,
            }))?;
            let mut run = Run::new(report);
            run.artifacts.push(("null-witness.txt".into(), text));
            Ok(run)
        }
        Err(Error::InsufficientCopies { achieved, required }) => {
            report.push(json!({ "achieved": achieved, "required": required }))?;
            Ok(Run::new(report).negative("insufficient-copies"))
        }
        Err(e) => Err(e),
    }
}

/// Where a tame-witness run gets its EPPA witness for `B`.
#[derive(Clone, Debug)]
pub enum EppaSource<'a> {
    /// A bundle with structures and one `embed B->C` line.
    File(&'a Path),
    /// Brute-force search up to this carrier size.
    Search(usize),
}

pub fn load_eppa_file(path: &Path) -> Result<Embedding> {
    let text = std::fs::read_to_string(path)?;
    let bundle = Bundle::parse(&text)?;
    let (n, line) = bundle
        .lines
        .iter()
        .find(|(_, l)| l.starts_with("embed "))
        .ok_or_else(|| Error::parse(1, "EPPA file has no embed line"))?;
    Embedding::parse(line, |name| bundle.get(name)).map_err(|e| Error::parse(*n, e.to_string()))
}

pub fn run_tame_witness(cfg: &Config, eppa: EppaSource<'_>, seed: u64) -> Result<Run> {
    expect_section(cfg, Section::TameWitness)?;
    let spec = cfg.class("class")?;
    let a = cfg.structure("pattern")?;
    let families = cfg.families("families", seed)?;
    let epsilon = cfg.rational("epsilon")?;
    let m = cfg.integer("m")?;
    let mut report = Report::new("tame-witness", seed);
    witness_params(cfg, &mut report);
    report.param("oscillation_bound", epsilon * 2);
    let f = match eppa {
        EppaSource::File(path) => {
            report.param("eppa", path.display());
            let f = load_eppa_file(path)?;
            if let Err(p) = verify_eppa_witness(&f) {
                return Err(Error::EppaContractViolated(format!("supplied witness fails at {}", p.serialize("C"))));
            }
            f
        }
        EppaSource::Search(max) => {
            report.param("eppa_search", max);
            let b = cfg.structure("copy")?;
            match search_eppa_witness(&b, &spec, max)? {
                EppaSearch::Found(w) => w.inclusion,
                EppaSearch::Exhausted { candidates } => {
                    report.push(json!({ "kind": "eppa-exhausted", "candidates": candidates }))?;
                    return Ok(Run::new(report).negative("exhausted"));
                }
            }
        }
    };
    match construct_nontame_witness(&spec, &a, &families, epsilon, m, &f) {
        Ok(Construction::NoRamseyFailure { h, oscillations }) => {
            report.outcome = "no-ramsey-failure".into();
            report.push(no_failure_item(&h, &a, &oscillations, &families, epsilon))?;
            Ok(Run::new(report))
        }
        Ok(Construction::Witness { witness, colour_index, colouring }) => {
            let verdict = verify_nontame_witness(&witness, &colouring)?;
            let independence = nontame_to_independence_set(&witness, &colouring)?;
            let sys = witness.system();
            let text = witness_bundle(&sys.pattern, &sys.ambient, &witness.serialize("A", "U"));
            report.outcome = "witness".into();
            report.push(json!({
                "kind": "nontame-witness",
                "eppa": format!(
                    "{}\n{}\n{}",
                    Bundle::render_structure("B", f.source()),
                    Bundle::render_structure("C", f.target()),
                    f.serialize("B", "C")
                ),
                "colour_index": colour_index,
                "family": families[colour_index].to_string(),
                "k0": sys.colour_pair.0.to_string(),
                "k1": sys.colour_pair.1.to_string(),
                "r": sys.r.to_string(),
                "s": sys.s.to_string(),
                "epsilon": sys.epsilon.to_string(),
                "oscillation_bound": (sys.epsilon * 2).to_string(),
                "copies": sys.ambient.size() / f.target().size(),
                "witness": text,
                "verification": verdict,
                "independence": independence,
            }))?;
            let mut run = Run::new(report);
            run.artifacts.push(("tame-witness.txt".into(), text));
            Ok(run)
        }
        Err(Error::InsufficientCopies { achieved, required }) => {
            report.push(json!({ "achieved": achieved, "required": required }))?;
            Ok(Run::new(report).negative("insufficient-copies"))
        }
        Err(e) => Err(e),
    }
}

fn witness_bundle(pattern: &FinStructure, ambient: &FinStructure, witness: &str) -> String {
    format!("{}\n{}\n{}\n", Bundle::render_structure("A", pattern), Bundle::render_structure("U", ambient), witness)
}

pub fn eppa_bundle(w: &EppaWitness) -> String {
    format!(
        "{}\n{}\n{}\n",
        Bundle::render_structure("A", w.inclusion.source()),
        Bundle::render_structure("B", w.inclusion.target()),
        w.inclusion.serialize("A", "B")
    )
}

pub fn run_eppa(a: &FinStructure, spec: &ClassSpec, max_size: usize, seed: u64) -> Result<Run> {
    let mut report = Report::new("eppa", seed);
    report.param("class", &spec.name).param("max_size", max_size).param("structure", a.to_string());
    match search_eppa_witness(a, spec, max_size)? {
        EppaSearch::Found(w) => {
            let text = eppa_bundle(&w);
            report.outcome = "found".into();
            report.push(json!({
                "witness": text,
                "proof": w.proof_log("B"),
            }))?;
            let mut run = Run::new(report);
            run.artifacts.push(("eppa-witness.txt".into(), text));
            Ok(run)
        }
        EppaSearch::Exhausted { candidates } => {
            report.push(json!({ "candidates": candidates }))?;
            Ok(Run::new(report).negative("exhausted"))
        }
    }
}
