use std::path::Path;
use std::process::{Command, Output};

use fraisse_core::config::Bundle;
use fraisse_core::NonNullWitness;
use serde_json::Value;

fn fraisse(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraisse")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

const ORIENT: &str =
    "[null-witness]\nclass = graphs\npattern = K2\ncopy = K2\nfamilies = orientation\nepsilon = 1/4\nn = 3\n";

#[test]
fn null_witness_run_writes_verified_witness() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("orient.cfg"), ORIENT).unwrap();
    let out = fraisse(dir.path(), &["null-witness", "orient.cfg", "--out", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/null-witness.json")).unwrap()).unwrap();
    let item = &report["items"][0];
    assert_eq!(report["outcome"], "witness");
    assert_eq!(item["verification"]["passed"], true);
    assert_eq!(item["independence"]["result"]["holds"], true);
    assert_eq!(item["k0"], "0");
    assert_eq!(item["k1"], "1");

    let text = std::fs::read_to_string(dir.path().join("run/null-witness.txt")).unwrap();
    assert_eq!(item["witness"], text.as_str());
    let bundle = Bundle::parse(&text).unwrap();
    let body: Vec<&str> = bundle.lines.iter().map(|(_, l)| l.as_str()).collect();
    let w = NonNullWitness::parse(&body.join("\n"), |n| bundle.get(n)).unwrap();
    assert_eq!(w.system().g.len(), 3);
    assert_eq!(w.system().x.len(), 8);
}

#[test]
fn linear_orders_fail_free_jep_with_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraisse(dir.path(), &["check-class", "linear-orders", "--max-size", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let item = &json(&out)["items"][0];
    assert_eq!(item["free_jep"]["holds"], false);
    let ce = &item["free_jep"]["counterexample"];
    let structures = ce["structures"].as_array().unwrap();
    for pair in structures {
        let text = pair[1].as_str().unwrap();
        text.parse::<fraisse_core::FinStructure>().unwrap();
    }
    assert_eq!(item["hp"]["holds"], true);
    assert_eq!(item["ap"]["holds"], true);
}

#[test]
fn graphs_pass_all_properties() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraisse(dir.path(), &["check-class", "graphs", "--max-size", "4"]);
    let item = &json(&out)["items"][0];
    for key in ["hp", "jep", "ap", "free_jep", "free_ap"] {
        assert_eq!(item[key]["holds"], true, "{key}");
    }
}

#[test]
fn exhausted_outcomes_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraisse(dir.path(), &["eppa", "P3", "--class", "graphs", "--max-size", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["outcome"], "exhausted");

    let out = fraisse(dir.path(), &["approximant", "graphs", "--rank", "3", "--budget", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["outcome"], "budget-exceeded");

    std::fs::write(
        dir.path().join("r.cfg"),
        "[ramsey]\npattern = vertex\ncopy = K2\nambient = K3\nfamilies = parity\nepsilon = 0\n",
    )
    .unwrap();
    let out = fraisse(dir.path(), &["ramsey", "r.cfg"]);
    assert_eq!(out.status.code(), Some(0), "K3 has two even vertices");
    std::fs::write(
        dir.path().join("r.cfg"),
        "[ramsey]\npattern = vertex\ncopy = K3\nambient = K3\nfamilies = parity\nepsilon = 0\n",
    )
    .unwrap();
    let out = fraisse(dir.path(), &["ramsey", "r.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["items"].as_array().unwrap().len(), 6);
    assert_eq!(report["items"][0]["worst_oscillation"], "1");
}

#[test]
fn malformed_input_exits_with_one_and_line_number() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "[null-witness]\nclass = graphs\nepsilon = one quarter\n").unwrap();
    let out = fraisse(dir.path(), &["null-witness", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");

    std::fs::write(dir.path().join("bad.cls"), "class odd\nsignature E/2:ir+sym\nforbid\ncarrier 2\nE: (0,5)\n")
        .unwrap();
    let out = fraisse(dir.path(), &["check-class", "bad.cls", "--max-size", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
}

#[test]
fn tame_witness_from_eppa_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraisse(dir.path(), &["eppa", "K2", "--class", "graphs", "--max-size", "3", "--out", "e"]);
    assert_eq!(out.status.code(), Some(0));
    let witness = std::fs::read_to_string(dir.path().join("e/eppa-witness.txt")).unwrap();
    // The search returns the least candidate, K2 itself.
    assert!(witness.contains("embed A->B: 0->0 1->1"));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("e/eppa.json")).unwrap()).unwrap();
    assert_eq!(report["items"][0]["proof"].as_array().unwrap().len(), 7);

    std::fs::write(
        dir.path().join("t.cfg"),
        "[tame-witness]\nclass = graphs\npattern = K2\nfamilies = orientation\nepsilon = 1/4\nm = 2\n",
    )
    .unwrap();
    let out = fraisse(dir.path(), &["tame-witness", "t.cfg", "--eppa", "e/eppa-witness.txt"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let item = &json(&out)["items"][0];
    assert_eq!(item["verification"]["passed"], true);

    let out = fraisse(dir.path(), &["tame-witness", "t.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_format_has_one_row_per_item() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("r.cfg"),
        "[ramsey]\npattern = vertex\ncopy = K3\nambient = K3\nfamilies = parity\nepsilon = 0\n",
    )
    .unwrap();
    let out = fraisse(dir.path(), &["--format", "csv", "ramsey", "r.cfg"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap().iter().collect::<Vec<_>>(), ["command", "outcome", "copy", "worst_oscillation"]);
    assert_eq!(rows.records().count(), 6);
}

#[test]
fn seed_flag_only_affects_bare_seeded_random() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[null-witness]\nclass = graphs\npattern = vertex\ncopy = K3\nfamilies = seeded-random(5, 3)\nepsilon = 0\nn = 1\n";
    std::fs::write(dir.path().join("s.cfg"), cfg).unwrap();
    let a = fraisse(dir.path(), &["--seed", "1", "null-witness", "s.cfg"]);
    let b = fraisse(dir.path(), &["--seed", "2", "null-witness", "s.cfg"]);
    assert_eq!(json(&a)["items"], json(&b)["items"]);
}
