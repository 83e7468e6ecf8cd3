//! Run configuration files, structure and class references, and structure
//! bundles (named structures followed by embedding lines).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::class::{builtin_bit_graph, ClassSpec};
use crate::colouring::{parse_rational, ColouringFamily, Rational};
use crate::error::{Error, Result};
use crate::structure::{parse_structure_body, FinStructure, Signature};

/// `vertex`, `empty`, `K<n>`, `P<n>`, `chain:<n>`, `bit-graph:<m>`.
pub fn builtin_structure(name: &str) -> Option<Result<FinStructure>> {
    let number = |s: &str| s.parse::<usize>().ok();
    match name {
        "vertex" => return Some(FinStructure::graph(1, &[])),
        "empty" => return Some(FinStructure::graph(0, &[])),
        _ => {}
    }
    if let Some(m) = name.strip_prefix("bit-graph:") {
        return Some(match m.parse::<u32>() {
            Ok(m) => builtin_bit_graph(m),
            Err(_) => Err(Error::ParameterOutOfRange(format!("bad bit graph exponent {m:?}"))),
        });
    }
    if let Some(n) = name.strip_prefix("chain:").and_then(number) {
        return Some(Ok(FinStructure::chain(n)));
    }
    if let Some(n) = name.strip_prefix('K').and_then(number) {
        return Some(Ok(FinStructure::complete_graph(n)));
    }
    if let Some(n) = name.strip_prefix('P').and_then(number) {
        return Some(Ok(FinStructure::path_graph(n)));
    }
    None
}

/// A builtin structure name, or a path (relative to `base`) to a structure
/// file.
pub fn resolve_structure(reference: &str, base: &Path) -> Result<FinStructure> {
    if let Some(s) = builtin_structure(reference) {
        return s;
    }
    let text = fs::read_to_string(base.join(reference))?;
    text.parse()
}

/// `graphs`, `linear-orders`, `K<n>-free`, or a path to a class file.
pub fn resolve_class(reference: &str, base: &Path) -> Result<ClassSpec> {
    match reference {
        "graphs" => return Ok(ClassSpec::graphs()),
        "linear-orders" => return Ok(ClassSpec::linear_orders()),
        _ => {}
    }
    if let Some(n) = reference.strip_prefix('K').and_then(|r| r.strip_suffix("-free")) {
        if let Ok(n) = n.parse::<usize>() {
            return Ok(ClassSpec::k_free(n));
        }
    }
    let text = fs::read_to_string(base.join(reference))?;
    ClassSpec::parse(&text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Section {
    Ramsey,
    NullWitness,
    TameWitness,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Ramsey => "ramsey",
            Section::NullWitness => "null-witness",
            Section::TameWitness => "tame-witness",
        })
    }
}

/// One `[section]` of `key = value` lines; keys remember their line.
#[derive(Clone, Debug)]
pub struct Config {
    pub section: Section,
    values: BTreeMap<String, (usize, String)>,
    header_line: usize,
    base: PathBuf,
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut section = None;
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if section.is_some() {
                    return Err(Error::parse(n, "only one section per config file"));
                }
                let s = match name.trim() {
                    "ramsey" => Section::Ramsey,
                    "null-witness" => Section::NullWitness,
                    "tame-witness" => Section::TameWitness,
                    other => return Err(Error::parse(n, format!("unknown section [{other}]"))),
                };
                section = Some((s, n));
                continue;
            }
            if section.is_none() {
                return Err(Error::parse(n, "key before any section header"));
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::parse(n, "expected key = value"))?;
            let key = key.trim().to_string();
            if values.insert(key.clone(), (n, value.trim().to_string())).is_some() {
                return Err(Error::parse(n, format!("duplicate key {key}")));
            }
        }
        let (section, header_line) = section.ok_or_else(|| Error::parse(1, "missing section header"))?;
        Ok(Config { section, values, header_line, base: base.to_path_buf() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Config::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn values(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, (_, v))| (k.as_str(), v.as_str()))
    }

    fn raw(&self, key: &str) -> Result<(usize, &str)> {
        self.values
            .get(key)
            .map(|(n, v)| (*n, v.as_str()))
            .ok_or_else(|| Error::parse(self.header_line, format!("missing key {key}")))
    }

    fn at<T>(&self, key: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<T> {
        let (n, v) = self.raw(key)?;
        f(v).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(n, message),
            other => Error::parse(n, other.to_string()),
        })
    }

    pub fn structure(&self, key: &str) -> Result<Arc<FinStructure>> {
        self.at(key, |v| resolve_structure(v, &self.base).map(Arc::new))
    }

    pub fn class(&self, key: &str) -> Result<ClassSpec> {
        self.at(key, |v| resolve_class(v, &self.base))
    }

    pub fn rational(&self, key: &str) -> Result<Rational> {
        self.at(key, parse_rational)
    }

    pub fn integer(&self, key: &str) -> Result<usize> {
        self.at(key, |v| v.parse().map_err(|_| Error::parse(0, format!("bad integer {v:?}"))))
    }

    /// Comma-separated families; commas inside parentheses do not split.
    pub fn families(&self, key: &str, seed: u64) -> Result<Vec<ColouringFamily>> {
        self.at(key, |v| {
            let mut out = Vec::new();
            let mut depth = 0;
            let mut start = 0;
            for (i, c) in v.char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    ',' if depth == 0 => {
                        out.push(ColouringFamily::parse_with_seed(&v[start..i], seed)?);
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            out.push(ColouringFamily::parse_with_seed(&v[start..], seed)?);
            Ok(out)
        })
    }
}

/// Named structures (`structure NAME` ... `end`) plus the remaining lines.
#[derive(Clone, Debug, Default)]
pub struct Bundle {
    pub structures: BTreeMap<String, Arc<FinStructure>>,
    pub lines: Vec<(usize, String)>,
}

impl Bundle {
    pub fn parse(text: &str) -> Result<Self> {
        let mut bundle = Bundle::default();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        while let Some((n, line)) = lines.next() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(name) = line.strip_prefix("structure ") else {
                bundle.lines.push((n, line.to_string()));
                continue;
            };
            let name = name.trim().to_string();
            let (sn, sig_line) = lines.next().ok_or_else(|| Error::parse(n, "structure without signature"))?;
            let signature: Signature = sig_line.parse().map_err(|e: Error| Error::parse(sn, e.to_string()))?;
            let mut body = Vec::new();
            loop {
                let (bn, l) = lines.next().ok_or_else(|| Error::parse(n, format!("structure {name} lacks `end`")))?;
                if l == "end" {
                    break;
                }
                body.push((bn, l));
            }
            let s = parse_structure_body(Arc::new(signature), &body)?;
            if bundle.structures.insert(name.clone(), Arc::new(s)).is_some() {
                return Err(Error::parse(n, format!("structure {name} defined twice")));
            }
        }
        Ok(bundle)
    }

    pub fn get(&self, name: &str) -> Option<Arc<FinStructure>> {
        self.structures.get(name).cloned()
    }

    pub fn render_structure(name: &str, s: &FinStructure) -> String {
        format!("structure {name}\n{s}\nend")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_sections_and_keys() {
        let text = "# run\n[null-witness]\nclass = graphs\npattern = K2\ncopy = P3\n\
                    families = orientation, seeded-random(3, 4), seeded-random\nepsilon = 1/4\nn = 2\n";
        let cfg = Config::parse(text, Path::new(".")).unwrap();
        assert_eq!(cfg.section, Section::NullWitness);
        assert_eq!(cfg.structure("copy").unwrap().size(), 3);
        assert_eq!(cfg.rational("epsilon").unwrap(), Rational::new(1, 4));
        let fams = cfg.families("families", 9).unwrap();
        assert_eq!(fams[1], ColouringFamily::SeededRandom { seed: 3, palette: 4 });
        assert_eq!(fams[2], ColouringFamily::SeededRandom { seed: 9, palette: 3 });
        match cfg.integer("missing") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match cfg.rational("class") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bundle_round_trip() {
        let k2 = FinStructure::complete_graph(2);
        let text = format!("{}\nembed B->B: 0->1 1->0\n", Bundle::render_structure("B", &k2));
        let b = Bundle::parse(&text).unwrap();
        assert_eq!(*b.get("B").unwrap(), k2);
        assert_eq!(b.lines.len(), 1);
        assert!(Bundle::parse("structure X\nsignature E/2\ncarrier 1\n").is_err());
    }

    #[test]
    fn builtin_names() {
        assert_eq!(builtin_structure("K3").unwrap().unwrap(), FinStructure::complete_graph(3));
        assert_eq!(builtin_structure("bit-graph:2").unwrap().unwrap().size(), 4);
        assert!(builtin_structure("nonsense").is_none());
        assert_eq!(resolve_class("K3-free", Path::new(".")).unwrap(), ClassSpec::k_free(3));
    }
}
