use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde_json::Value as Json;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    HaarCheck,
    PairAudit,
    Bound,
    SteinCheck,
    W1Compare,
    DiagExample,
}

impl Experiment {
    pub const ALL: [Experiment; 6] =
        [Self::HaarCheck, Self::PairAudit, Self::Bound, Self::SteinCheck, Self::W1Compare, Self::DiagExample];

    pub fn name(self) -> &'static str {
        match self {
            Self::HaarCheck => "haar-check",
            Self::PairAudit => "pair-audit",
            Self::Bound => "bound",
            Self::SteinCheck => "stein-check",
            Self::W1Compare => "w1-compare",
            Self::DiagExample => "diag-example",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|e| e.name()).collect();
            Error::Config(format!("unknown experiment {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Value type of a configuration key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Count,
    Real,
    Seed,
    Text,
    Flag,
    /// Comma-separated counts.
    Counts,
    /// Rows separated by `;`, entries by `,`.
    Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Count(usize),
    Real(f64),
    Seed(u64),
    Text(String),
    Flag(bool),
    Counts(Vec<usize>),
    Matrix(Vec<Vec<f64>>),
}

impl Value {
    pub fn to_json(&self) -> Json {
        match self {
            Self::Count(v) => Json::from(*v),
            Self::Real(v) => Json::from(*v),
            Self::Seed(v) => Json::from(*v),
            Self::Text(v) => Json::from(v.clone()),
            Self::Flag(v) => Json::from(*v),
            Self::Counts(v) => Json::from(v.clone()),
            Self::Matrix(v) => Json::from(v.clone()),
        }
    }
}

fn parse_count(raw: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = raw.parse::<usize>() {
        return Ok(v);
    }
    // allow 1e5-style counts when they are exact integers
    match raw.parse::<f64>() {
        Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 9.0e15 => Ok(f as usize),
        _ => Err(format!("expected a non-negative integer, found {raw:?}")),
    }
}

fn parse_real(raw: &str) -> std::result::Result<f64, String> {
    raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("expected a finite number, found {raw:?}"))
}

impl Kind {
    fn parse(self, raw: &str) -> std::result::Result<Value, String> {
        let raw = raw.trim();
        Ok(match self {
            Self::Count => Value::Count(parse_count(raw)?),
            Self::Real => Value::Real(parse_real(raw)?),
            Self::Seed => Value::Seed(raw.parse().map_err(|_| format!("expected a 64-bit unsigned seed, found {raw:?}"))?),
            Self::Text => {
                if raw.is_empty() {
                    return Err("expected a non-empty value".into());
                }
                Value::Text(raw.to_string())
            }
            Self::Flag => Value::Flag(match raw {
                "true" | "yes" | "1" => true,
                "false" | "no" | "0" => false,
                _ => return Err(format!("expected true or false, found {raw:?}")),
            }),
            Self::Counts => Value::Counts(raw.split(',').map(|s| parse_count(s.trim())).collect::<std::result::Result<_, _>>()?),
            Self::Matrix => {
                let rows: Vec<Vec<f64>> = raw
                    .split(';')
                    .map(|r| r.split(',').map(|s| parse_real(s.trim())).collect::<std::result::Result<Vec<_>, _>>())
                    .collect::<std::result::Result<_, _>>()?;
                if rows.iter().any(|r| r.len() != rows.len()) {
                    return Err(format!("expected a square matrix, found {raw:?}"));
                }
                Value::Matrix(rows)
            }
        })
    }
}

/// A recognized key: its type, default, and whether it must be given.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub required: bool,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>) -> KeySpec {
    KeySpec { name, kind, default, required: false }
}

const fn required(name: &'static str, kind: Kind) -> KeySpec {
    KeySpec { name, kind, default: None, required: true }
}

pub const DEFAULT_SEED: u64 = 20240101;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_EPSILON: f64 = 1e-3;

const COMMON: &[KeySpec] = &[
    required("experiment", Kind::Text),
    key("seed", Kind::Seed, Some("20240101")),
    key("timing", Kind::Flag, Some("false")),
    key("out", Kind::Text, None),
];

const HAAR: &[KeySpec] = &[key("samples", Kind::Count, Some("100000")), key("ns", Kind::Counts, Some("4,6,9"))];

const AUDIT: &[KeySpec] = &[
    required("model", Kind::Text),
    required("n", Kind::Count),
    key("k", Kind::Count, Some("2")),
    key("epsilon", Kind::Real, Some("0.001")),
    key("samples", Kind::Count, Some("100000")),
    key("inner", Kind::Count, Some("8")),
    key("law", Kind::Text, None),
    key("family", Kind::Text, Some("random")),
    key("a", Kind::Counts, None),
];

const BOUND: &[KeySpec] = &[
    required("theorem", Kind::Text),
    key("k", Kind::Count, None),
    key("n", Kind::Count, None),
    key("sigma", Kind::Real, Some("1")),
    key("m1", Kind::Real, Some("1")),
    key("m2", Kind::Real, Some("1")),
    key("lambda", Kind::Real, None),
    key("e_norm", Kind::Real, None),
    key("third_moment", Kind::Real, None),
    key("fourth_moment", Kind::Real, None),
    key("f_norm", Kind::Real, None),
    key("gamma_norm", Kind::Real, None),
    key("lambda_norm", Kind::Real, None),
    key("a", Kind::Real, None),
    key("c", Kind::Matrix, None),
    key("law", Kind::Text, None),
];

const STEIN: &[KeySpec] = &[
    key("g", Kind::Text, Some("battery")),
    key("k", Kind::Count, Some("2")),
    key("nodes", Kind::Count, Some("64")),
    key("samples", Kind::Count, Some("100000")),
    key("points", Kind::Count, Some("20")),
    key("tolerance", Kind::Real, Some("0.02")),
    key("kink", Kind::Flag, Some("false")),
    key("m1", Kind::Real, None),
    key("m2", Kind::Real, None),
];

const W1: &[KeySpec] = &[
    key("model", Kind::Text, Some("orthogonal_projection")),
    required("n", Kind::Count),
    key("k", Kind::Count, Some("2")),
    key("m", Kind::Counts, Some("2000")),
    key("reps", Kind::Count, Some("8")),
    key("directions", Kind::Count, Some("128")),
    key("law", Kind::Text, None),
    key("family", Kind::Text, Some("random")),
    key("a", Kind::Counts, None),
];

const DIAG: &[KeySpec] = &[
    key("n", Kind::Count, Some("10")),
    key("a", Kind::Counts, Some("2,5,10")),
    key("m", Kind::Counts, Some("500")),
    key("reps", Kind::Count, Some("4")),
    key("directions", Kind::Count, Some("64")),
];

/// Keys accepted by `experiment` besides the common ones.
pub fn keys_for(experiment: Experiment) -> &'static [KeySpec] {
    match experiment {
        Experiment::HaarCheck => HAAR,
        Experiment::PairAudit => AUDIT,
        Experiment::Bound => BOUND,
        Experiment::SteinCheck => STEIN,
        Experiment::W1Compare => W1,
        Experiment::DiagExample => DIAG,
    }
}

fn spec_of(experiment: Experiment, name: &str) -> Option<KeySpec> {
    COMMON.iter().chain(keys_for(experiment)).find(|k| k.name == name).copied()
}

/// A typed, default-filled experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    values: BTreeMap<String, Value>,
    explicit: BTreeSet<String>,
}

/// Parses a flat `key = value` document (`#` starts a comment).
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_for(text, None)
}

/// As [`parse_config`], with an experiment supplied by the caller when the
/// document does not name one. A conflicting `experiment` line is an error.
pub fn parse_config_for(text: &str, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse { line: line_no, message: format!("expected key = value, found {line:?}") });
        };
        let k = k.trim().to_string();
        if entries.iter().any(|(_, seen, _)| *seen == k) {
            return Err(Error::Parse { line: line_no, message: format!("duplicate key {k:?}") });
        }
        entries.push((line_no, k, v.trim().to_string()));
    }

    let named = match entries.iter().find(|(_, k, _)| k == "experiment") {
        Some((line, _, v)) => {
            Some(v.parse::<Experiment>().map_err(|e| Error::Parse { line: *line, message: e.to_string() })?)
        }
        None => None,
    };
    let experiment = match (named, experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Config(format!("configuration names experiment {a} but {b} was requested")))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            // values whose type no experiment accepts are reported first
            for (line, k, v) in &entries {
                let kinds: Vec<Kind> = Experiment::ALL.iter().filter_map(|&e| spec_of(e, k)).map(|s| s.kind).collect();
                if let Some(Err(m)) = kinds.iter().map(|kind| kind.parse(v)).reduce(|a, b| a.or(b)) {
                    return Err(Error::Parse { line: *line, message: format!("{k}: {m}") });
                }
            }
            return Err(Error::MissingKeys(vec!["experiment".into()]));
        }
    };

    let mut cfg = ExperimentConfig { experiment, values: BTreeMap::new(), explicit: BTreeSet::new() };
    cfg.values.insert("experiment".into(), Value::Text(experiment.name().into()));
    for (line, k, v) in &entries {
        if k == "experiment" {
            continue;
        }
        cfg.set_at(k, v, Some(*line))?;
    }
    cfg.finish()
}

impl ExperimentConfig {
    /// Overrides or adds one key after parsing.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        self.set_at(key, raw, None)
    }

    fn set_at(&mut self, key: &str, raw: &str, line: Option<usize>) -> Result<()> {
        let fail = |message: String| match line {
            Some(line) => Error::Parse { line, message },
            None => Error::Config(message),
        };
        if key == "experiment" {
            return if raw.trim() == self.experiment.name() {
                Ok(())
            } else {
                Err(fail(format!("experiment is fixed to {}", self.experiment)))
            };
        }
        let spec = spec_of(self.experiment, key)
            .ok_or_else(|| fail(format!("unknown key {key:?} for experiment {}", self.experiment)))?;
        let value = spec.kind.parse(raw).map_err(|m| fail(format!("{key}: {m}")))?;
        self.values.insert(key.to_string(), value);
        self.explicit.insert(key.to_string());
        Ok(())
    }

    /// Fills defaults and reports every missing required key at once.
    pub fn finish(mut self) -> Result<Self> {
        let mut missing = Vec::new();
        for spec in COMMON.iter().chain(keys_for(self.experiment)) {
            if self.values.contains_key(spec.name) {
                continue;
            }
            if let Some(d) = spec.default {
                let v = spec.kind.parse(d).expect("defaults parse");
                self.values.insert(spec.name.to_string(), v);
            } else if spec.required {
                missing.push(spec.name.to_string());
            }
        }
        if missing.is_empty() {
            Ok(self)
        } else {
            Err(Error::MissingKeys(missing))
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    fn need(&self, key: &str) -> Result<&Value> {
        self.values.get(key).ok_or_else(|| Error::MissingKeys(vec![key.to_string()]))
    }

    pub fn count(&self, key: &str) -> Result<usize> {
        match self.need(key)? {
            Value::Count(v) => Ok(*v),
            other => Err(Error::Config(format!("{key} is not a count: {other:?}"))),
        }
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        match self.need(key)? {
            Value::Real(v) => Ok(*v),
            Value::Count(v) => Ok(*v as f64),
            other => Err(Error::Config(format!("{key} is not a number: {other:?}"))),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        match self.need(key)? {
            Value::Text(v) => Ok(v),
            other => Err(Error::Config(format!("{key} is not text: {other:?}"))),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.need(key)? {
            Value::Flag(v) => Ok(*v),
            other => Err(Error::Config(format!("{key} is not a flag: {other:?}"))),
        }
    }

    pub fn counts(&self, key: &str) -> Result<&[usize]> {
        match self.need(key)? {
            Value::Counts(v) => Ok(v),
            other => Err(Error::Config(format!("{key} is not a list of counts: {other:?}"))),
        }
    }

    pub fn matrix(&self, key: &str) -> Result<&[Vec<f64>]> {
        match self.need(key)? {
            Value::Matrix(v) => Ok(v),
            other => Err(Error::Config(format!("{key} is not a matrix: {other:?}"))),
        }
    }

    pub fn seed(&self) -> u64 {
        match self.values.get("seed") {
            Some(Value::Seed(s)) => *s,
            _ => DEFAULT_SEED,
        }
    }

    /// The resolved configuration as it is embedded in reports; the output
    /// path is left out since it does not affect results.
    pub fn resolved(&self) -> BTreeMap<String, Json> {
        self.values.iter().filter(|(k, _)| k.as_str() != "out").map(|(k, v)| (k.clone(), v.to_json())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_example_parses() {
        let c = parse_config("experiment=bound\ntheorem=uthm\nk=2\nn=20").unwrap();
        assert_eq!(c.experiment, Experiment::Bound);
        assert_eq!(c.count("k").unwrap(), 2);
        assert_eq!(c.seed(), DEFAULT_SEED);
        assert_eq!(c.real("m1").unwrap(), 1.0);
    }

    #[test]
    fn mistyped_value_without_experiment() {
        assert!(matches!(parse_config("# just n\nn=abc"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("n=7"), Err(Error::MissingKeys(_))));
    }

    #[test]
    fn empty_text_lists_required_keys() {
        match parse_config("") {
            Err(Error::MissingKeys(k)) => assert_eq!(k, vec!["experiment".to_string()]),
            other => panic!("{other:?}"),
        }
        match parse_config("experiment = pair-audit\n") {
            Err(Error::MissingKeys(k)) => assert_eq!(k, vec!["model".to_string(), "n".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_mismatch_names_line() {
        let err = parse_config("experiment=pair-audit\nmodel=iid_sum\n# note\nn=abc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        assert!(matches!(parse_config("experiment=bound\ntheorem=mix\ncolour=red"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_config("experiment=bound\ntheorem=mix\ntheorem=uthm"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_config("experiment=bound\nnodes=64\ntheorem=mix"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("experiment=nope"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("just words"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn defaults_and_types() {
        let c = parse_config("experiment = pair-audit # audit\nmodel = spherical\nn = 40\nsamples = 1e4").unwrap();
        assert_eq!(c.count("samples").unwrap(), 10_000);
        assert_eq!(c.real("epsilon").unwrap(), DEFAULT_EPSILON);
        assert!(c.is_explicit("n") && !c.is_explicit("epsilon"));
        let h = parse_config("experiment=haar-check").unwrap();
        assert_eq!(h.counts("ns").unwrap(), &[4, 6, 9]);
        assert_eq!(h.count("samples").unwrap(), DEFAULT_SAMPLES);
        let m = parse_config("experiment=bound\ntheorem=mix\nc=1,0.5;0.5,1").unwrap();
        assert_eq!(m.matrix("c").unwrap(), &[vec![1.0, 0.5], vec![0.5, 1.0]]);
        assert!(parse_config("experiment=bound\ntheorem=mix\nc=1,0.5;0.5").is_err());
    }

    #[test]
    fn caller_supplied_experiment() {
        let c = parse_config_for("g = sine\nk = 1", Some(Experiment::SteinCheck)).unwrap();
        assert_eq!(c.text("g").unwrap(), "sine");
        assert!(parse_config_for("experiment=bound\ntheorem=mix", Some(Experiment::HaarCheck)).is_err());
        let mut c = c;
        c.set("nodes", "32").unwrap();
        assert_eq!(c.count("nodes").unwrap(), 32);
        assert!(matches!(c.set("nodes", "x"), Err(Error::Config(_))));
    }

    #[test]
    fn resolved_config_is_complete() {
        let c = parse_config("experiment=stein-check\nout=/tmp/x.json").unwrap();
        let r = c.resolved();
        assert!(r.contains_key("seed") && r.contains_key("nodes") && !r.contains_key("out"));
        assert_eq!(r["experiment"], Json::from("stein-check"));
    }
}
