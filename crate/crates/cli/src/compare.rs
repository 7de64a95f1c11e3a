//! Key-by-key comparison of a JSON report against a baseline.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} is not valid JSON: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("schema mismatch: missing {missing:?}, unexpected {unexpected:?}, retyped {retyped:?}")]
    SchemaMismatch { missing: Vec<String>, unexpected: Vec<String>, retyped: Vec<String> },
}

/// Relative tolerances by key. Lookup tries the exact key, then the key
/// with array indices removed (`flux[1]` -> `flux`), then `default`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub default: f64,
    pub per_key: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { default: 1e-9, per_key: BTreeMap::new() }
    }
}

impl Tolerances {
    pub fn for_key(&self, key: &str) -> f64 {
        if let Some(t) = self.per_key.get(key) {
            return *t;
        }
        let mut stripped = String::with_capacity(key.len());
        let mut depth = 0;
        for c in key.chars() {
            match c {
                '[' => depth += 1,
                ']' => depth -= 1,
                _ if depth == 0 => stripped.push(c),
                _ => {}
            }
        }
        self.per_key.get(&stripped).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: String,
    pub candidate: Value,
    pub baseline: Value,
    /// Relative difference for numbers; infinite for other mismatches.
    pub relative: f64,
    pub tolerance: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} vs baseline {} (relative {:e} > {:e})",
            self.key, self.candidate, self.baseline, self.relative, self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub compared: usize,
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Leaves of a JSON document keyed `a.b[2].c`.
pub fn flatten(v: &Value) -> BTreeMap<String, Value> {
    fn walk(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            leaf => {
                out.insert(prefix.to_string(), leaf.clone());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk("", v, &mut out);
    out
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "bool",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

pub fn compare_values(candidate: &Value, baseline: &Value, tol: &Tolerances) -> Result<Verdict, CompareError> {
    let c = flatten(candidate);
    let b = flatten(baseline);
    let missing: Vec<String> = b.keys().filter(|k| !c.contains_key(*k)).cloned().collect();
    let unexpected: Vec<String> = c.keys().filter(|k| !b.contains_key(*k)).cloned().collect();
    let retyped: Vec<String> = b.iter().filter(|(k, v)| c.get(*k).is_some_and(|x| kind(x) != kind(v))).map(|(k, _)| k.clone()).collect();
    if !(missing.is_empty() && unexpected.is_empty() && retyped.is_empty()) {
        return Err(CompareError::SchemaMismatch { missing, unexpected, retyped });
    }
    let mut violations = Vec::new();
    for (key, base) in &b {
        let cand = &c[key];
        let tolerance = tol.for_key(key);
        let relative = match (cand.as_f64(), base.as_f64()) {
            (Some(x), Some(y)) if x == y => 0.0,
            (Some(x), Some(y)) => (x - y).abs() / x.abs().max(y.abs()),
            _ if cand == base => 0.0,
            _ => f64::INFINITY,
        };
        if !(relative <= tolerance) {
            violations.push(Violation { key: key.clone(), candidate: cand.clone(), baseline: base.clone(), relative, tolerance });
        }
    }
    Ok(Verdict { compared: b.len(), violations })
}

fn read_json(path: &Path) -> Result<Value, CompareError> {
    let text = std::fs::read_to_string(path).map_err(|source| CompareError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CompareError::Parse { path: path.to_path_buf(), source })
}

pub fn compare_baseline(report: &Path, baseline: &Path, tol: &Tolerances) -> Result<Verdict, CompareError> {
    compare_values(&read_json(report)?, &read_json(baseline)?, tol)
}
