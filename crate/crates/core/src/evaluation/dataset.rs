//! Case files: JSON Lines with one `{case_id, domain, context, ground_truth}`
//! object per line, plus an importer for PrivaCI-Bench style exports.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

use crate::engine::CaseRecord;
use crate::label::{Domain, Label};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("case {case_id}: unknown label {label:?}")]
    UnknownLabel { case_id: String, label: String },
    #[error("case {case_id}: missing ground truth")]
    MissingLabel { case_id: String },
    #[error("case {case_id}: empty context")]
    EmptyContext { case_id: String },
    #[error("case {case_id}: unknown domain {domain:?}")]
    UnknownDomain { case_id: String, domain: String },
    #[error("duplicate case_id {0}")]
    DuplicateCase(String),
    #[error("{0} contains no cases")]
    Empty(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    /// `gdpr`, `aiact` or `mixed`.
    pub domain: String,
    pub cases: Vec<CaseRecord>,
    pub label_counts: BTreeMap<Label, usize>,
}

impl Dataset {
    pub fn new(domain: impl Into<String>, cases: Vec<CaseRecord>) -> Self {
        let mut label_counts: BTreeMap<Label, usize> = Label::ALL.iter().map(|&l| (l, 0)).collect();
        for c in &cases {
            if let Some(l) = c.ground_truth {
                *label_counts.entry(l).or_default() += 1;
            }
        }
        Self { domain: domain.into(), cases, label_counts }
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// Counts in Permitted / Prohibited / NotApplicable order.
    pub fn split(&self) -> [usize; 3] {
        Label::ALL.map(|l| self.label_counts.get(&l).copied().unwrap_or(0))
    }

    pub fn get(&self, case_id: &str) -> Option<&CaseRecord> {
        self.cases.iter().find(|c| c.case_id == case_id)
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for c in &self.cases {
            serde_json::to_writer(&mut f, c)?;
            f.write_all(b"\n")?;
        }
        f.flush()
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, names: &[&str]) -> Option<&'a Value> {
    names.iter().find_map(|n| obj.iter().find(|(k, _)| k.eq_ignore_ascii_case(n)).map(|(_, v)| v))
}

fn as_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

const ID_KEYS: &[&str] = &["case_id", "id", "idx", "index", "uid"];
const CONTEXT_KEYS: &[&str] = &["context", "event", "case", "story", "text", "description", "content"];
const LABEL_KEYS: &[&str] = &["ground_truth", "label", "norm_type", "answer", "compliance", "result", "gold"];
const DOMAIN_KEYS: &[&str] = &["domain", "regulation", "law"];

fn record_from_value(
    v: &Value,
    fallback_id: String,
    default_domain: Option<Domain>,
    path: &str,
    line: usize,
) -> Result<CaseRecord, DatasetError> {
    let malformed = |message: String| DatasetError::Malformed { path: path.to_string(), line, message };
    let obj = v.as_object().ok_or_else(|| malformed("expected a JSON object".into()))?;
    let case_id = field(obj, ID_KEYS).and_then(as_text).unwrap_or(fallback_id);
    let context = field(obj, CONTEXT_KEYS)
        .and_then(as_text)
        .ok_or_else(|| malformed(format!("case {case_id}: no context field")))?;
    if context.trim().is_empty() {
        return Err(DatasetError::EmptyContext { case_id });
    }
    let domain = match field(obj, DOMAIN_KEYS).and_then(as_text) {
        Some(d) => d
            .parse::<Domain>()
            .map_err(|_| DatasetError::UnknownDomain { case_id: case_id.clone(), domain: d })?,
        None => default_domain.ok_or_else(|| malformed(format!("case {case_id}: no domain field")))?,
    };
    let raw_label = field(obj, LABEL_KEYS)
        .and_then(as_text)
        .ok_or_else(|| DatasetError::MissingLabel { case_id: case_id.clone() })?;
    let label = raw_label
        .parse::<Label>()
        .map_err(|_| DatasetError::UnknownLabel { case_id: case_id.clone(), label: raw_label.clone() })?;
    Ok(CaseRecord { case_id, domain: domain.as_str().to_string(), context, ground_truth: Some(label) })
}

fn read(path: &Path) -> Result<String, DatasetError> {
    std::fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.display().to_string(), source })
}

fn finish(path: &Path, domain: Option<Domain>, cases: Vec<CaseRecord>) -> Result<Dataset, DatasetError> {
    let mut seen = HashSet::new();
    for c in &cases {
        if !seen.insert(c.case_id.as_str()) {
            return Err(DatasetError::DuplicateCase(c.case_id.clone()));
        }
    }
    let cases: Vec<CaseRecord> = match domain {
        Some(d) => cases.into_iter().filter(|c| c.domain == d.as_str()).collect(),
        None => cases,
    };
    if cases.is_empty() {
        return Err(DatasetError::Empty(path.display().to_string()));
    }
    Ok(Dataset::new(domain.map_or("mixed", Domain::as_str), cases))
}

/// Loads a JSONL case file. With a domain, only that domain's cases are kept.
pub fn load_dataset(path: impl AsRef<Path>, domain: Option<Domain>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let text = read(path)?;
    let p = path.display().to_string();
    let mut cases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line)
            .map_err(|e| DatasetError::Malformed { path: p.clone(), line: i + 1, message: e.to_string() })?;
        cases.push(record_from_value(&v, format!("line-{}", i + 1), None, &p, i + 1)?);
    }
    finish(path, domain, cases)
}

/// Imports a PrivaCI-Bench style export: a JSON array, an object holding a
/// list of cases, or JSON Lines. Field names are matched loosely and cases
/// without an id are numbered in file order.
pub fn import_privaci(path: impl AsRef<Path>, domain: Domain) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let text = read(path)?;
    let p = path.display().to_string();
    let prefix = domain.as_str();
    let records: Vec<Value> = match serde_json::from_str::<Value>(&text) {
        Ok(Value::Array(items)) => items,
        Ok(Value::Object(obj)) => match obj.values().find_map(|v| v.as_array()) {
            Some(items) => items.clone(),
            None => vec![Value::Object(obj)],
        },
        _ => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| DatasetError::Malformed { path: p.clone(), line: i + 1, message: e.to_string() })
            })
            .collect::<Result<_, _>>()?,
    };
    let cases = records
        .iter()
        .enumerate()
        .map(|(i, v)| record_from_value(v, format!("{prefix}-{:04}", i + 1), Some(domain), &p, i + 1))
        .collect::<Result<Vec<_>, _>>()?;
    finish(path, Some(domain), cases)
}

/// Finds the GDPR and AI Act test exports in a directory by file name.
pub fn discover_privaci_exports(dir: impl AsRef<Path>) -> (Option<PathBuf>, Option<PathBuf>) {
    let mut gdpr = None;
    let mut aiact = None;
    let Ok(entries) = std::fs::read_dir(dir) else { return (None, None) };
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for path in paths {
        let name = path.file_name().map(|n| n.to_string_lossy().to_ascii_lowercase()).unwrap_or_default();
        let compact: String = name.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        let is_data = name.ends_with(".json") || name.ends_with(".jsonl");
        if !is_data || compact.contains("train") {
            continue;
        }
        if compact.contains("gdpr") && gdpr.is_none() {
            gdpr = Some(path);
        } else if compact.contains("aiact") && aiact.is_none() {
            aiact = Some(path);
        }
    }
    (gdpr, aiact)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_with_aliases() {
        let f = write(concat!(
            "{\"case_id\":\"a\",\"domain\":\"gdpr\",\"context\":\"x\",\"ground_truth\":\"Permit\"}\n",
            "\n",
            "{\"case_id\":\"b\",\"domain\":\"EU AI Act\",\"context\":\"y\",\"ground_truth\":\"not applicable\"}\n",
        ));
        let d = load_dataset(f.path(), None).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.split(), [1, 0, 1]);
        assert_eq!(d.domain, "mixed");
        let g = load_dataset(f.path(), Some(Domain::Gdpr)).unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn errors_name_the_case() {
        let f = write("{\"case_id\":\"c7\",\"domain\":\"gdpr\",\"context\":\"x\",\"ground_truth\":\"maybe\"}\n");
        let err = load_dataset(f.path(), None).unwrap_err();
        assert!(matches!(&err, DatasetError::UnknownLabel { case_id, .. } if case_id == "c7"));
        assert!(err.to_string().contains("c7"));
        let f = write("");
        assert!(matches!(load_dataset(f.path(), None), Err(DatasetError::Empty(_))));
        let f = write(concat!(
            "{\"case_id\":\"a\",\"domain\":\"gdpr\",\"context\":\"x\",\"ground_truth\":\"permitted\"}\n",
            "{\"case_id\":\"a\",\"domain\":\"gdpr\",\"context\":\"y\",\"ground_truth\":\"permitted\"}\n",
        ));
        assert!(matches!(load_dataset(f.path(), None), Err(DatasetError::DuplicateCase(_))));
    }

    #[test]
    fn imports_array_export() {
        let f = write(r#"[{"event":"e1","norm_type":"prohibited"},{"event":"e2","norm_type":"permitted"}]"#);
        let d = import_privaci(f.path(), Domain::AiAct).unwrap();
        assert_eq!(d.cases[0].case_id, "aiact-0001");
        assert_eq!(d.split(), [1, 1, 0]);
    }
}
