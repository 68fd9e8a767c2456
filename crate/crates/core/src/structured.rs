//! Extraction and validation of structured answers from raw model text.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::graph::AnswerMap;
use crate::label::Label;
use crate::prompting::{QuestionSchema, SchemaDescriptor};
use crate::regulation::{ChunkKind, ProvisionId};

pub const MAX_EXCERPT_CHARS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailureReason {
    NoJsonFound,
    SchemaMismatch,
    InvalidValue,
    InvalidOptionIndex,
}

impl ParseFailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseFailureReason::NoJsonFound => "no_json_found",
            ParseFailureReason::SchemaMismatch => "schema_mismatch",
            ParseFailureReason::InvalidValue => "invalid_value",
            ParseFailureReason::InvalidOptionIndex => "invalid_option_index",
        }
    }
}

impl fmt::Display for ParseFailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("{reason}: {detail}")]
pub struct ParseFailure {
    pub reason: ParseFailureReason,
    pub detail: String,
    /// At most [`MAX_EXCERPT_CHARS`] characters of the raw response.
    pub raw_excerpt: String,
}

impl ParseFailure {
    pub fn new(reason: ParseFailureReason, detail: impl Into<String>, raw: &str) -> Self {
        Self { reason, detail: detail.into(), raw_excerpt: excerpt(raw) }
    }
}

pub fn excerpt(raw: &str) -> String {
    raw.chars().take(MAX_EXCERPT_CHARS).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TriState {
    #[serde(rename = "yes")]
    Yes,
    #[serde(rename = "no")]
    No,
    #[serde(rename = "not sure")]
    NotSure,
}

impl TriState {
    pub const ALL: [TriState; 3] = [TriState::Yes, TriState::No, TriState::NotSure];

    /// Case-insensitive `yes`, `no`, `not sure` or `not_sure`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" => Some(TriState::Yes),
            "no" => Some(TriState::No),
            "not sure" | "not_sure" => Some(TriState::NotSure),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TriState::Yes => "yes",
            TriState::No => "no",
            TriState::NotSure => "not sure",
        }
    }
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedChunkAnswers {
    pub chunk: ChunkKind,
    pub sub_group: Option<String>,
    pub answers: BTreeMap<ProvisionId, TriState>,
}

impl ParsedChunkAnswers {
    /// The response shape the prompt asks for.
    pub fn to_canonical_json(&self) -> String {
        canonical_tri_state_json(&self.answers)
    }
}

pub fn canonical_tri_state_json(answers: &BTreeMap<ProvisionId, TriState>) -> String {
    let map: Map<String, Value> =
        answers.iter().map(|(k, v)| (k.to_string(), Value::String(v.as_str().into()))).collect();
    serde_json::to_string(&Value::Object(map)).expect("map serializes")
}

/// Stage-1 analysis of an EU AI Act case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisObject {
    pub ai_system_involved: bool,
    pub ai_system_name: Option<String>,
    /// The whole extracted object, embedded into the stage-2 prompt.
    pub raw: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
    C,
}

impl Choice {
    pub fn label(self) -> Label {
        match self {
            Choice::A => Label::Prohibited,
            Choice::B => Label::Permitted,
            Choice::C => Label::NotApplicable,
        }
    }

    fn from_letter(s: &str) -> Option<Self> {
        match s {
            "A" => Some(Choice::A),
            "B" => Some(Choice::B),
            "C" => Some(Choice::C),
            _ => None,
        }
    }
}

/// Rewrites bare `True`, `False` and `None` outside string literals to their
/// JSON spellings. Replacements keep byte length, so offsets stay comparable.
fn normalize_python_literals(raw: &str) -> String {
    let bytes = raw.as_bytes();
    let mut out = String::with_capacity(raw.len());
    let mut in_str = false;
    let mut i = 0;
    while i < raw.len() {
        let c = bytes[i];
        if in_str {
            if c == b'\\' {
                let next = raw[i + 1..].chars().next().map_or(0, char::len_utf8);
                out.push_str(&raw[i..i + 1 + next]);
                i += 1 + next;
                continue;
            }
            if c == b'"' {
                in_str = false;
            }
        } else if c == b'"' {
            in_str = true;
        } else if c.is_ascii_alphabetic() {
            let boundary_before = i == 0 || !(bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'_');
            if boundary_before {
                let replacement = [("True", "true"), ("False", "false"), ("None", "null")].into_iter().find(|(py, _)| {
                    let end = i + py.len();
                    raw[i..].starts_with(py)
                        && (end >= raw.len() || !(bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_'))
                });
                if let Some((py, js)) = replacement {
                    out.push_str(js);
                    i += py.len();
                    continue;
                }
            }
        }
        let ch = raw[i..].chars().next().expect("in bounds");
        out.push(ch);
        i += ch.len_utf8();
    }
    out
}

/// Every top-level JSON object in `text`, scanning left to right and
/// skipping past each object found. Returns (end offset, object).
fn scan_objects(text: &str) -> Vec<(usize, Value)> {
    let mut found = Vec::new();
    let mut i = 0;
    while let Some(rel) = text[i..].find('{') {
        let start = i + rel;
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(v @ Value::Object(_))) => {
                let end = start + stream.byte_offset();
                found.push((end, v));
                i = end;
            }
            _ => i = start + 1,
        }
    }
    found
}

/// The last syntactically valid top-level JSON object in `raw`.
///
/// Code fences and surrounding prose are tolerated. Python-style `True`,
/// `False` and `None` are accepted. When several objects appear, the one
/// ending last wins, because reasoning models emit drafts before the answer.
pub fn extract_json(raw: &str) -> Result<Value, ParseFailure> {
    let mut best = scan_objects(raw).pop();
    let normalized = normalize_python_literals(raw);
    if normalized != raw {
        if let Some((end, v)) = scan_objects(&normalized).pop() {
            if best.as_ref().is_none_or(|(b, _)| end > *b) {
                best = Some((end, v));
            }
        }
    }
    best.map(|(_, v)| v)
        .ok_or_else(|| ParseFailure::new(ParseFailureReason::NoJsonFound, "no JSON object in response", raw))
}

fn extract_object(raw: &str) -> Result<Map<String, Value>, ParseFailure> {
    match extract_json(raw)? {
        Value::Object(m) => Ok(m),
        _ => unreachable!("extract_json only yields objects"),
    }
}

/// Parses a tri-state map against a `TriStateMap` schema.
pub fn parse_tri_state_map(
    raw: &str,
    schema: &SchemaDescriptor,
) -> Result<BTreeMap<ProvisionId, TriState>, ParseFailure> {
    let SchemaDescriptor::TriStateMap(ids) = schema else {
        return Err(ParseFailure::new(ParseFailureReason::SchemaMismatch, "schema is not a tri-state map", raw));
    };
    let obj = extract_object(raw)?;
    let expected: HashSet<&ProvisionId> = ids.iter().collect();
    let mut keyed = Vec::with_capacity(obj.len());
    let mut seen = HashSet::new();
    for (key, value) in &obj {
        let id = ProvisionId::parse_lenient(key)
            .ok()
            .filter(|id| expected.contains(id))
            .ok_or_else(|| {
                ParseFailure::new(ParseFailureReason::SchemaMismatch, format!("unexpected key {key:?}"), raw)
            })?;
        if !seen.insert(id.clone()) {
            return Err(ParseFailure::new(
                ParseFailureReason::SchemaMismatch,
                format!("{id} answered more than once"),
                raw,
            ));
        }
        keyed.push((id, value));
    }
    if let Some(missing) = ids.iter().find(|id| !seen.contains(*id)) {
        return Err(ParseFailure::new(ParseFailureReason::SchemaMismatch, format!("missing {missing}"), raw));
    }
    let mut answers = BTreeMap::new();
    for (id, value) in keyed {
        let t = value.as_str().and_then(TriState::parse).ok_or_else(|| {
            ParseFailure::new(ParseFailureReason::InvalidValue, format!("{id}: {value} is not yes/no/not sure"), raw)
        })?;
        answers.insert(id, t);
    }
    Ok(answers)
}

pub fn parse_chunk_answers(
    raw: &str,
    chunk: ChunkKind,
    sub_group: Option<&str>,
    schema: &SchemaDescriptor,
) -> Result<ParsedChunkAnswers, ParseFailure> {
    Ok(ParsedChunkAnswers {
        chunk,
        sub_group: sub_group.map(str::to_string),
        answers: parse_tri_state_map(raw, schema)?,
    })
}

pub fn parse_analysis(raw: &str) -> Result<AnalysisObject, ParseFailure> {
    let obj = extract_object(raw)?;
    let find = |name: &str| obj.iter().find(|(k, _)| k.trim().eq_ignore_ascii_case(name)).map(|(_, v)| v);
    let involved = find("AI_system_involved").ok_or_else(|| {
        ParseFailure::new(ParseFailureReason::SchemaMismatch, "missing AI_system_involved", raw)
    })?;
    let ai_system_involved = match involved {
        Value::Bool(b) => *b,
        Value::String(s) => match s.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" => true,
            "false" | "no" => false,
            _ => {
                return Err(ParseFailure::new(
                    ParseFailureReason::InvalidValue,
                    format!("AI_system_involved: {s:?}"),
                    raw,
                ))
            }
        },
        other => {
            return Err(ParseFailure::new(
                ParseFailureReason::InvalidValue,
                format!("AI_system_involved: {other}"),
                raw,
            ))
        }
    };
    let ai_system_name = match find("AI_system_name") {
        Some(Value::String(s)) => Some(s.clone()),
        _ => None,
    };
    Ok(AnalysisObject { ai_system_involved, ai_system_name, raw: Value::Object(obj) })
}

fn question_key(key: &str) -> String {
    key.replace('*', "")
        .trim()
        .to_ascii_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
}

fn option_index(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Parses per-question option selections against a `MultiSelectMap` schema.
///
/// Questions the model skipped are left unanswered; traversal reports them.
pub fn parse_multi_select(raw: &str, schema: &SchemaDescriptor) -> Result<AnswerMap, ParseFailure> {
    let SchemaDescriptor::MultiSelectMap(questions) = schema else {
        return Err(ParseFailure::new(ParseFailureReason::SchemaMismatch, "schema is not a multi-select map", raw));
    };
    let obj = extract_object(raw)?;
    let lookup = |key: &str| -> Option<&QuestionSchema> {
        questions.iter().find(|q| q.id == key).or_else(|| {
            let k = question_key(key);
            questions.iter().find(|q| question_key(&q.id) == k)
        })
    };
    let mut resolved = Vec::with_capacity(obj.len());
    let mut seen = HashSet::new();
    for (key, value) in &obj {
        let q = lookup(key).ok_or_else(|| {
            ParseFailure::new(ParseFailureReason::SchemaMismatch, format!("unexpected key {key:?}"), raw)
        })?;
        if !seen.insert(q.id.as_str()) {
            return Err(ParseFailure::new(
                ParseFailureReason::SchemaMismatch,
                format!("{} answered more than once", q.id),
                raw,
            ));
        }
        resolved.push((q, value));
    }
    let mut answers = AnswerMap::new();
    for (q, value) in resolved {
        let items: Vec<&Value> = match value {
            Value::Array(a) => a.iter().collect(),
            Value::Number(_) => vec![value],
            _ => {
                return Err(ParseFailure::new(
                    ParseFailureReason::InvalidValue,
                    format!("{}: expected a list of option indices, got {value}", q.id),
                    raw,
                ))
            }
        };
        let mut selected: Vec<u32> = Vec::with_capacity(items.len());
        for item in items {
            let idx = option_index(item).ok_or_else(|| {
                ParseFailure::new(ParseFailureReason::InvalidValue, format!("{}: {item} is not an index", q.id), raw)
            })?;
            if idx < 1 || idx > i64::from(q.option_count) {
                return Err(ParseFailure::new(
                    ParseFailureReason::InvalidOptionIndex,
                    format!("{}: option {idx} outside 1..={}", q.id, q.option_count),
                    raw,
                ));
            }
            let idx = idx as u32;
            if !selected.contains(&idx) {
                selected.push(idx);
            }
        }
        answers.insert(q.id.clone(), selected).map_err(|_| {
            ParseFailure::new(ParseFailureReason::InvalidOptionIndex, format!("{}: empty selection", q.id), raw)
        })?;
    }
    Ok(answers)
}

struct ChoicePatterns {
    choice_line: Regex,
    answer_is: Regex,
    paren: Regex,
    lone: Regex,
}

fn choice_patterns() -> &'static ChoicePatterns {
    static P: OnceLock<ChoicePatterns> = OnceLock::new();
    P.get_or_init(|| ChoicePatterns {
        choice_line: Regex::new(r"(?im)^[\s*#>]*choice\s*\**\s*[:：]\s*\**\s*\[?\s*\(?([ABC])\b[^\n|]*$")
            .expect("valid"),
        answer_is: Regex::new(r"(?i)answer\s+is\s*:?\s*\**\s*\(?([ABC])\b").expect("valid"),
        paren: Regex::new(r"\(([ABC])\)").expect("valid"),
        lone: Regex::new(r"(?i)^\s*\(?([ABC])\)?\s*(?:[.:)\-]\s*(?:prohibited|permitted|not\s+related)?\s*\.?)?\s*$")
            .expect("valid"),
    })
}

/// Parses a direct-baseline answer.
///
/// Patterns are tried in order: a `Choice:` line (the echoed option list
/// with `|` separators is skipped), then `answer is X` or `(X)`, then a
/// response consisting of a lone letter. The last match of a pattern wins.
pub fn parse_single_choice(raw: &str) -> Result<Choice, ParseFailure> {
    let p = choice_patterns();
    let last = |re: &Regex, text: &str| -> Option<Choice> {
        re.captures_iter(text).last().and_then(|c| Choice::from_letter(&c[1].to_ascii_uppercase()))
    };
    let found = last(&p.choice_line, raw)
        .or_else(|| last(&p.answer_is, raw))
        .or_else(|| last(&p.paren, raw))
        .or_else(|| last(&p.lone, raw));
    found.ok_or_else(|| ParseFailure::new(ParseFailureReason::InvalidValue, "no choice letter found", raw))
}

/// Parses a response against any schema, discarding the parsed value.
pub fn check_against_schema(raw: &str, schema: &SchemaDescriptor) -> Result<(), ParseFailure> {
    match schema {
        SchemaDescriptor::TriStateMap(_) => parse_tri_state_map(raw, schema).map(|_| ()),
        SchemaDescriptor::AnalysisObject => parse_analysis(raw).map(|_| ()),
        SchemaDescriptor::MultiSelectMap(_) => parse_multi_select(raw, schema).map(|_| ()),
        SchemaDescriptor::SingleChoice => parse_single_choice(raw).map(|_| ()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(list: &[&str]) -> SchemaDescriptor {
        SchemaDescriptor::TriStateMap(list.iter().map(|s| s.parse().unwrap()).collect())
    }

    #[test]
    fn extract_fenced_and_last() {
        assert_eq!(extract_json("```json\n{\"a\":1}\n```").unwrap(), serde_json::json!({"a":1}));
        assert_eq!(
            extract_json("thinking... {\"a\":1} final: {\"a\":2}").unwrap(),
            serde_json::json!({"a":2})
        );
        assert_eq!(extract_json("no json here").unwrap_err().reason, ParseFailureReason::NoJsonFound);
        assert_eq!(extract_json("[1,2]").unwrap_err().reason, ParseFailureReason::NoJsonFound);
    }

    #[test]
    fn nested_object_is_one_candidate() {
        let v = extract_json("x {\"a\":{\"b\":1}} y").unwrap();
        assert_eq!(v, serde_json::json!({"a":{"b":1}}));
    }

    #[test]
    fn python_literals() {
        let v = extract_json("{\"AI_system_involved\": True, \"AI_system_name\": \"None of the above\"}").unwrap();
        assert_eq!(v["AI_system_involved"], Value::Bool(true));
        assert_eq!(v["AI_system_name"], Value::String("None of the above".into()));
        assert_eq!(normalize_python_literals("Trueish None_x xNone"), "Trueish None_x xNone");
    }

    #[test]
    fn tri_state_table_shape() {
        let schema = ids(&["Article 6(1)(a)", "Article 6(1)(b)"]);
        let got = parse_tri_state_map(r#"{"Article 6(1)(a)":"no","Article 6(1)(b)":"not sure"}"#, &schema).unwrap();
        assert_eq!(got[&"Article 6(1)(a)".parse().unwrap()], TriState::No);
        assert_eq!(got[&"Article 6(1)(b)".parse().unwrap()], TriState::NotSure);
    }

    #[test]
    fn tri_state_failures() {
        let schema = ids(&["Article 6(1)(a)"]);
        let r = |s: &str| parse_tri_state_map(s, &schema).unwrap_err().reason;
        assert_eq!(r(r#"{"Article 6(1)(a)":"maybe"}"#), ParseFailureReason::InvalidValue);
        assert_eq!(r(r#"{"Article 6(1)(a)":true}"#), ParseFailureReason::InvalidValue);
        assert_eq!(r(r#"{}"#), ParseFailureReason::SchemaMismatch);
        assert_eq!(r(r#"{"Article 6(1)(a)":"yes","Article 7":"no"}"#), ParseFailureReason::SchemaMismatch);
        assert_eq!(r(r#"{"Article 6(1)(a)":"yes","Art. 6(1)(a)":"no"}"#), ParseFailureReason::SchemaMismatch);
        assert!(parse_tri_state_map("{}", &ids(&[])).unwrap().is_empty());
    }

    #[test]
    fn tri_state_lenient_keys() {
        let schema = ids(&["Article 6(1)(a)"]);
        let got = parse_tri_state_map(r#"{" article 06 (1)(A) ":"Not_Sure"}"#, &schema).unwrap();
        assert_eq!(got.values().next(), Some(&TriState::NotSure));
    }

    fn multi(qs: &[(&str, u32)]) -> SchemaDescriptor {
        SchemaDescriptor::MultiSelectMap(
            qs.iter().map(|(id, n)| QuestionSchema { id: id.to_string(), option_count: *n }).collect(),
        )
    }

    #[test]
    fn multi_select_rules() {
        let schema = multi(&[("question_1", 6), ("question_2", 4)]);
        let a = parse_multi_select(r#"{"question_1":[1,5]}"#, &schema).unwrap();
        assert_eq!(a.get("question_1"), Some(&[1, 5][..]));
        assert_eq!(a.get("question_2"), None);
        let a = parse_multi_select(r#"{"question_1":[2,2,3]}"#, &schema).unwrap();
        assert_eq!(a.get("question_1"), Some(&[2, 3][..]));
        let a = parse_multi_select(r#"{"Question 2":["4", 1]}"#, &schema).unwrap();
        assert_eq!(a.get("question_2"), Some(&[4, 1][..]));
        let r = |s: &str| parse_multi_select(s, &schema).unwrap_err().reason;
        assert_eq!(r(r#"{"question_1":[0]}"#), ParseFailureReason::InvalidOptionIndex);
        assert_eq!(r(r#"{"question_1":[7]}"#), ParseFailureReason::InvalidOptionIndex);
        assert_eq!(r(r#"{"question_1":[]}"#), ParseFailureReason::InvalidOptionIndex);
        assert_eq!(r(r#"{"question_1":"Provider"}"#), ParseFailureReason::InvalidValue);
        assert_eq!(r(r#"{"question_9":[1]}"#), ParseFailureReason::SchemaMismatch);
    }

    #[test]
    fn single_choice_patterns() {
        assert_eq!(parse_single_choice("Choice: B. Permitted").unwrap(), Choice::B);
        assert_eq!(parse_single_choice("The answer is (C)").unwrap(), Choice::C);
        assert_eq!(parse_single_choice("A").unwrap(), Choice::A);
        assert_eq!(parse_single_choice("(b)").unwrap(), Choice::B);
        assert_eq!(
            parse_single_choice("Choice: [A. Prohibited | B. Permitted | C. Not related ]\nChoice: C").unwrap(),
            Choice::C
        );
        assert_eq!(parse_single_choice("").unwrap_err().reason, ParseFailureReason::InvalidValue);
        assert!(parse_single_choice("A bank deploys a model").is_err());
        assert_eq!(Choice::A.label(), Label::Prohibited);
    }

    #[test]
    fn analysis_object() {
        let a = parse_analysis("{\"AI_system_involved\": False, \"AI_system_name\": null}").unwrap();
        assert!(!a.ai_system_involved);
        assert_eq!(a.ai_system_name, None);
        assert_eq!(parse_analysis("{\"name\": 1}").unwrap_err().reason, ParseFailureReason::SchemaMismatch);
        assert_eq!(
            parse_analysis("{\"AI_system_involved\": 3}").unwrap_err().reason,
            ParseFailureReason::InvalidValue
        );
    }

    #[test]
    fn excerpt_is_capped() {
        let raw = "é".repeat(2000);
        let f = extract_json(&raw).unwrap_err();
        assert_eq!(f.raw_excerpt.chars().count(), MAX_EXCERPT_CHARS);
    }
}
