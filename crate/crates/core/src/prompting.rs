//! Prompt construction for GDPR chunk prompts, the two-stage EU AI Act
//! prompts and the direct multiple-choice baseline.
//!
//! Templates live in `templates/*.txt` with `{{slot}}` placeholders that are
//! substituted in a single pass, so slot values are never re-expanded. The
//! case context is fenced by `"""` lines with `\` and `"` escaped, which keeps
//! the fence closed whatever the context contains.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::DecisionGraph;
use crate::regulation::{ChunkKind, ProvisionId, RegulationManifest};
use crate::tokens::count_tokens;

pub const GDPR_CHUNK_TEMPLATE: &str = include_str!("../templates/gdpr_chunk.txt");
pub const AIACT_ANALYSIS_TEMPLATE: &str = include_str!("../templates/aiact_analysis.txt");
pub const AIACT_QUESTIONS_TEMPLATE: &str = include_str!("../templates/aiact_questions.txt");
pub const DIRECT_BASELINE_TEMPLATE: &str = include_str!("../templates/direct_baseline.txt");

/// The sentence every GDPR chunk prompt must carry.
pub const NOT_SURE_INSTRUCTION: &str =
    "If the article is relevant but does not specify in the context, please answer with \"not sure\".";

pub const GDPR_SECTIONS: &[&str] = &["Instruction:", "Context:", "GDPR Articles:", "Output Format:"];
pub const AIACT_ANALYSIS_SECTIONS: &[&str] =
    &["**Definition of AI system**:", "**Case**:", "**Output format**:"];
pub const AIACT_QUESTIONS_SECTIONS: &[&str] =
    &["**Case content**:", "**Case context**:", "**List of questions**:", "**Output format**:"];
pub const DIRECT_SECTIONS: &[&str] = &["Event:", "Output Format:"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("manifest has no {kind} chunk{}", sub_group.as_ref().map(|s| format!(" with sub-group {s:?}")).unwrap_or_default())]
    UnknownChunk { kind: ChunkKind, sub_group: Option<String> },
    #[error("{kind} has several sub-groups; one must be named")]
    AmbiguousChunk { kind: ChunkKind },
    #[error("domain must not be empty")]
    EmptyDomain,
    #[error("template slot {{{{{0}}}}} has no value")]
    MissingSlot(String),
    #[error("decision graph is invalid: {0}")]
    InvalidGraph(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PromptMode {
    GdprChunk { kind: ChunkKind, sub_group: Option<String> },
    AiActAnalysis,
    AiActQuestions,
    DirectBaseline { domain: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionSchema {
    pub id: String,
    pub option_count: u32,
}

/// What the structured-output parser must find in the response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "keys", rename_all = "snake_case")]
pub enum SchemaDescriptor {
    TriStateMap(Vec<ProvisionId>),
    AnalysisObject,
    MultiSelectMap(Vec<QuestionSchema>),
    SingleChoice,
}

impl SchemaDescriptor {
    /// JSON keys the output-format block must name.
    pub fn keys(&self) -> Vec<String> {
        match self {
            SchemaDescriptor::TriStateMap(ids) => ids.iter().map(|id| id.to_string()).collect(),
            SchemaDescriptor::AnalysisObject => {
                vec!["AI_system_involved".into(), "AI_system_name".into()]
            }
            SchemaDescriptor::MultiSelectMap(qs) => qs.iter().map(|q| q.id.clone()).collect(),
            SchemaDescriptor::SingleChoice => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRequest {
    pub mode: PromptMode,
    pub case_context: String,
    pub rendered_text: String,
    pub expected_schema: SchemaDescriptor,
    pub token_estimate: usize,
}

impl PromptRequest {
    fn new(mode: PromptMode, case_context: &str, rendered_text: String, schema: SchemaDescriptor) -> Self {
        let token_estimate = count_tokens(&rendered_text);
        Self {
            mode,
            case_context: case_context.to_string(),
            rendered_text,
            expected_schema: schema,
            token_estimate,
        }
    }
}

/// A parsed template: header comments stripped, slots known.
#[derive(Debug, Clone)]
pub struct Template {
    body: String,
}

fn slot_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{(\w+)\}\}").expect("slot pattern compiles"))
}

impl Template {
    /// Leading `#` lines up to the first blank line form a header that is not rendered.
    pub fn parse(text: &str) -> Self {
        let mut rest = text;
        if rest.starts_with('#') {
            loop {
                let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
                rest = tail;
                if !line.starts_with('#') {
                    break;
                }
            }
        }
        Self { body: rest.to_string() }
    }

    pub fn slots(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in slot_pattern().captures_iter(&self.body) {
            if !out.iter().any(|s| s == &c[1]) {
                out.push(c[1].to_string());
            }
        }
        out
    }

    pub fn render(&self, values: &HashMap<&str, String>) -> Result<String, PromptError> {
        let mut out = String::with_capacity(self.body.len());
        let mut last = 0;
        for c in slot_pattern().captures_iter(&self.body) {
            let m = c.get(0).expect("whole match");
            let name = &c[1];
            let value = values.get(name).ok_or_else(|| PromptError::MissingSlot(name.to_string()))?;
            out.push_str(&self.body[last..m.start()]);
            out.push_str(value);
            last = m.end();
        }
        out.push_str(&self.body[last..]);
        Ok(out)
    }
}

/// Escapes a case context for the `"""` fence.
pub fn escape_context(ctx: &str) -> String {
    let mut out = String::with_capacity(ctx.len());
    for c in ctx.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            _ => out.push(c),
        }
    }
    out
}

pub fn unescape_context(escaped: &str) -> String {
    let mut out = String::with_capacity(escaped.len());
    let mut chars = escaped.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Returns the fenced context slot of a rendered prompt, unescaped.
pub fn extract_context(rendered: &str) -> Option<String> {
    let start = rendered.find("\n\"\"\"\n")? + 5;
    let end = start + rendered[start..].find("\n\"\"\"\n")?;
    Some(unescape_context(&rendered[start..end]))
}

/// Splits a rendered prompt at the given section markers, ignoring any
/// marker text inside `"""` or ``` fences. Returns (marker, body) pairs in order.
pub fn split_sections<'a>(rendered: &'a str, markers: &[&'a str]) -> Vec<(&'a str, String)> {
    let mut out: Vec<(&str, String)> = Vec::new();
    let mut in_quote = false;
    let mut in_code = false;
    for line in rendered.lines() {
        if line == "\"\"\"" && !in_code {
            in_quote = !in_quote;
        } else if line.starts_with("```") && !in_quote {
            in_code = !in_code;
        } else if !in_quote && !in_code {
            if let Some(m) = markers.iter().find(|m| line.starts_with(**m)) {
                out.push((m, line[m.len()..].trim().to_string()));
                continue;
            }
        }
        if let Some((_, body)) = out.last_mut() {
            if !body.is_empty() {
                body.push('\n');
            }
            body.push_str(line);
        }
    }
    out
}

fn chunk_guidance(kind: ChunkKind, sub_group: Option<&str>) -> &'static str {
    match (kind, sub_group) {
        (ChunkKind::ApplicabilityScope, _) => {
            "Answer \"yes\" when the situation an article describes matches the case and \"no\" when it does not."
        }
        (ChunkKind::CommonProvisions, Some("lawful_basis")) => {
            "Answer \"yes\" when the article provides a lawful ground for the processing in the case and \"no\" when it does not."
        }
        _ => {
            "Answer \"yes\" when the case satisfies the requirements of the article and \"no\" when the case conflicts with them."
        }
    }
}

fn render(template: &str, values: &[(&'static str, String)]) -> Result<String, PromptError> {
    let map: HashMap<&str, String> = values.iter().cloned().collect();
    Template::parse(template).render(&map)
}

pub fn build_gdpr_chunk_prompt(
    manifest: &RegulationManifest,
    kind: ChunkKind,
    sub_group: Option<&str>,
    case_context: &str,
) -> Result<PromptRequest, PromptError> {
    let chunk = match sub_group {
        Some(_) => manifest.chunk(kind, sub_group),
        None => {
            let all: Vec<_> = manifest.chunks_of(kind).collect();
            if all.len() > 1 {
                return Err(PromptError::AmbiguousChunk { kind });
            }
            all.into_iter().next()
        }
    }
    .ok_or_else(|| PromptError::UnknownChunk { kind, sub_group: sub_group.map(str::to_string) })?;

    let articles: Vec<String> = chunk.provisions.iter().map(|p| format!("- {}: {}", p.id, p.text)).collect();
    let ids: Vec<ProvisionId> = chunk.provision_ids().cloned().collect();
    let mut fmt_lines = vec!["{".to_string()];
    for (i, id) in ids.iter().enumerate() {
        let comma = if i + 1 < ids.len() { "," } else { "" };
        fmt_lines.push(format!("    \"{id}\": \"yes\" or \"no\" or \"not sure\"{comma}"));
    }
    fmt_lines.push("}".into());

    let text = render(
        GDPR_CHUNK_TEMPLATE,
        &[
            ("chunk_guidance", chunk_guidance(kind, chunk.sub_group.as_deref()).to_string()),
            ("context", escape_context(case_context)),
            ("articles", articles.join("\n")),
            ("output_format", fmt_lines.join("\n")),
        ],
    )?;
    Ok(PromptRequest::new(
        PromptMode::GdprChunk { kind, sub_group: chunk.sub_group.clone() },
        case_context,
        text,
        SchemaDescriptor::TriStateMap(ids),
    ))
}

pub fn build_aiact_analysis_prompt(case_context: &str) -> PromptRequest {
    let text = render(AIACT_ANALYSIS_TEMPLATE, &[("context", escape_context(case_context))])
        .expect("analysis template slots are fixed");
    PromptRequest::new(PromptMode::AiActAnalysis, case_context, text, SchemaDescriptor::AnalysisObject)
}

/// Pretty-prints the stage-1 analysis for embedding in a ```json fence.
fn render_analysis(analyzed_context: &str) -> String {
    let pretty = serde_json::from_str::<serde_json::Value>(analyzed_context)
        .ok()
        .and_then(|v| serde_json::to_string_pretty(&v).ok())
        .unwrap_or_else(|| analyzed_context.trim().to_string());
    pretty.replace('`', "\\u0060")
}

fn question_heading(position: usize, id: &str) -> String {
    if id == format!("question_{position}") {
        format!("**Question {position}**")
    } else {
        format!("**Question {position}** ({id})")
    }
}

pub fn build_aiact_questions_prompt(
    graph: &DecisionGraph,
    case_context: &str,
    analyzed_context: &str,
) -> Result<PromptRequest, PromptError> {
    let report = graph.validate();
    if !report.is_clean() {
        return Err(PromptError::InvalidGraph(report.to_string()));
    }
    let mut blocks = Vec::new();
    let mut schema = Vec::new();
    for (i, q) in graph.questions().iter().enumerate() {
        let mut b = format!("{}: {}\n    **Options**:", question_heading(i + 1, &q.id), q.text);
        for o in &q.options {
            b.push_str(&format!("\n    {}. {}", o.index, o.label));
        }
        if let Some(bg) = &q.background {
            b.push_str(&format!("\n**background**: {bg}"));
        }
        blocks.push(b);
        schema.push(QuestionSchema { id: q.id.clone(), option_count: q.options.len() as u32 });
    }
    let mut fmt_lines = vec!["{".to_string()];
    for (i, q) in schema.iter().enumerate() {
        let comma = if i + 1 < schema.len() { "," } else { "" };
        fmt_lines.push(format!(
            "    \"{}\": [option indices chosen from 1 to {}]{comma}",
            q.id, q.option_count
        ));
    }
    fmt_lines.push("}".into());

    let text = render(
        AIACT_QUESTIONS_TEMPLATE,
        &[
            ("context", escape_context(case_context)),
            ("analyzed_context", render_analysis(analyzed_context)),
            ("questions", blocks.join("\n")),
            ("output_format", fmt_lines.join("\n")),
        ],
    )?;
    Ok(PromptRequest::new(
        PromptMode::AiActQuestions,
        case_context,
        text,
        SchemaDescriptor::MultiSelectMap(schema),
    ))
}

pub fn build_direct_baseline_prompt(domain: &str, case_context: &str) -> Result<PromptRequest, PromptError> {
    let domain = domain.trim();
    if domain.is_empty() {
        return Err(PromptError::EmptyDomain);
    }
    let text = render(
        DIRECT_BASELINE_TEMPLATE,
        &[("domain", domain.to_string()), ("context", escape_context(case_context))],
    )?;
    Ok(PromptRequest::new(
        PromptMode::DirectBaseline { domain: domain.to_string() },
        case_context,
        text,
        SchemaDescriptor::SingleChoice,
    ))
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptMode::GdprChunk { kind, sub_group: Some(s) } => write!(f, "gdpr_chunk:{kind}/{s}"),
            PromptMode::GdprChunk { kind, sub_group: None } => write!(f, "gdpr_chunk:{kind}"),
            PromptMode::AiActAnalysis => f.write_str("aiact_analysis"),
            PromptMode::AiActQuestions => f.write_str("aiact_questions"),
            PromptMode::DirectBaseline { domain } => write!(f, "direct:{domain}"),
        }
    }
}
