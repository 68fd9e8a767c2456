use std::fmt;
use std::str::FromStr;

use compliance_core::engine::{aiact_not_involved, assess_aiact, assess_gdpr, EngineError};
use compliance_core::evaluation::Prediction;
use compliance_core::graph::DecisionGraph;
use compliance_core::prompting::{
    build_aiact_analysis_prompt, build_aiact_questions_prompt, build_direct_baseline_prompt, build_gdpr_chunk_prompt,
    PromptError, PromptRequest,
};
use compliance_core::regulation::RegulationManifest;
use compliance_core::structured::{
    parse_analysis, parse_chunk_answers, parse_multi_select, parse_single_choice, ParseFailure, ParseFailureReason,
};
use compliance_core::{CaseRecord, Domain, Label, Verdict};
use compliance_llm::{CompletionRecord, GenerationConfig, LlmClient, LlmError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Chunked GDPR prompting or two-stage AI Act traversal, then rule aggregation.
    #[serde(rename = "contextlens")]
    ContextLens,
    /// One prompt asking for the label directly.
    Direct,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ContextLens => "contextlens",
            Method::Direct => "direct",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "contextlens" | "context_lens" | "context-lens" => Ok(Method::ContextLens),
            "direct" | "baseline" => Ok(Method::Direct),
            _ => Err(format!("unknown method {s:?}; expected contextlens or direct")),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("case {case_id}: unknown domain {domain:?}")]
    UnknownDomain { case_id: String, domain: String },
    #[error("case {case_id}: {source}")]
    Llm {
        case_id: String,
        #[source]
        source: LlmError,
    },
    #[error("case {case_id}: {source}")]
    Prompt {
        case_id: String,
        #[source]
        source: PromptError,
    },
    #[error("case {case_id}: {source}")]
    Engine {
        case_id: String,
        #[source]
        source: EngineError,
    },
}

/// One line of the verdict file. Exactly one of `verdict` and `failure` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictLine {
    pub case_id: String,
    pub domain: String,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<ParseFailure>,
}

impl VerdictLine {
    pub fn prediction(&self) -> Option<Prediction> {
        match (&self.verdict, &self.failure) {
            (Some(v), None) => Some(Ok(v.clone())),
            (None, Some(f)) => Some(Err(f.clone())),
            _ => None,
        }
    }

    /// The predicted label, or `None` for a parse failure.
    pub fn label(&self) -> Option<Label> {
        self.verdict.as_ref().map(|v| v.label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub line: VerdictLine,
    pub records: Vec<CompletionRecord>,
}

/// Everything needed to assess one case.
/// Extension point for retrieval-augmented runs: returns the context the
/// prompts are built from, for example the case text followed by retrieved
/// provisions. No retriever ships with the crate.
pub trait ContextAugmenter: Send + Sync {
    fn augment(&self, case: &CaseRecord) -> String;
}

pub struct Pipeline<'a> {
    pub client: &'a LlmClient,
    pub config: &'a GenerationConfig,
    pub manifest: &'a RegulationManifest,
    pub graph: &'a DecisionGraph,
    pub method: Method,
    pub augmenter: Option<&'a dyn ContextAugmenter>,
}

type Step<T> = Result<Result<T, ParseFailure>, PipelineError>;

impl Pipeline<'_> {
    fn ask(&self, case_id: &str, prompt: &PromptRequest, records: &mut Vec<CompletionRecord>) -> Result<String, PipelineError> {
        let rec = self
            .client
            .complete(prompt, self.config)
            .map_err(|source| PipelineError::Llm { case_id: case_id.into(), source })?;
        let text = rec.response_text.clone();
        records.push(rec);
        Ok(text)
    }

    fn prompt_err(case_id: &str) -> impl FnOnce(PromptError) -> PipelineError + '_ {
        move |source| PipelineError::Prompt { case_id: case_id.into(), source }
    }

    /// Queries every chunk, then aggregates. The first failure in precedence
    /// order fails the whole case.
    fn gdpr(&self, case: &CaseRecord, records: &mut Vec<CompletionRecord>) -> Step<Verdict> {
        let mut parsed = Vec::new();
        let mut failure = None;
        for chunk in self.manifest.chunks_by_precedence() {
            let sub = chunk.sub_group.as_deref();
            let prompt = build_gdpr_chunk_prompt(self.manifest, chunk.kind, sub, &case.context)
                .map_err(Self::prompt_err(&case.case_id))?;
            let raw = self.ask(&case.case_id, &prompt, records)?;
            match parse_chunk_answers(&raw, chunk.kind, sub, &prompt.expected_schema) {
                Ok(p) => parsed.push(p),
                Err(f) => {
                    failure.get_or_insert(f);
                }
            }
        }
        if let Some(f) = failure {
            return Ok(Err(f));
        }
        assess_gdpr(self.manifest, &parsed)
            .map(Ok)
            .map_err(|source| PipelineError::Engine { case_id: case.case_id.clone(), source })
    }

    fn aiact(&self, case: &CaseRecord, records: &mut Vec<CompletionRecord>) -> Step<Verdict> {
        let analysis_prompt = build_aiact_analysis_prompt(&case.context);
        let raw = self.ask(&case.case_id, &analysis_prompt, records)?;
        let analysis = match parse_analysis(&raw) {
            Ok(a) => a,
            Err(f) => return Ok(Err(f)),
        };
        if !analysis.ai_system_involved {
            return Ok(Ok(aiact_not_involved()));
        }
        let analyzed = serde_json::to_string_pretty(&analysis.raw).expect("JSON value serializes");
        let prompt = build_aiact_questions_prompt(self.graph, &case.context, &analyzed)
            .map_err(Self::prompt_err(&case.case_id))?;
        let raw = self.ask(&case.case_id, &prompt, records)?;
        let answers = match parse_multi_select(&raw, &prompt.expected_schema) {
            Ok(a) => a,
            Err(f) => return Ok(Err(f)),
        };
        Ok(match self.graph.traverse(&answers) {
            Ok(t) => Ok(assess_aiact(&t, self.graph)),
            Err(e) => Err(ParseFailure::new(ParseFailureReason::InvalidOptionIndex, e.to_string(), &raw)),
        })
    }

    fn direct(&self, case: &CaseRecord, domain: Domain, records: &mut Vec<CompletionRecord>) -> Step<Verdict> {
        let prompt = build_direct_baseline_prompt(domain.display_name(), &case.context)
            .map_err(Self::prompt_err(&case.case_id))?;
        let raw = self.ask(&case.case_id, &prompt, records)?;
        Ok(parse_single_choice(&raw).map(|c| Verdict {
            label: c.label(),
            indeterminate: false,
            unknown_factors: vec![],
            cited: vec![],
            chunk_trace: vec![],
            reached_leaves: vec![],
        }))
    }

    /// Parse failures become part of the outcome; only LLM, prompt and
    /// engine errors abort.
    pub fn assess_case(&self, case: &CaseRecord) -> Result<CaseOutcome, PipelineError> {
        let domain: Domain = case.domain.parse().map_err(|_| PipelineError::UnknownDomain {
            case_id: case.case_id.clone(),
            domain: case.domain.clone(),
        })?;
        let augmented;
        let case = match self.augmenter {
            Some(a) => {
                augmented = CaseRecord { context: a.augment(case), ..case.clone() };
                &augmented
            }
            None => case,
        };
        let mut records = Vec::new();
        let result = match (self.method, domain) {
            (Method::Direct, d) => self.direct(case, d, &mut records)?,
            (Method::ContextLens, Domain::Gdpr) => self.gdpr(case, &mut records)?,
            (Method::ContextLens, Domain::AiAct) => self.aiact(case, &mut records)?,
        };
        let (verdict, failure) = match result {
            Ok(v) => (Some(v), None),
            Err(f) => (None, Some(f)),
        };
        Ok(CaseOutcome {
            line: VerdictLine {
                case_id: case.case_id.clone(),
                domain: domain.as_str().to_string(),
                method: self.method,
                ground_truth: case.ground_truth,
                verdict,
                failure,
            },
            records,
        })
    }
}
