//! Rule-based aggregation of chunk answers and graph traversals into verdicts.
//!
//! GDPR: each chunk is assessed under its connective, chunks sharing a kind
//! are merged, and the first determinate chunk in precedence order decides.
//! When nothing decides, the verdict defaults to Prohibited and is flagged
//! indeterminate for human review.
//!
//! EU AI Act: the most severe reached leaf decides.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DecisionGraph, TraversalResult};
use crate::label::Label;
use crate::regulation::{ChunkKind, Connective, ProvisionId, RegulationChunk, RegulationManifest};
use crate::scalar::Scalar;
use crate::structured::{ParsedChunkAnswers, TriState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("answers for {chunk} do not cover its provisions: missing {missing:?}, unexpected {unexpected:?}")]
    Coverage { chunk: String, missing: Vec<String>, unexpected: Vec<String> },
    #[error("no {kind} chunk{} in the manifest", sub_group.as_ref().map(|s| format!(" with sub-group {s:?}")).unwrap_or_default())]
    UnknownChunk { kind: ChunkKind, sub_group: Option<String> },
    #[error("imperfect-context statistics need at least one verdict")]
    NoVerdicts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkStatus {
    Permit,
    Prohibit,
    NotApplicable,
    Silent,
    Indeterminate,
}

impl ChunkStatus {
    pub const ALL: [ChunkStatus; 5] = [
        ChunkStatus::Permit,
        ChunkStatus::Prohibit,
        ChunkStatus::NotApplicable,
        ChunkStatus::Silent,
        ChunkStatus::Indeterminate,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkVerdict {
    pub kind: ChunkKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_group: Option<String>,
    pub connective: Connective,
    pub status: ChunkStatus,
    pub supporting: Vec<ProvisionId>,
    pub unknown: Vec<ProvisionId>,
    /// Every provision that received an answer.
    pub assessed: Vec<ProvisionId>,
}

impl ChunkVerdict {
    /// A verdict with only a status, for reasoning about aggregation alone.
    pub fn bare(kind: ChunkKind, status: ChunkStatus) -> Self {
        let connective = match kind {
            ChunkKind::ApplicabilityScope => Connective::Disjunctive,
            _ => Connective::Conjunctive,
        };
        Self { kind, sub_group: None, connective, status, supporting: vec![], unknown: vec![], assessed: vec![] }
    }

    pub fn label(&self) -> String {
        match &self.sub_group {
            Some(s) => format!("{}/{}", self.kind, s),
            None => self.kind.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorRef {
    Provision(ProvisionId),
    Question(String),
}

impl fmt::Display for FactorRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorRef::Provision(p) => p.fmt(f),
            FactorRef::Question(q) => f.write_str(q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorOrigin {
    NotSure,
    NoneOfTheAbove,
}

/// A contextual factor the case description left open.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnknownFactor {
    pub factor: FactorRef,
    pub origin: FactorOrigin,
    /// Chunk label or question id the factor was raised in.
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    pub indeterminate: bool,
    pub unknown_factors: Vec<UnknownFactor>,
    pub cited: Vec<ProvisionId>,
    pub chunk_trace: Vec<ChunkVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reached_leaves: Vec<String>,
}

/// A case to assess.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: String,
    pub domain: String,
    pub context: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Label>,
}

fn check_coverage(
    chunk: &RegulationChunk,
    answers: &BTreeMap<ProvisionId, TriState>,
) -> Result<(), EngineError> {
    let missing: Vec<String> =
        chunk.provision_ids().filter(|id| !answers.contains_key(*id)).map(|id| id.to_string()).collect();
    let unexpected: Vec<String> = answers
        .keys()
        .filter(|id| !chunk.provisions.iter().any(|p| &p.id == *id))
        .map(|id| id.to_string())
        .collect();
    if missing.is_empty() && unexpected.is_empty() {
        Ok(())
    } else {
        Err(EngineError::Coverage { chunk: chunk.label(), missing, unexpected })
    }
}

/// Assesses one chunk from its tri-state answers.
///
/// Disjunctive chunks permit when some (non-exemption) provision holds; in
/// the scope chunk a holding exemption makes the regulation inapplicable.
/// Conjunctive chunks prohibit on any violated provision and permit only
/// when all hold. Every "not sure" provision is reported as unknown.
pub fn assess_gdpr_chunk(
    chunk: &RegulationChunk,
    answers: &BTreeMap<ProvisionId, TriState>,
) -> Result<ChunkVerdict, EngineError> {
    check_coverage(chunk, answers)?;
    let with = |pred: &dyn Fn(&crate::regulation::Provision, TriState) -> bool| -> Vec<ProvisionId> {
        chunk.provisions.iter().filter(|p| pred(p, answers[&p.id])).map(|p| p.id.clone()).collect()
    };
    let unknown = with(&|_, a| a == TriState::NotSure);
    let assessed = chunk.provision_ids().cloned().collect();
    let is_scope = chunk.kind == ChunkKind::ApplicabilityScope;

    let (status, supporting) = if chunk.provisions.is_empty() {
        (ChunkStatus::Silent, vec![])
    } else {
        match chunk.connective {
            Connective::Disjunctive => {
                let negative = if is_scope { ChunkStatus::NotApplicable } else { ChunkStatus::Prohibit };
                let exemptions_hit = with(&|p, a| p.exemption && a == TriState::Yes);
                let holding = with(&|p, a| !p.exemption && a == TriState::Yes);
                let open = with(&|p, a| !p.exemption && a == TriState::NotSure);
                if !exemptions_hit.is_empty() {
                    (negative, exemptions_hit)
                } else if !holding.is_empty() {
                    (ChunkStatus::Permit, holding)
                } else if !open.is_empty() {
                    (ChunkStatus::Indeterminate, vec![])
                } else {
                    (negative, with(&|p, _| !p.exemption))
                }
            }
            Connective::Conjunctive => {
                let violated = with(&|_, a| a == TriState::No);
                if !violated.is_empty() {
                    (ChunkStatus::Prohibit, violated)
                } else if !unknown.is_empty() {
                    (ChunkStatus::Indeterminate, vec![])
                } else {
                    (ChunkStatus::Permit, chunk.provision_ids().cloned().collect())
                }
            }
        }
    };
    Ok(ChunkVerdict {
        kind: chunk.kind,
        sub_group: chunk.sub_group.clone(),
        connective: chunk.connective,
        status,
        supporting,
        unknown,
        assessed,
    })
}

/// Merges the verdicts of chunks sharing a kind into one.
///
/// Disjunctive members (lawful bases) gate: any prohibiting member
/// prohibits, otherwise a permitting gate permits and an open gate leaves
/// the kind indeterminate. Without a deciding gate the conjunctive members
/// are conjoined.
pub fn merge_chunk_verdicts(kind: ChunkKind, parts: &[ChunkVerdict]) -> ChunkVerdict {
    if let [only] = parts {
        return only.clone();
    }
    let collect = |f: &dyn Fn(&ChunkVerdict) -> &Vec<ProvisionId>, sel: &dyn Fn(&ChunkVerdict) -> bool| {
        parts.iter().filter(|v| sel(v)).flat_map(|v| f(v).iter().cloned()).collect::<Vec<_>>()
    };
    let unknown = collect(&|v| &v.unknown, &|_| true);
    let assessed = collect(&|v| &v.assessed, &|_| true);
    let is = |s: ChunkStatus| move |v: &ChunkVerdict| v.status == s;
    let gates: Vec<&ChunkVerdict> = parts.iter().filter(|v| v.connective == Connective::Disjunctive).collect();
    let rest: Vec<&ChunkVerdict> = parts.iter().filter(|v| v.connective == Connective::Conjunctive).collect();

    let (status, supporting) = if parts.iter().any(is(ChunkStatus::Prohibit)) {
        (ChunkStatus::Prohibit, collect(&|v| &v.supporting, &is(ChunkStatus::Prohibit)))
    } else if gates.iter().any(|g| g.status == ChunkStatus::Indeterminate) {
        (ChunkStatus::Indeterminate, vec![])
    } else if gates.iter().any(|g| g.status == ChunkStatus::Permit) {
        (ChunkStatus::Permit, collect(&|v| &v.supporting, &|v| v.connective == Connective::Disjunctive && v.status == ChunkStatus::Permit))
    } else if rest.iter().any(|v| v.status == ChunkStatus::Indeterminate) {
        (ChunkStatus::Indeterminate, vec![])
    } else if rest.iter().any(|v| v.status == ChunkStatus::Permit) {
        (ChunkStatus::Permit, collect(&|v| &v.supporting, &|v| v.connective == Connective::Conjunctive && v.status == ChunkStatus::Permit))
    } else if parts.iter().any(is(ChunkStatus::NotApplicable)) {
        (ChunkStatus::NotApplicable, collect(&|v| &v.supporting, &is(ChunkStatus::NotApplicable)))
    } else {
        (ChunkStatus::Silent, vec![])
    };
    let connective = if kind == ChunkKind::ApplicabilityScope { Connective::Disjunctive } else { Connective::Conjunctive };
    ChunkVerdict { kind, sub_group: None, connective, status, supporting, unknown, assessed }
}

fn decides(v: &ChunkVerdict) -> Option<Label> {
    match v.status {
        ChunkStatus::Permit => Some(Label::Permitted),
        ChunkStatus::Prohibit => Some(Label::Prohibited),
        _ => None,
    }
}

/// Combines chunk verdicts through the precedence hierarchy.
///
/// Verdicts of the same kind are merged first. The scope chunk only gates:
/// NotApplicable ends the assessment and anything else proceeds, with an
/// open scope flagging the result indeterminate. Below scope the first
/// chunk that permits or prohibits decides.
pub fn aggregate_gdpr(chunk_verdicts: &[ChunkVerdict]) -> Verdict {
    let mut trace = chunk_verdicts.to_vec();
    trace.sort_by_key(|v| std::cmp::Reverse(v.kind.precedence()));
    let unknown_factors: Vec<UnknownFactor> = trace
        .iter()
        .flat_map(|v| {
            v.unknown.iter().map(move |p| UnknownFactor {
                factor: FactorRef::Provision(p.clone()),
                origin: FactorOrigin::NotSure,
                context: v.label(),
            })
        })
        .collect();

    let merged: Vec<ChunkVerdict> = ChunkKind::ALL
        .iter()
        .filter_map(|&kind| {
            let parts: Vec<ChunkVerdict> = trace.iter().filter(|v| v.kind == kind).cloned().collect();
            (!parts.is_empty()).then(|| merge_chunk_verdicts(kind, &parts))
        })
        .collect();

    let mut indeterminate = false;
    let mut decision: Option<(Label, Vec<ProvisionId>)> = None;
    for v in &merged {
        if v.kind == ChunkKind::ApplicabilityScope {
            match v.status {
                ChunkStatus::NotApplicable => {
                    decision = Some((Label::NotApplicable, v.supporting.clone()));
                    break;
                }
                ChunkStatus::Indeterminate => indeterminate = true,
                _ => {}
            }
            continue;
        }
        if let Some(label) = decides(v) {
            decision = Some((label, v.supporting.clone()));
            break;
        }
    }
    let (label, cited) = decision.unwrap_or_else(|| {
        indeterminate = true;
        (Label::Prohibited, vec![])
    });
    Verdict { label, indeterminate, unknown_factors, cited, chunk_trace: trace, reached_leaves: vec![] }
}

/// Assesses a whole GDPR case from the parsed answers of every chunk.
pub fn assess_gdpr(manifest: &RegulationManifest, answers: &[ParsedChunkAnswers]) -> Result<Verdict, EngineError> {
    let mut verdicts = Vec::with_capacity(answers.len());
    for a in answers {
        let chunk = manifest.chunk(a.chunk, a.sub_group.as_deref()).ok_or_else(|| EngineError::UnknownChunk {
            kind: a.chunk,
            sub_group: a.sub_group.clone(),
        })?;
        verdicts.push(assess_gdpr_chunk(chunk, &a.answers)?);
    }
    Ok(aggregate_gdpr(&verdicts))
}

/// Derives an EU AI Act verdict from a traversal.
///
/// The most severe reached leaf decides (Prohibited > Permitted >
/// NotApplicable) and its citations are reported. Without any reached leaf
/// the verdict defaults to Prohibited. Open branches flag the verdict
/// indeterminate.
pub fn assess_aiact(traversal: &TraversalResult, graph: &DecisionGraph) -> Verdict {
    let mut unknown_factors: Vec<UnknownFactor> = traversal
        .nota_hits
        .iter()
        .map(|q| UnknownFactor {
            factor: FactorRef::Question(q.clone()),
            origin: FactorOrigin::NoneOfTheAbove,
            context: q.clone(),
        })
        .collect();
    unknown_factors.extend(traversal.unanswered.iter().map(|q| UnknownFactor {
        factor: FactorRef::Question(q.clone()),
        origin: FactorOrigin::NotSure,
        context: q.clone(),
    }));

    let leaves: Vec<_> = traversal.reached_leaves.iter().filter_map(|id| graph.leaf(id)).collect();
    let deciding = leaves
        .iter()
        .copied()
        .reduce(|best, l| if l.label_mapping.outcome_rank() > best.label_mapping.outcome_rank() { l } else { best });
    let (label, cited) = match deciding {
        Some(l) => (l.label_mapping, l.cited_provisions.clone()),
        None => (Label::Prohibited, vec![]),
    };
    Verdict {
        label,
        indeterminate: deciding.is_none() || !traversal.unanswered.is_empty(),
        unknown_factors,
        cited,
        chunk_trace: vec![],
        reached_leaves: traversal.reached_leaves.clone(),
    }
}

/// Verdict for an EU AI Act case whose analysis found no AI system.
pub fn aiact_not_involved() -> Verdict {
    Verdict {
        label: Label::NotApplicable,
        indeterminate: false,
        unknown_factors: vec![],
        cited: vec![],
        chunk_trace: vec![],
        reached_leaves: vec![],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImperfectStats<T> {
    /// Share of cases with at least one unknown factor.
    pub ratio: T,
    /// Mean number of unknown factors per case.
    pub avg_factors: T,
}

pub fn imperfect_stats<T: Scalar>(verdicts: &[&Verdict]) -> Result<ImperfectStats<T>, EngineError> {
    imperfect_stats_from_counts(&verdicts.iter().map(|v| v.unknown_factors.len()).collect::<Vec<_>>())
}

pub fn imperfect_stats_from_counts<T: Scalar>(counts: &[usize]) -> Result<ImperfectStats<T>, EngineError> {
    if counts.is_empty() {
        return Err(EngineError::NoVerdicts);
    }
    let imperfect = counts.iter().filter(|&&c| c > 0).count();
    let total: usize = counts.iter().sum();
    Ok(ImperfectStats { ratio: T::ratio(imperfect, counts.len()), avg_factors: T::ratio(total, counts.len()) })
}
