use std::collections::BTreeSet;

use compliance_core::engine::assess_aiact;
use compliance_core::graph::{AnswerMap, DecisionGraph, QuestionNode, TraversalResult};
use compliance_core::Verdict;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("question {question} is not awaiting an answer")]
    StaleQuestion { question: String },
    #[error("question {question} has no option {index}")]
    InvalidOption { question: String, index: u32 },
    #[error("select at least one option for question {question}")]
    EmptySelection { question: String },
    #[error("session is already complete")]
    Complete,
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("history does not replay: {0}")]
    Replay(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub question_id: String,
    pub selected: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    InProgress,
    Complete,
}

/// Stored session state. Everything but `history` is derived from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WizardSession {
    pub session_id: String,
    pub graph_version: String,
    pub history: Vec<HistoryEntry>,
    pub frontier: Vec<String>,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionPayload {
    pub index: u32,
    pub label: String,
    pub none_of_the_above: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionPayload {
    pub id: String,
    pub text: String,
    pub background: Option<String>,
    pub options: Vec<OptionPayload>,
    pub has_nota: bool,
    pub multi_select: bool,
}

impl QuestionPayload {
    pub fn from_node(q: &QuestionNode) -> Self {
        Self {
            id: q.id.clone(),
            text: q.text.clone(),
            background: q.background.clone(),
            options: q
                .options
                .iter()
                .map(|o| OptionPayload {
                    index: o.index,
                    label: o.label.clone(),
                    none_of_the_above: q.nota_index == Some(o.index),
                })
                .collect(),
            has_nota: q.has_nota(),
            multi_select: true,
        }
    }
}

/// What every endpoint returns for a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub graph_version: String,
    pub status: SessionStatus,
    pub history: Vec<HistoryEntry>,
    pub frontier: Vec<String>,
    /// The next question to ask: the first frontier entry.
    pub question: Option<QuestionPayload>,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub version: String,
    pub root: String,
    pub question_count: usize,
    pub nota_question_count: usize,
    pub leaf_count: usize,
    pub questions: Vec<String>,
}

impl GraphMeta {
    pub fn of(graph: &DecisionGraph) -> Self {
        Self {
            version: graph.version.clone(),
            root: graph.root.clone(),
            question_count: graph.questions().len(),
            nota_question_count: graph.questions().iter().filter(|q| q.has_nota()).count(),
            leaf_count: graph.leaves().len(),
            questions: graph.questions().iter().map(|q| q.id.clone()).collect(),
        }
    }
}

pub fn answer_map(history: &[HistoryEntry]) -> Result<AnswerMap, SessionError> {
    let mut map = AnswerMap::new();
    for h in history {
        map.insert(h.question_id.clone(), h.selected.clone()).map_err(|e| SessionError::Replay(e.to_string()))?;
    }
    Ok(map)
}

fn replay(graph: &DecisionGraph, history: &[HistoryEntry]) -> Result<TraversalResult, SessionError> {
    graph.traverse(&answer_map(history)?).map_err(|e| SessionError::Replay(e.to_string()))
}

impl WizardSession {
    pub fn new(session_id: String, graph: &DecisionGraph) -> Self {
        let mut s = Self {
            session_id,
            graph_version: graph.version.clone(),
            history: vec![],
            frontier: vec![],
            status: SessionStatus::InProgress,
        };
        s.refresh(graph).expect("empty history always replays");
        s
    }

    /// Rebuilds a session from a stored history, e.g. a snapshot.
    pub fn restore(
        session_id: String,
        graph: &DecisionGraph,
        history: Vec<HistoryEntry>,
    ) -> Result<Self, SessionError> {
        let mut s = Self::new(session_id, graph);
        s.history = history;
        s.refresh(graph)?;
        Ok(s)
    }

    fn refresh(&mut self, graph: &DecisionGraph) -> Result<TraversalResult, SessionError> {
        let t = replay(graph, &self.history)?;
        self.frontier = t.unanswered.clone();
        self.status = if t.is_complete() { SessionStatus::Complete } else { SessionStatus::InProgress };
        Ok(t)
    }

    pub fn answer(&mut self, graph: &DecisionGraph, question_id: &str, selected: &[u32]) -> Result<(), SessionError> {
        if self.status == SessionStatus::Complete {
            return Err(SessionError::Complete);
        }
        if !self.frontier.iter().any(|f| f == question_id) {
            return Err(SessionError::StaleQuestion { question: question_id.to_string() });
        }
        if selected.is_empty() {
            return Err(SessionError::EmptySelection { question: question_id.to_string() });
        }
        let q = graph.question(question_id).ok_or_else(|| SessionError::StaleQuestion { question: question_id.into() })?;
        if let Some(&bad) = selected.iter().find(|&&i| q.option(i).is_none()) {
            return Err(SessionError::InvalidOption { question: question_id.to_string(), index: bad });
        }
        let selected: Vec<u32> = selected.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        self.history.push(HistoryEntry { question_id: question_id.to_string(), selected });
        if let Err(e) = self.refresh(graph) {
            self.history.pop();
            self.refresh(graph)?;
            return Err(e);
        }
        Ok(())
    }

    pub fn undo(&mut self, graph: &DecisionGraph) -> Result<(), SessionError> {
        let popped = self.history.pop().ok_or(SessionError::NothingToUndo)?;
        if let Err(e) = self.refresh(graph) {
            self.history.push(popped);
            return Err(e);
        }
        Ok(())
    }

    pub fn view(&self, graph: &DecisionGraph) -> Result<SessionView, SessionError> {
        let t = replay(graph, &self.history)?;
        let verdict = t.is_complete().then(|| assess_aiact(&t, graph));
        Ok(SessionView {
            session_id: self.session_id.clone(),
            graph_version: self.graph_version.clone(),
            status: self.status,
            history: self.history.clone(),
            frontier: self.frontier.clone(),
            question: self.frontier.first().and_then(|id| graph.question(id)).map(QuestionPayload::from_node),
            verdict,
        })
    }
}
