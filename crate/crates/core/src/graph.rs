//! Decision multigraph for the EU AI Act compliance checker.
//!
//! Questions are internal nodes, options are edges (several options may lead
//! to the same successor), and leaves are compliance outcomes citing the
//! provisions they rest on. Answers are multi-select, so a traversal can
//! fan out and reach several leaves at once.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::Label;
use crate::regulation::ProvisionId;

/// The EU AI Act checker graph shipped with the crate.
pub const AI_ACT_GRAPH_JSON: &str = include_str!("../data/aiact_graph.json");

/// Default guard for [`DecisionGraph::enumerate_paths`].
pub const DEFAULT_PATH_LIMIT: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("failed to read graph {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("graph schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid successor reference {0:?}: expected \"q:<id>\" or \"leaf:<id>\"")]
    BadReference(String),
    #[error("path enumeration exceeded the limit of {0} paths")]
    PathLimit(usize),
    #[error("graph is invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraversalError {
    #[error("question {question} has no option {index}")]
    InvalidOption { question: String, index: u32 },
    #[error("question {question} has an empty selection")]
    EmptySelection { question: String },
    #[error("answer given for unknown question {0}")]
    UnknownQuestion(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Successor {
    Question(String),
    Leaf(String),
}

impl fmt::Display for Successor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Successor::Question(q) => write!(f, "q:{q}"),
            Successor::Leaf(l) => write!(f, "leaf:{l}"),
        }
    }
}

impl std::str::FromStr for Successor {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::BadReference(s.to_string());
        if let Some(q) = s.strip_prefix("q:") {
            (!q.is_empty()).then(|| Successor::Question(q.into())).ok_or_else(bad)
        } else if let Some(l) = s.strip_prefix("leaf:") {
            (!l.is_empty()).then(|| Successor::Leaf(l.into())).ok_or_else(bad)
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Successor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Successor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionEdge {
    pub index: u32,
    pub label: String,
    #[serde(rename = "next")]
    pub successor: Successor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionNode {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nota_index: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub options: Vec<OptionEdge>,
}

impl QuestionNode {
    pub fn option(&self, index: u32) -> Option<&OptionEdge> {
        self.options.iter().find(|o| o.index == index)
    }

    pub fn has_nota(&self) -> bool {
        self.nota_index.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeCategory {
    ProhibitedPractice,
    HighRiskObligations,
    TransparencyObligations,
    OutOfScope,
    MinimalRisk,
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeLeaf {
    pub id: String,
    pub category: OutcomeCategory,
    pub label_mapping: Label,
    pub cited_provisions: Vec<ProvisionId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphRecord {
    #[serde(default = "default_version")]
    version: String,
    root: String,
    questions: Vec<QuestionNode>,
    leaves: Vec<OutcomeLeaf>,
}

fn default_version() -> String {
    "unversioned".into()
}

/// A structurally loaded graph. Run [`DecisionGraph::validate`] before traversal.
#[derive(Debug, Clone)]
pub struct DecisionGraph {
    pub version: String,
    pub root: String,
    questions: Vec<QuestionNode>,
    leaves: Vec<OutcomeLeaf>,
    question_index: HashMap<String, usize>,
    leaf_index: HashMap<String, usize>,
}

impl PartialEq for DecisionGraph {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version
            && self.root == other.root
            && self.questions == other.questions
            && self.leaves == other.leaves
    }
}

impl DecisionGraph {
    pub fn new(
        version: impl Into<String>,
        root: impl Into<String>,
        questions: Vec<QuestionNode>,
        leaves: Vec<OutcomeLeaf>,
    ) -> Self {
        let question_index = questions.iter().enumerate().map(|(i, q)| (q.id.clone(), i)).collect();
        let leaf_index = leaves.iter().enumerate().map(|(i, l)| (l.id.clone(), i)).collect();
        Self { version: version.into(), root: root.into(), questions, leaves, question_index, leaf_index }
    }

    /// The shipped EU AI Act checker graph.
    pub fn ai_act() -> Self {
        Self::from_json(AI_ACT_GRAPH_JSON).expect("shipped AI Act graph parses")
    }

    pub fn from_json(json: &str) -> Result<Self, GraphError> {
        let r: GraphRecord = serde_json::from_str(json)?;
        Ok(Self::new(r.version, r.root, r.questions, r.leaves))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| GraphError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let r = GraphRecord {
            version: self.version.clone(),
            root: self.root.clone(),
            questions: self.questions.clone(),
            leaves: self.leaves.clone(),
        };
        serde_json::to_string_pretty(&r).expect("graph serializes")
    }

    pub fn questions(&self) -> &[QuestionNode] {
        &self.questions
    }

    pub fn leaves(&self) -> &[OutcomeLeaf] {
        &self.leaves
    }

    pub fn question(&self, id: &str) -> Option<&QuestionNode> {
        self.question_index.get(id).map(|&i| &self.questions[i])
    }

    pub fn leaf(&self, id: &str) -> Option<&OutcomeLeaf> {
        self.leaf_index.get(id).map(|&i| &self.leaves[i])
    }

    fn resolves(&self, s: &Successor) -> bool {
        match s {
            Successor::Question(q) => self.question_index.contains_key(q),
            Successor::Leaf(l) => self.leaf_index.contains_key(l),
        }
    }

    /// Reports every structural problem; an empty report means the graph is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        if self.question(&self.root).is_none() {
            v.push(Violation::MissingRoot(self.root.clone()));
        }
        let mut seen = HashSet::new();
        for q in &self.questions {
            if !seen.insert(q.id.as_str()) {
                v.push(Violation::DuplicateQuestion(q.id.clone()));
            }
        }
        let mut seen = HashSet::new();
        for l in &self.leaves {
            if !seen.insert(l.id.as_str()) {
                v.push(Violation::DuplicateLeaf(l.id.clone()));
            }
            let exempt = matches!(l.category, OutcomeCategory::OutOfScope | OutcomeCategory::MinimalRisk);
            if l.cited_provisions.is_empty() && !exempt {
                v.push(Violation::MissingCitations(l.id.clone()));
            }
        }
        for q in &self.questions {
            if q.options.len() < 2 {
                v.push(Violation::TooFewOptions(q.id.clone()));
            }
            let mut indices: Vec<u32> = q.options.iter().map(|o| o.index).collect();
            indices.sort_unstable();
            for w in indices.windows(2) {
                if w[0] == w[1] {
                    v.push(Violation::DuplicateOptionIndex { question: q.id.clone(), index: w[0] });
                }
            }
            indices.dedup();
            if indices.iter().enumerate().any(|(i, &idx)| idx as usize != i + 1) {
                v.push(Violation::NonContiguousOptions(q.id.clone()));
            }
            if let Some(n) = q.nota_index {
                if q.option(n).is_none() {
                    v.push(Violation::InvalidNota { question: q.id.clone(), index: n });
                }
            }
            for o in &q.options {
                if !self.resolves(&o.successor) {
                    v.push(Violation::DanglingSuccessor {
                        question: q.id.clone(),
                        index: o.index,
                        target: o.successor.to_string(),
                    });
                }
            }
        }
        v.extend(self.find_cycles());

        let (reach_q, reach_l) = self.reachable();
        for q in &self.questions {
            if !reach_q.contains(q.id.as_str()) {
                v.push(Violation::UnreachableQuestion(q.id.clone()));
            }
        }
        for l in &self.leaves {
            if !reach_l.contains(l.id.as_str()) {
                v.push(Violation::UnreachableLeaf(l.id.clone()));
            }
        }
        ValidationReport { violations: v }
    }

    fn reachable(&self) -> (HashSet<&str>, HashSet<&str>) {
        let mut qs = HashSet::new();
        let mut ls = HashSet::new();
        let mut queue = VecDeque::new();
        if let Some(root) = self.question(&self.root) {
            qs.insert(root.id.as_str());
            queue.push_back(root);
        }
        while let Some(q) = queue.pop_front() {
            for o in &q.options {
                match &o.successor {
                    Successor::Question(id) => {
                        if let Some(next) = self.question(id) {
                            if qs.insert(next.id.as_str()) {
                                queue.push_back(next);
                            }
                        }
                    }
                    Successor::Leaf(id) => {
                        if let Some(l) = self.leaf(id) {
                            ls.insert(l.id.as_str());
                        }
                    }
                }
            }
        }
        (qs, ls)
    }

    fn find_cycles(&self) -> Vec<Violation> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        fn visit(
            g: &DecisionGraph,
            i: usize,
            marks: &mut [Mark],
            stack: &mut Vec<usize>,
            out: &mut Vec<Violation>,
        ) {
            marks[i] = Mark::Active;
            stack.push(i);
            for o in &g.questions[i].options {
                let Successor::Question(next) = &o.successor else { continue };
                let Some(&j) = g.question_index.get(next) else { continue };
                match marks[j] {
                    Mark::New => visit(g, j, marks, stack, out),
                    Mark::Active => {
                        let start = stack.iter().position(|&k| k == j).unwrap_or(0);
                        let mut path: Vec<String> =
                            stack[start..].iter().map(|&k| g.questions[k].id.clone()).collect();
                        path.push(g.questions[j].id.clone());
                        out.push(Violation::Cycle(path));
                    }
                    Mark::Done => {}
                }
            }
            stack.pop();
            marks[i] = Mark::Done;
        }
        let mut marks = vec![Mark::New; self.questions.len()];
        let mut out = Vec::new();
        let mut order: Vec<usize> = self.question_index.get(&self.root).copied().into_iter().collect();
        order.extend(0..self.questions.len());
        for i in order {
            if marks[i] == Mark::New {
                visit(self, i, &mut marks, &mut Vec::new(), &mut out);
            }
        }
        out
    }

    /// Breadth-first expansion from the root following every selected option.
    ///
    /// Questions are visited once, in BFS order with ascending option index as
    /// tiebreak. A visited question without an answer is recorded as
    /// unanswered and its subtree is not expanded. Answers to questions that
    /// are never visited are ignored.
    pub fn traverse(&self, answers: &AnswerMap) -> Result<TraversalResult, TraversalError> {
        for q in answers.entries.keys() {
            if self.question(q).is_none() {
                return Err(TraversalError::UnknownQuestion(q.clone()));
            }
        }
        let mut result = TraversalResult::default();
        let mut seen: HashSet<&str> = HashSet::new();
        let mut queue = VecDeque::new();
        if let Some(root) = self.question(&self.root) {
            seen.insert(&root.id);
            queue.push_back(root);
        }
        while let Some(q) = queue.pop_front() {
            result.visited_questions.push(q.id.clone());
            let Some(selected) = answers.get(&q.id) else {
                result.unanswered.push(q.id.clone());
                continue;
            };
            if selected.is_empty() {
                return Err(TraversalError::EmptySelection { question: q.id.clone() });
            }
            let mut sorted = selected.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            for index in sorted {
                let edge = q.option(index).ok_or_else(|| TraversalError::InvalidOption {
                    question: q.id.clone(),
                    index,
                })?;
                if q.nota_index == Some(index) && !result.nota_hits.contains(&q.id) {
                    result.nota_hits.push(q.id.clone());
                }
                match &edge.successor {
                    Successor::Question(next) => {
                        if let Some(nq) = self.question(next) {
                            if seen.insert(&nq.id) {
                                queue.push_back(nq);
                            }
                        }
                    }
                    Successor::Leaf(l) => {
                        if !result.reached_leaves.contains(l) {
                            result.reached_leaves.push(l.clone());
                        }
                    }
                }
            }
        }
        Ok(result)
    }

    /// Every root-to-leaf path with the single-option answers that produce it.
    pub fn enumerate_paths(&self, limit: usize) -> Result<Vec<PathAssignment>, GraphError> {
        let report = self.validate();
        if !report.is_clean() {
            return Err(GraphError::Invalid(report.to_string()));
        }
        let mut out = Vec::new();
        let mut trail = Vec::new();
        self.walk(&self.root, &mut trail, &mut out, limit)?;
        Ok(out)
    }

    fn walk(
        &self,
        qid: &str,
        trail: &mut Vec<(String, u32)>,
        out: &mut Vec<PathAssignment>,
        limit: usize,
    ) -> Result<(), GraphError> {
        let q = self.question(qid).expect("validated");
        for o in &q.options {
            trail.push((q.id.clone(), o.index));
            match &o.successor {
                Successor::Question(next) => self.walk(next, trail, out, limit)?,
                Successor::Leaf(l) => {
                    if out.len() >= limit {
                        return Err(GraphError::PathLimit(limit));
                    }
                    let mut answers = AnswerMap::default();
                    for (qid, idx) in trail.iter() {
                        answers.entries.insert(qid.clone(), vec![*idx]);
                    }
                    out.push(PathAssignment { answers, leaf: l.clone() });
                }
            }
            trail.pop();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathAssignment {
    pub answers: AnswerMap,
    pub leaf: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingRoot(String),
    DuplicateQuestion(String),
    DuplicateLeaf(String),
    TooFewOptions(String),
    DuplicateOptionIndex { question: String, index: u32 },
    NonContiguousOptions(String),
    InvalidNota { question: String, index: u32 },
    DanglingSuccessor { question: String, index: u32, target: String },
    Cycle(Vec<String>),
    UnreachableQuestion(String),
    UnreachableLeaf(String),
    MissingCitations(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingRoot(r) => write!(f, "root question {r} does not exist"),
            Violation::DuplicateQuestion(q) => write!(f, "duplicate question id {q}"),
            Violation::DuplicateLeaf(l) => write!(f, "duplicate leaf id {l}"),
            Violation::TooFewOptions(q) => write!(f, "question {q} has fewer than 2 options"),
            Violation::DuplicateOptionIndex { question, index } => {
                write!(f, "question {question} repeats option index {index}")
            }
            Violation::NonContiguousOptions(q) => {
                write!(f, "question {q} option indices are not 1..n")
            }
            Violation::InvalidNota { question, index } => {
                write!(f, "question {question} marks missing option {index} as none-of-the-above")
            }
            Violation::DanglingSuccessor { question, index, target } => {
                write!(f, "question {question} option {index} points at missing {target}")
            }
            Violation::Cycle(path) => write!(f, "cycle: {}", path.join(" -> ")),
            Violation::UnreachableQuestion(q) => write!(f, "question {q} is unreachable from the root"),
            Violation::UnreachableLeaf(l) => write!(f, "leaf {l} is unreachable from the root"),
            Violation::MissingCitations(l) => write!(f, "leaf {l} cites no provisions"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&lines.join("; "))
    }
}

/// Selected option indices per question. Every entry holds at least one selection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, Vec<u32>>", into = "BTreeMap<String, Vec<u32>>")]
pub struct AnswerMap {
    entries: BTreeMap<String, Vec<u32>>,
}

impl AnswerMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the selection for `question`. Empty selections are rejected.
    pub fn insert(&mut self, question: impl Into<String>, selected: Vec<u32>) -> Result<(), TraversalError> {
        let question = question.into();
        if selected.is_empty() {
            return Err(TraversalError::EmptySelection { question });
        }
        self.entries.insert(question, selected);
        Ok(())
    }

    pub fn remove(&mut self, question: &str) -> Option<Vec<u32>> {
        self.entries.remove(question)
    }

    pub fn get(&self, question: &str) -> Option<&[u32]> {
        self.entries.get(question).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<u32>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TryFrom<BTreeMap<String, Vec<u32>>> for AnswerMap {
    type Error = TraversalError;

    fn try_from(entries: BTreeMap<String, Vec<u32>>) -> Result<Self, Self::Error> {
        if let Some((q, _)) = entries.iter().find(|(_, v)| v.is_empty()) {
            return Err(TraversalError::EmptySelection { question: q.clone() });
        }
        Ok(Self { entries })
    }
}

impl From<AnswerMap> for BTreeMap<String, Vec<u32>> {
    fn from(a: AnswerMap) -> Self {
        a.entries
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraversalResult {
    /// Leaf ids in the order first reached.
    pub reached_leaves: Vec<String>,
    pub visited_questions: Vec<String>,
    pub nota_hits: Vec<String>,
    pub unanswered: Vec<String>,
}

impl TraversalResult {
    pub fn is_complete(&self) -> bool {
        self.unanswered.is_empty()
    }
}
