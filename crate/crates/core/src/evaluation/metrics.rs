//! Accuracy, macro-F1, agreement statistics and imperfect-context breakdowns.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{imperfect_stats_from_counts, FactorRef, Verdict};
use crate::label::Label;
use crate::regulation::ProvisionId;
use crate::scalar::Scalar;
use crate::structured::ParseFailure;

use super::dataset::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("no prediction for case {0}")]
    MissingPrediction(String),
    #[error("case {0} predicted more than once")]
    DuplicatePrediction(String),
    #[error("prediction for unknown case {0}")]
    UnknownCase(String),
    #[error("case {0} has no ground truth")]
    Unlabelled(String),
    #[error("nothing to score")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KappaError {
    #[error("rater vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no ratings")]
    Empty,
    #[error("at least two raters are required")]
    TooFewRaters,
    #[error("subject {subject} has {found} ratings, expected {expected}")]
    RaggedRow { subject: usize, found: usize, expected: usize },
    #[error("subject {subject} is missing the rating of rater {rater}")]
    MissingCell { subject: usize, rater: usize },
}

/// Confusion counts with truth in rows and prediction in columns, both in
/// [`Label::ALL`] order. Parse failures sit in a per-truth bucket of their own.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub matrix: [[usize; 3]; 3],
    pub failures: [usize; 3],
}

impl Confusion {
    pub fn from_matrix(matrix: [[usize; 3]; 3]) -> Self {
        Self { matrix, failures: [0; 3] }
    }

    pub fn record(&mut self, truth: Label, predicted: Option<Label>) {
        match predicted {
            Some(p) => self.matrix[truth.index()][p.index()] += 1,
            None => self.failures[truth.index()] += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.matrix.iter().flatten().sum::<usize>() + self.failures.iter().sum::<usize>()
    }

    pub fn correct(&self) -> usize {
        (0..3).map(|i| self.matrix[i][i]).sum()
    }

    pub fn support(&self, class: Label) -> usize {
        let i = class.index();
        self.matrix[i].iter().sum::<usize>() + self.failures[i]
    }

    pub fn parse_failures(&self) -> usize {
        self.failures.iter().sum()
    }

    pub fn accuracy<T: Scalar>(&self) -> Option<T> {
        let n = self.total();
        (n > 0).then(|| T::ratio(self.correct(), n))
    }

    /// F1 of one class, or `None` when the class is neither present nor predicted.
    pub fn class_f1<T: Scalar>(&self, class: Label) -> Option<T> {
        let c = class.index();
        let tp = self.matrix[c][c];
        let fp: usize = (0..3).filter(|&r| r != c).map(|r| self.matrix[r][c]).sum();
        let fn_ = self.support(class) - tp;
        let den = 2 * tp + fp + fn_;
        (den > 0).then(|| T::ratio(2 * tp, den))
    }

    /// Unweighted mean of the defined per-class F1 values.
    pub fn macro_f1<T: Scalar>(&self) -> Option<T> {
        let defined: Vec<T> = Label::ALL.iter().filter_map(|&l| self.class_f1(l)).collect();
        if defined.is_empty() {
            return None;
        }
        let sum = defined.iter().fold(T::zero(), |a, &b| a + b);
        Some(sum / T::from_count(defined.len()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("truth\\predicted,permitted,prohibited,not_applicable,parse_failure\n");
        for l in Label::ALL {
            let r = &self.matrix[l.index()];
            out.push_str(&format!("{},{},{},{},{}\n", l, r[0], r[1], r[2], self.failures[l.index()]));
        }
        out
    }
}

/// Prediction for one case: a verdict or the parse failure that prevented one.
pub type Prediction = Result<Verdict, ParseFailure>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleGroup {
    pub name: String,
    pub articles: Vec<ProvisionId>,
}

impl ArticleGroup {
    pub fn new(name: impl Into<String>, articles: &[&str]) -> Self {
        Self {
            name: name.into(),
            articles: articles.iter().map(|a| a.parse().expect("valid article id")).collect(),
        }
    }

    pub fn covers(&self, id: &ProvisionId) -> bool {
        self.articles.iter().any(|a| id.is_within(a))
    }
}

/// The article groups reported for GDPR runs.
pub fn default_gdpr_groups() -> Vec<ArticleGroup> {
    vec![
        ArticleGroup::new("Article 5: Principles", &["Article 5"]),
        ArticleGroup::new("Article 6: Lawfulness", &["Article 6"]),
        ArticleGroup::new("Article 40,42: Obligations", &["Article 40", "Article 42"]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleBreakdown<T> {
    pub group: String,
    pub correct_cases: usize,
    pub wrong_cases: usize,
    /// Share of correct predictions carrying an unknown factor in the group.
    pub correct_ratio: Option<T>,
    pub wrong_ratio: Option<T>,
    /// `wrong_ratio - correct_ratio`.
    pub delta: Option<T>,
}

fn references(v: &Verdict, group: &ArticleGroup) -> bool {
    v.chunk_trace.iter().flat_map(|c| c.assessed.iter()).any(|p| group.covers(p)) || has_factor(v, group)
}

fn has_factor(v: &Verdict, group: &ArticleGroup) -> bool {
    v.unknown_factors.iter().any(|f| matches!(&f.factor, FactorRef::Provision(p) if group.covers(p)))
}

/// Imperfect ratio among correct and among wrong predictions per article group.
///
/// Only verdicts that assessed or flagged a provision of the group count
/// towards its denominators; a side with no such verdicts has no ratio.
pub fn article_breakdown<T: Scalar>(verdicts: &[(&Verdict, bool)], groups: &[ArticleGroup]) -> Vec<ArticleBreakdown<T>> {
    groups
        .iter()
        .map(|g| {
            let side = |correct: bool| {
                let relevant: Vec<&Verdict> =
                    verdicts.iter().filter(|(v, c)| *c == correct && references(v, g)).map(|(v, _)| *v).collect();
                let hits = relevant.iter().filter(|v| has_factor(v, g)).count();
                (relevant.len(), (!relevant.is_empty()).then(|| T::ratio(hits, relevant.len())))
            };
            let (correct_cases, correct_ratio) = side(true);
            let (wrong_cases, wrong_ratio) = side(false);
            let delta = match (correct_ratio, wrong_ratio) {
                (Some(c), Some(w)) => Some(w - c),
                _ => None,
            };
            ArticleBreakdown { group: g.name.clone(), correct_cases, wrong_cases, correct_ratio, wrong_ratio, delta }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T> {
    pub cases: usize,
    pub accuracy: T,
    pub macro_f1: T,
    /// `None` for a class neither present nor predicted.
    pub per_class_f1: BTreeMap<Label, Option<T>>,
    pub confusion: Confusion,
    pub parse_failures: usize,
    /// Over cases that produced a verdict; `None` if none did.
    pub imperfect_ratio: Option<T>,
    pub avg_factors: Option<T>,
    pub article_breakdown: Vec<ArticleBreakdown<T>>,
}

/// Scores predictions against the dataset. Parse failures count as wrong.
pub fn score<T: Scalar>(
    predictions: &[(String, Prediction)],
    dataset: &Dataset,
    groups: &[ArticleGroup],
) -> Result<MetricsReport<T>, ScoreError> {
    let truth: HashMap<&str, Option<Label>> =
        dataset.cases.iter().map(|c| (c.case_id.as_str(), c.ground_truth)).collect();
    let mut seen = HashSet::new();
    for (id, _) in predictions {
        if !truth.contains_key(id.as_str()) {
            return Err(ScoreError::UnknownCase(id.clone()));
        }
        if !seen.insert(id.as_str()) {
            return Err(ScoreError::DuplicatePrediction(id.clone()));
        }
    }
    if let Some(c) = dataset.cases.iter().find(|c| !seen.contains(c.case_id.as_str())) {
        return Err(ScoreError::MissingPrediction(c.case_id.clone()));
    }
    if predictions.is_empty() {
        return Err(ScoreError::Empty);
    }

    let mut confusion = Confusion::default();
    let mut judged: Vec<(&Verdict, bool)> = Vec::new();
    for (id, p) in predictions {
        let t = truth[id.as_str()].ok_or_else(|| ScoreError::Unlabelled(id.clone()))?;
        match p {
            Ok(v) => {
                confusion.record(t, Some(v.label));
                judged.push((v, v.label == t));
            }
            Err(_) => confusion.record(t, None),
        }
    }
    let counts: Vec<usize> = judged.iter().map(|(v, _)| v.unknown_factors.len()).collect();
    let stats = imperfect_stats_from_counts::<T>(&counts).ok();
    Ok(MetricsReport {
        cases: confusion.total(),
        accuracy: confusion.accuracy().expect("non-empty"),
        macro_f1: confusion.macro_f1().expect("non-empty"),
        per_class_f1: Label::ALL.iter().map(|&l| (l, confusion.class_f1(l))).collect(),
        parse_failures: confusion.parse_failures(),
        imperfect_ratio: stats.map(|s| s.ratio),
        avg_factors: stats.map(|s| s.avg_factors),
        article_breakdown: article_breakdown(&judged, groups),
        confusion,
    })
}

fn kappa_from<T: Scalar>(po: T, pe: T) -> T {
    if pe == T::one() {
        T::one()
    } else {
        (po - pe) / (T::one() - pe)
    }
}

/// Cohen's κ between two raters. Perfect agreement on a single category,
/// where the formula is 0/0, is defined as 1.
pub fn cohen_kappa<T: Scalar, C: Eq + Hash>(rater_a: &[C], rater_b: &[C]) -> Result<T, KappaError> {
    if rater_a.len() != rater_b.len() {
        return Err(KappaError::LengthMismatch(rater_a.len(), rater_b.len()));
    }
    let n = rater_a.len();
    if n == 0 {
        return Err(KappaError::Empty);
    }
    let agree = rater_a.iter().zip(rater_b).filter(|(a, b)| a == b).count();
    let mut count_a: HashMap<&C, usize> = HashMap::new();
    let mut count_b: HashMap<&C, usize> = HashMap::new();
    for (a, b) in rater_a.iter().zip(rater_b) {
        *count_a.entry(a).or_default() += 1;
        *count_b.entry(b).or_default() += 1;
    }
    let chance: usize = count_a.iter().map(|(c, na)| na * count_b.get(c).copied().unwrap_or(0)).sum();
    Ok(kappa_from(T::ratio(agree, n), T::ratio(chance, n * n)))
}

/// Fleiss' κ over a subjects × raters matrix. `None` cells are errors.
pub fn fleiss_kappa<T: Scalar, C: Eq + Hash + Clone>(ratings: &[Vec<Option<C>>]) -> Result<T, KappaError> {
    let subjects = ratings.len();
    if subjects == 0 {
        return Err(KappaError::Empty);
    }
    let raters = ratings[0].len();
    if raters < 2 {
        return Err(KappaError::TooFewRaters);
    }
    let mut totals: HashMap<C, usize> = HashMap::new();
    let mut agreement_sum = T::zero();
    for (i, row) in ratings.iter().enumerate() {
        if row.len() != raters {
            return Err(KappaError::RaggedRow { subject: i, found: row.len(), expected: raters });
        }
        let mut counts: HashMap<&C, usize> = HashMap::new();
        for (j, cell) in row.iter().enumerate() {
            let c = cell.as_ref().ok_or(KappaError::MissingCell { subject: i, rater: j })?;
            *counts.entry(c).or_default() += 1;
        }
        let sq: usize = counts.values().map(|k| k * k).sum();
        agreement_sum = agreement_sum + T::ratio(sq - raters, raters * (raters - 1));
        for (c, k) in counts {
            *totals.entry(c.clone()).or_default() += k;
        }
    }
    let p_bar = agreement_sum / T::from_count(subjects);
    let cells = subjects * raters;
    let pe = totals.values().fold(T::zero(), |acc, &k| {
        let p = T::ratio(k, cells);
        acc + p * p
    });
    Ok(kappa_from(p_bar, pe))
}
