use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::record::CompletionRecord;

/// A completion tagged with where it was spent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedRecord {
    pub dataset: String,
    pub method: String,
    pub case_id: String,
    pub record: CompletionRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageRow {
    pub dataset: String,
    pub model: String,
    pub method: String,
    pub calls: usize,
    pub cases: usize,
    pub total_input_tokens: u64,
    pub total_output_tokens: u64,
    /// Per call.
    pub mean_input_tokens: f64,
    pub mean_output_tokens: f64,
    /// Per case, summing every call the case needed.
    pub mean_input_per_case: f64,
    pub mean_output_per_case: f64,
    /// Calls whose counts were approximated locally.
    pub estimated_calls: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UsageReport {
    pub rows: Vec<UsageRow>,
    pub total_calls: usize,
    pub total_input_tokens: u64,
    pub total_output_tokens: u64,
    pub mean_input_tokens: f64,
    pub mean_output_tokens: f64,
}

fn mean(total: u64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        total as f64 / n as f64
    }
}

/// Groups records by (dataset, model, method). Rows come out sorted by key.
pub fn usage_report(records: &[TaggedRecord]) -> UsageReport {
    let mut groups: BTreeMap<(&str, &str, &str), Vec<&TaggedRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.dataset, &r.record.model, &r.method)).or_default().push(r);
    }
    let rows = groups
        .into_iter()
        .map(|((dataset, model, method), rs)| {
            let input: u64 = rs.iter().map(|r| r.record.input_tokens).sum();
            let output: u64 = rs.iter().map(|r| r.record.output_tokens).sum();
            let cases = rs.iter().map(|r| r.case_id.as_str()).collect::<BTreeSet<_>>().len();
            UsageRow {
                dataset: dataset.into(),
                model: model.into(),
                method: method.into(),
                calls: rs.len(),
                cases,
                total_input_tokens: input,
                total_output_tokens: output,
                mean_input_tokens: mean(input, rs.len()),
                mean_output_tokens: mean(output, rs.len()),
                mean_input_per_case: mean(input, cases),
                mean_output_per_case: mean(output, cases),
                estimated_calls: rs.iter().filter(|r| r.record.estimated).count(),
            }
        })
        .collect();
    let total_input: u64 = records.iter().map(|r| r.record.input_tokens).sum();
    let total_output: u64 = records.iter().map(|r| r.record.output_tokens).sum();
    UsageReport {
        rows,
        total_calls: records.len(),
        total_input_tokens: total_input,
        total_output_tokens: total_output,
        mean_input_tokens: mean(total_input, records.len()),
        mean_output_tokens: mean(total_output, records.len()),
    }
}
