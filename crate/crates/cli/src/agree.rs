use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use compliance_core::evaluation::{cohen_kappa, fleiss_kappa};
use serde::Serialize;

use crate::error::CliError;
use crate::run::read_verdicts;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairKappa {
    pub a: String,
    pub b: String,
    pub cohen_kappa: f64,
    pub cohen_kappa_x100: f64,
}

/// Inter-run agreement over the cases every file covers. Parse failures
/// count as their own category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub files: Vec<String>,
    pub cases: usize,
    pub pairwise: Vec<PairKappa>,
    pub fleiss_kappa: f64,
    pub fleiss_kappa_x100: f64,
}

pub fn cmd_agree(paths: &[PathBuf]) -> Result<AgreementReport, CliError> {
    if paths.len() < 2 {
        return Err(CliError::Config("agreement needs at least two verdict files".into()));
    }
    let mut tables: Vec<BTreeMap<String, String>> = Vec::new();
    for p in paths {
        let lines = read_verdicts(p)?;
        tables.push(
            lines
                .into_iter()
                .map(|l| {
                    let cat = l.label().map_or_else(|| "parse_failure".to_string(), |x| x.as_str().to_string());
                    (l.case_id, cat)
                })
                .collect(),
        );
    }
    let common: BTreeSet<&String> =
        tables[0].keys().filter(|k| tables[1..].iter().all(|t| t.contains_key(*k))).collect();
    if common.is_empty() {
        return Err(CliError::Config("the verdict files share no case ids".into()));
    }
    let column = |t: &BTreeMap<String, String>| -> Vec<String> { common.iter().map(|k| t[*k].clone()).collect() };
    let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    let mut pairwise = Vec::new();
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            let k: f64 = cohen_kappa(&column(&tables[i]), &column(&tables[j])).map_err(CliError::config)?;
            pairwise.push(PairKappa { a: names[i].clone(), b: names[j].clone(), cohen_kappa: k, cohen_kappa_x100: k * 100.0 });
        }
    }
    let rows: Vec<Vec<Option<String>>> =
        common.iter().map(|k| tables.iter().map(|t| Some(t[*k].clone())).collect()).collect();
    let fleiss: f64 = fleiss_kappa(&rows).map_err(CliError::config)?;
    Ok(AgreementReport { files: names, cases: common.len(), pairwise, fleiss_kappa: fleiss, fleiss_kappa_x100: fleiss * 100.0 })
}
