use std::collections::BTreeSet;
use std::path::Path;

use compliance_core::evaluation::load_dataset;
use compliance_core::evaluation::report::render_text_report;
use compliance_core::{Domain, MetricsReport};

use crate::error::CliError;
use crate::run::{read_verdicts, score_lines, CONFUSION_FILE, METRICS_FILE};

/// Scores a verdict file against a dataset and renders the text report.
/// When every verdict is from one domain, only that domain's cases are expected.
pub fn cmd_report(verdicts: &Path, dataset: &Path, out: Option<&Path>) -> Result<(String, MetricsReport), CliError> {
    let lines = read_verdicts(verdicts)?;
    if lines.is_empty() {
        return Err(CliError::Config(format!("{} contains no verdicts", verdicts.display())));
    }
    let domains: BTreeSet<&str> = lines.iter().map(|l| l.domain.as_str()).collect();
    let only = match domains.iter().collect::<Vec<_>>().as_slice() {
        [d] => Some(d.parse::<Domain>().map_err(CliError::config)?),
        _ => None,
    };
    let dataset = load_dataset(dataset, only).map_err(CliError::config)?;
    let metrics = score_lines(&lines, &dataset)?;
    let methods: BTreeSet<String> = lines.iter().map(|l| l.method.to_string()).collect();
    let title = format!(
        "{} / {} ({} cases)",
        dataset.domain,
        methods.into_iter().collect::<Vec<_>>().join("+"),
        metrics.cases
    );
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
        let json = serde_json::to_string_pretty(&metrics).expect("serializable") + "\n";
        std::fs::write(dir.join(METRICS_FILE), json).map_err(CliError::io("writing metrics"))?;
        std::fs::write(dir.join(CONFUSION_FILE), metrics.confusion.to_csv()).map_err(CliError::io("writing confusion"))?;
    }
    Ok((render_text_report(&title, &metrics), metrics))
}
