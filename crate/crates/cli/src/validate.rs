use std::path::Path;

use compliance_core::graph::{DecisionGraph, GraphError, DEFAULT_PATH_LIMIT};
use compliance_core::regulation::{ManifestError, RegulationManifest};
use serde_json::Value;

use crate::error::CliError;

/// Validates a regulation manifest or a decision graph, chosen by the
/// file's top-level keys. Returns the report printed on success.
pub fn cmd_validate(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: not valid JSON: {e}", path.display())))?;
    if value.get("questions").is_some() {
        validate_graph(&text)
    } else if value.get("chunks").is_some() {
        validate_manifest(&text)
    } else {
        Err(CliError::Config(format!("{}: neither a manifest (chunks) nor a graph (questions)", path.display())))
    }
}

fn validate_graph(text: &str) -> Result<String, CliError> {
    let graph = DecisionGraph::from_json(text).map_err(|e| match e {
        GraphError::BadReference(_) => CliError::Validation(e.to_string()),
        other => CliError::Config(other.to_string()),
    })?;
    let report = graph.validate();
    if !report.is_clean() {
        return Err(CliError::Validation(format!("graph {} is invalid:\n{report}", graph.version)));
    }
    let paths = graph.enumerate_paths(DEFAULT_PATH_LIMIT).map_err(|e| CliError::Validation(e.to_string()))?;
    let nota = graph.questions().iter().filter(|q| q.has_nota()).count();
    Ok(format!(
        "graph {}: {} questions ({} with none-of-the-above), {} leaves, {} root-to-leaf paths: OK",
        graph.version,
        graph.questions().len(),
        nota,
        graph.leaves().len(),
        paths.len()
    ))
}

fn validate_manifest(text: &str) -> Result<String, CliError> {
    let m = RegulationManifest::from_json(text).map_err(|e| match e {
        ManifestError::Schema(_) | ManifestError::Io { .. } => CliError::Config(e.to_string()),
        other => CliError::Validation(other.to_string()),
    })?;
    let provisions: usize = m.chunks.iter().map(|c| c.provisions.len()).sum();
    let mut s = format!("manifest {} {}: {} chunks, {} provisions: OK", m.name, m.version, m.chunks.len(), provisions);
    for c in m.chunks_by_precedence() {
        s.push_str(&format!("\n  {:<36} {:?} {:>3}", c.label(), c.connective, c.provisions.len()));
    }
    Ok(s)
}
