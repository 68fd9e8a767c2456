use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use compliance_core::evaluation::report::render_text_report;
use compliance_core::evaluation::{default_gdpr_groups, load_dataset, score, ArticleGroup, Dataset, Prediction};
use compliance_core::graph::DecisionGraph;
use compliance_core::regulation::{load_manifest, RegulationManifest};
use compliance_core::{Domain, MetricsReport};
use compliance_llm::{
    usage_report, BackendKind, Cache, GenerationConfig, LiveBackend, LlmClient, TaggedRecord, UsageReport,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::mock::synthetic_backend;
use crate::pipeline::{CaseOutcome, Method, Pipeline, VerdictLine};

pub const VERDICTS_FILE: &str = "verdicts.jsonl";
pub const PARTIAL_FILE: &str = "verdicts.partial.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const USAGE_FILE: &str = "usage.json";
pub const REPORT_FILE: &str = "report.txt";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const REPEATS_FILE: &str = "repeats.json";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: PathBuf,
    /// Keep only this domain's cases.
    pub domain: Option<Domain>,
    pub method: Method,
    pub backend: BackendKind,
    pub generation: GenerationConfig,
    pub out: PathBuf,
    pub concurrency: usize,
    pub repeat: usize,
    /// Required for replay; optional for mock and live.
    pub cache_dir: Option<PathBuf>,
    pub mock_seed: u64,
    pub manifest: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    /// Requests per second for the live backend; 0 for no limit.
    pub rate_limit: f64,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            domain: None,
            method: Method::ContextLens,
            backend: BackendKind::Mock,
            generation: GenerationConfig::default(),
            out: out.into(),
            concurrency: 4,
            repeat: 1,
            cache_dir: None,
            mock_seed: 0,
            manifest: None,
            graph: None,
            rate_limit: 0.0,
        }
    }

    fn check(&self) -> Result<(), CliError> {
        self.generation.validate().map_err(CliError::config)?;
        if self.repeat == 0 {
            return Err(CliError::Config("--repeat must be at least 1".into()));
        }
        if self.concurrency == 0 {
            return Err(CliError::Config("--concurrency must be at least 1".into()));
        }
        if self.backend == BackendKind::Replay {
            match &self.cache_dir {
                None => return Err(CliError::Config("the replay backend needs --cache-dir".into())),
                Some(d) if !d.is_dir() => {
                    return Err(CliError::Config(format!("cache directory {} does not exist", d.display())))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    fn client(&self, manifest: &RegulationManifest) -> Result<LlmClient, CliError> {
        let cache = |dir: &Path| Cache::create(dir).map_err(CliError::io(format!("cache {}", dir.display())));
        let client = match self.backend {
            BackendKind::Replay => {
                let dir = self.cache_dir.as_deref().expect("checked");
                LlmClient::replay(Cache::open_existing(dir).map_err(CliError::io("cache"))?)
            }
            BackendKind::Mock => {
                LlmClient::mock(
                synthetic_backend(self.mock_seed, manifest),
                self.cache_dir.as_deref().map(cache).transpose()?,
            )
            }
            BackendKind::Live => {
                let backend = LiveBackend::from_env().map_err(CliError::config)?;
                LlmClient::live(backend, self.cache_dir.as_deref().map(cache).transpose()?).with_rate_limit(self.rate_limit)
            }
        };
        Ok(client.with_concurrency(self.concurrency))
    }
}

/// Artifacts of one pass over the dataset.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub metrics: MetricsReport,
    pub usage: UsageReport,
    /// Cases resumed from an interrupted run instead of being assessed again.
    pub resumed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; exactly 0 when all values are equal.
    pub sd: f64,
}

impl SeriesStats {
    pub fn of(values: Vec<f64>) -> Self {
        // Identical values short-circuit so floating-point rounding in the
        // mean cannot leak into the SD.
        if values.windows(2).all(|w| w[0] == w[1]) {
            let mean = values.first().copied().unwrap_or(0.0);
            return Self { values, mean, sd: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        Self { values, mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub repeats: usize,
    pub accuracy: SeriesStats,
    pub macro_f1: SeriesStats,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub runs: Vec<RunArtifacts>,
    pub repeats: Option<RepeatSummary>,
    pub backend_calls: u64,
    pub cache_hits: u64,
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let ctx = || format!("writing {}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::io(ctx()))?;
    tmp.write_all(contents).map_err(CliError::io(ctx()))?;
    tmp.persist(path).map_err(|e| CliError::Io { context: ctx(), source: e.error })?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Loads outcomes a previous, interrupted run already appended.
fn resume(path: &Path, dataset: &Dataset, method: Method) -> HashMap<String, CaseOutcome> {
    let Ok(text) = fs::read_to_string(path) else { return HashMap::new() };
    text.lines()
        .filter_map(|l| serde_json::from_str::<CaseOutcome>(l).ok())
        .filter(|o| o.line.method == method && dataset.get(&o.line.case_id).is_some())
        .map(|o| (o.line.case_id.clone(), o))
        .collect()
}

fn open_partial(path: &Path) -> Result<File, CliError> {
    let mut f = OpenOptions::new()
        .create(true)
        .read(true)
        .append(true)
        .open(path)
        .map_err(CliError::io(format!("opening {}", path.display())))?;
    // Terminate a line left half-written by an interrupted run.
    let len = f.metadata().map_err(CliError::io("partial file"))?.len();
    if len > 0 {
        let mut last = [0u8];
        f.seek(SeekFrom::Start(len - 1)).and_then(|_| f.read_exact(&mut last)).map_err(CliError::io("partial file"))?;
        if last[0] != b'\n' {
            f.write_all(b"\n").map_err(CliError::io("partial file"))?;
        }
    }
    Ok(f)
}

pub fn groups_for(dataset: &Dataset) -> Vec<ArticleGroup> {
    if dataset.cases.iter().any(|c| c.domain == Domain::Gdpr.as_str()) {
        default_gdpr_groups()
    } else {
        vec![]
    }
}

/// Scores verdict lines against a dataset.
pub fn score_lines(lines: &[VerdictLine], dataset: &Dataset) -> Result<MetricsReport, CliError> {
    let predictions: Vec<(String, Prediction)> = lines
        .iter()
        .map(|l| {
            let p = l.prediction().ok_or_else(|| {
                CliError::Config(format!("case {}: a verdict line needs exactly one of verdict and failure", l.case_id))
            })?;
            Ok((l.case_id.clone(), p))
        })
        .collect::<Result<_, CliError>>()?;
    score(&predictions, dataset, &groups_for(dataset)).map_err(CliError::config)
}

fn run_once(
    dir: &Path,
    pipeline: &Pipeline<'_>,
    dataset: &Dataset,
    pool: &rayon::ThreadPool,
) -> Result<RunArtifacts, CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    let partial_path = dir.join(PARTIAL_FILE);
    let done = resume(&partial_path, dataset, pipeline.method);
    let resumed = done.len();
    let partial = Mutex::new(open_partial(&partial_path)?);
    let todo: Vec<_> = dataset.cases.iter().filter(|c| !done.contains_key(&c.case_id)).collect();

    let fresh: Vec<CaseOutcome> = pool.install(|| {
        todo.par_iter()
            .map(|case| {
                let outcome = pipeline.assess_case(case).map_err(|e| CliError::Config(e.to_string()))?;
                let mut line = serde_json::to_string(&outcome).expect("serializable");
                line.push('\n');
                partial.lock().unwrap().write_all(line.as_bytes()).map_err(CliError::io("appending verdict"))?;
                Ok(outcome)
            })
            .collect::<Result<_, CliError>>()
    })?;

    let mut outcomes: Vec<CaseOutcome> = done.into_values().chain(fresh).collect();
    outcomes.sort_by(|a, b| a.line.case_id.cmp(&b.line.case_id));
    let lines: Vec<VerdictLine> = outcomes.iter().map(|o| o.line.clone()).collect();

    let mut jsonl = String::new();
    for l in &lines {
        jsonl.push_str(&serde_json::to_string(l).expect("serializable"));
        jsonl.push('\n');
    }
    let metrics = score_lines(&lines, dataset)?;
    let tagged: Vec<TaggedRecord> = outcomes
        .iter()
        .flat_map(|o| {
            o.records.iter().map(|r| TaggedRecord {
                dataset: o.line.domain.clone(),
                method: o.line.method.to_string(),
                case_id: o.line.case_id.clone(),
                record: r.clone(),
            })
        })
        .collect();
    let usage = usage_report(&tagged);
    let title = format!("{} / {} ({} cases)", dataset.domain, pipeline.method, lines.len());

    write_atomic(&dir.join(VERDICTS_FILE), jsonl.as_bytes())?;
    write_atomic(&dir.join(METRICS_FILE), &to_json(&metrics))?;
    write_atomic(&dir.join(USAGE_FILE), &to_json(&usage))?;
    write_atomic(&dir.join(REPORT_FILE), render_text_report(&title, &metrics).as_bytes())?;
    write_atomic(&dir.join(CONFUSION_FILE), metrics.confusion.to_csv().as_bytes())?;
    drop(partial);
    fs::remove_file(&partial_path).map_err(CliError::io("removing partial verdicts"))?;
    Ok(RunArtifacts { dir: dir.to_path_buf(), metrics, usage, resumed })
}

/// Generation settings for pass `i` (1-based). Live and mock passes step
/// the seed; replay can only serve the seed that was recorded.
pub fn repeat_generation(config: &RunConfig, i: usize) -> GenerationConfig {
    let mut g = config.generation.clone();
    if config.backend != BackendKind::Replay {
        g.seed = g.seed.wrapping_add(i as u64 - 1);
    }
    g
}

/// Runs the pipeline over a dataset and writes verdicts, metrics, usage and
/// a text report. With `repeat > 1` each pass gets its own `run_<i>`
/// directory and `repeats.json` holds mean and sample SD across passes.
pub fn cmd_run(config: &RunConfig) -> Result<RunSummary, CliError> {
    config.check()?;
    let dataset = load_dataset(&config.dataset, config.domain).map_err(CliError::config)?;
    let manifest = match &config.manifest {
        Some(p) => load_manifest(p).map_err(CliError::config)?,
        None => RegulationManifest::gdpr(),
    };
    let graph = match &config.graph {
        Some(p) => DecisionGraph::load(p).map_err(CliError::config)?,
        None => DecisionGraph::ai_act(),
    };
    let client = config.client(&manifest)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.concurrency)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    let mut runs = Vec::with_capacity(config.repeat);
    for i in 1..=config.repeat {
        let dir = if config.repeat == 1 { config.out.clone() } else { config.out.join(format!("run_{i}")) };
        let generation = repeat_generation(config, i);
        let pipeline = Pipeline {
            client: &client,
            config: &generation,
            manifest: &manifest,
            graph: &graph,
            method: config.method,
            augmenter: None,
        };
        runs.push(run_once(&dir, &pipeline, &dataset, &pool)?);
    }
    let repeats = (config.repeat > 1).then(|| RepeatSummary {
        repeats: config.repeat,
        accuracy: SeriesStats::of(runs.iter().map(|r| r.metrics.accuracy).collect()),
        macro_f1: SeriesStats::of(runs.iter().map(|r| r.metrics.macro_f1).collect()),
    });
    if let Some(r) = &repeats {
        write_atomic(&config.out.join(REPEATS_FILE), &to_json(r))?;
    }
    Ok(RunSummary { runs, repeats, backend_calls: client.backend_calls(), cache_hits: client.cache_hits() })
}

/// Reads a verdict JSONL file.
pub fn read_verdicts(path: &Path) -> Result<Vec<VerdictLine>, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}
