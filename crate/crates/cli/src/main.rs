use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use compliance_cli::agree::cmd_agree;
use compliance_cli::report::cmd_report;
use compliance_cli::validate::cmd_validate;
use compliance_cli::{cmd_run, CliError, Method, RunConfig};
use compliance_core::evaluation::import_privaci;
use compliance_core::graph::DecisionGraph;
use compliance_core::Domain;
use compliance_llm::{BackendKind, Cache, GenerationConfig};
use compliance_wizard::WizardConfig;

#[derive(Parser)]
#[command(name = "comply", version, about = "Context-aware regulatory compliance assessment")]
struct Cli {
    /// Start the wizard server (same as the `serve` subcommand).
    #[arg(long)]
    serve: bool,
    /// Port for --serve.
    #[arg(long, default_value_t = 8787)]
    port: u16,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Assess every case in a dataset and score the verdicts.
    Run(RunArgs),
    /// Validate a regulation manifest or decision graph.
    Validate { path: PathBuf },
    /// Score a verdict file against a dataset.
    Report {
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Also write metrics.json and confusion.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cohen's and Fleiss' kappa between verdict files.
    Agree {
        #[arg(required = true, num_args = 2..)]
        verdicts: Vec<PathBuf>,
    },
    /// Inspect or empty the completion cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
    /// Convert a PrivaCI-Bench export into a JSONL case file.
    Import {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the AI Act wizard over HTTP.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum CacheAction {
    Stats {
        #[arg(long)]
        cache_dir: PathBuf,
    },
    Clear {
        #[arg(long)]
        cache_dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Keep only this domain's cases (gdpr or aiact).
    #[arg(long)]
    domain: Option<Domain>,
    #[arg(long, default_value = "contextlens")]
    method: Method,
    #[arg(long, default_value = "mock")]
    backend: BackendKind,
    #[arg(long, default_value_t = GenerationConfig::default().model)]
    model: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1024)]
    max_new_tokens: u32,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    /// Seed of the synthetic mock responder.
    #[arg(long, default_value_t = 0)]
    mock_seed: u64,
    /// Live requests per second; 0 disables the limiter.
    #[arg(long, default_value_t = 0.0)]
    rate_limit: f64,
    /// Regulation manifest to use instead of the shipped GDPR manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Decision graph to use instead of the shipped AI Act graph.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8787)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Keep a JSON snapshot per session in this directory.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    /// CORS origin of the UI; any origin when omitted.
    #[arg(long)]
    allow_origin: Option<String>,
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let config = RunConfig {
        dataset: args.dataset,
        domain: args.domain,
        method: args.method,
        backend: args.backend,
        generation: GenerationConfig {
            model: args.model,
            temperature: args.temperature,
            seed: args.seed,
            max_new_tokens: args.max_new_tokens,
            max_retries: args.max_retries,
        },
        out: args.out,
        concurrency: args.concurrency,
        repeat: args.repeat,
        cache_dir: args.cache_dir,
        mock_seed: args.mock_seed,
        manifest: args.manifest,
        graph: args.graph,
        rate_limit: args.rate_limit,
    };
    let summary = cmd_run(&config)?;
    for r in &summary.runs {
        let m = &r.metrics;
        println!(
            "{}: {} cases, acc {:.2}, macro-F1 {:.2}, parse failures {}{}",
            r.dir.display(),
            m.cases,
            m.accuracy * 100.0,
            m.macro_f1 * 100.0,
            m.parse_failures,
            if r.resumed > 0 { format!(", {} resumed", r.resumed) } else { String::new() }
        );
    }
    if let Some(rep) = &summary.repeats {
        println!(
            "{} repeats: acc {:.2} ± {:.2}, macro-F1 {:.2} ± {:.2}",
            rep.repeats,
            rep.accuracy.mean * 100.0,
            rep.accuracy.sd * 100.0,
            rep.macro_f1.mean * 100.0,
            rep.macro_f1.sd * 100.0
        );
    }
    println!("backend calls {}, cache hits {}", summary.backend_calls, summary.cache_hits);
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let graph = match &args.graph {
        Some(p) => DecisionGraph::load(p).map_err(CliError::config)?,
        None => DecisionGraph::ai_act(),
    };
    let config = WizardConfig { allowed_origin: args.allow_origin, snapshot_dir: args.snapshot_dir };
    compliance_wizard::serve_blocking(SocketAddr::new(args.host, args.port), graph, config)
        .map_err(CliError::io("wizard server"))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let command = match (cli.command, cli.serve) {
        (Some(c), false) => c,
        (None, true) => Command::Serve(ServeArgs {
            port: cli.port,
            host: IpAddr::from([127, 0, 0, 1]),
            graph: None,
            snapshot_dir: None,
            allow_origin: None,
        }),
        (Some(_), true) => return Err(CliError::Config("--serve cannot be combined with a subcommand".into())),
        (None, false) => return Err(CliError::Config("no command given; see --help".into())),
    };
    match command {
        Command::Run(args) => run(args),
        Command::Validate { path } => {
            println!("{}", cmd_validate(&path)?);
            Ok(())
        }
        Command::Report { verdicts, dataset, out } => {
            print!("{}", cmd_report(&verdicts, &dataset, out.as_deref())?.0);
            Ok(())
        }
        Command::Agree { verdicts } => {
            let r = cmd_agree(&verdicts)?;
            println!("{}", serde_json::to_string_pretty(&r).expect("serializable"));
            Ok(())
        }
        Command::Cache { action } => {
            match action {
                CacheAction::Stats { cache_dir } => {
                    let s = Cache::open_existing(&cache_dir).and_then(|c| c.stats()).map_err(CliError::io("cache"))?;
                    println!("{} entries, {} bytes", s.entries, s.bytes);
                }
                CacheAction::Clear { cache_dir } => {
                    let n = Cache::open_existing(&cache_dir).and_then(|c| c.clear()).map_err(CliError::io("cache"))?;
                    println!("removed {n} entries");
                }
            }
            Ok(())
        }
        Command::Import { input, domain, out } => {
            let ds = import_privaci(&input, domain).map_err(CliError::config)?;
            ds.write_jsonl(&out).map_err(CliError::io(format!("writing {}", out.display())))?;
            let [p, pr, na] = ds.split();
            println!("{} cases ({p}/{pr}/{na} permitted/prohibited/not applicable) -> {}", ds.len(), out.display());
            Ok(())
        }
        Command::Serve(args) => serve(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
