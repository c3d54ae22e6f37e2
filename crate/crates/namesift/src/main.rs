use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use namesift::config::{ConfigArgs, OutputFormat, RunConfig};
use namesift::corpus_io::{validate_corpus, write_task};
use namesift::experiment::{
    classify_task, load_corpus, run_grid_on, BaselineInput, ExperimentError, GridOutput,
};
use namesift::report::{self, TaskAssignment, TaskClustering};
use namesift::synthetic::{generate, SynthConfig};
use namesift_core::eval::EvalReport;

const EXIT_USAGE: u8 = 1;
const EXIT_INTEGRITY: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Groups web search results for an ambiguous person name by matching them
/// against knowledge-base entity profiles.
#[derive(Debug, Parser)]
#[command(name = "namesift", version)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every task directory under ROOT.
    Validate { root: PathBuf },
    /// Run one model/noise configuration and report its metrics.
    Classify {
        root: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write per-document assignments (TSV, or JSON with all scores).
        #[arg(long)]
        assignments: Option<PathBuf>,
    },
    /// Run the clustering baselines on entity-labelled documents.
    Cluster {
        root: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write the clusters themselves.
        #[arg(long)]
        clusters: Option<PathBuf>,
    },
    /// Run the model × noise grid plus enabled baselines.
    Grid {
        root: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Re-render a JSON report file written by `grid`, `classify` or `cluster`.
    Report {
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic open-world corpus to OUT.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = SynthConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = SynthConfig::default().tasks)]
        count: usize,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn integrity(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INTEGRITY,
            message: e.to_string(),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) | ExperimentError::Pool(_) => Failure::usage(e),
            ExperimentError::Corpus(_) | ExperimentError::NoTasks(_) => Failure::integrity(e),
        }
    }
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn partial_status(out: &GridOutput) -> u8 {
    for f in &out.failures {
        eprintln!("warning: {}: {}", f.task, f.error);
    }
    if out.failures.is_empty() {
        0
    } else {
        EXIT_PARTIAL
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = cli.config.resolve().map_err(Failure::usage)?;
    match cli.command {
        Command::Validate { root } => validate(&root, &cfg),
        Command::Classify {
            root,
            output,
            assignments,
        } => classify(&root, cfg, output.as_deref(), assignments.as_deref()),
        Command::Cluster {
            root,
            output,
            clusters,
        } => cluster(&root, cfg, output.as_deref(), clusters.as_deref()),
        Command::Grid { root, output } => {
            let corpus = load_corpus(&root, &cfg)?;
            let mut out = run_grid_on(&corpus.tasks, &cfg)?;
            out.failures.splice(0..0, corpus.failures);
            emit(output.as_deref(), &report::render_grid(&out, cfg.format))?;
            Ok(partial_status(&out))
        }
        Command::Report { input, output } => {
            let raw = fs::read_to_string(&input)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", input.display())))?;
            let reports: Vec<EvalReport> = match serde_json::from_str::<GridOutput>(&raw) {
                Ok(grid) => grid.reports,
                Err(_) => serde_json::from_str(&raw).map_err(|e| {
                    Failure::usage(format!("{} is not a report file: {e}", input.display()))
                })?,
            };
            emit(
                output.as_deref(),
                &report::render_reports(&reports, cfg.format),
            )?;
            Ok(0)
        }
        Command::Synth { out, seed, count } => {
            let synth = SynthConfig {
                seed,
                tasks: count,
                ..Default::default()
            };
            let tasks = generate(&synth).map_err(Failure::usage)?;
            for (i, task) in tasks.iter().enumerate() {
                write_task(task, &out.join(format!("task{:02}", i + 1))).map_err(Failure::usage)?;
            }
            eprintln!("wrote {} tasks to {}", tasks.len(), out.display());
            Ok(0)
        }
    }
}

fn validate(root: &Path, cfg: &RunConfig) -> Result<u8, Failure> {
    let results = validate_corpus(root, &cfg.load_options()).map_err(Failure::integrity)?;
    let content = match cfg.format {
        OutputFormat::Json => report::to_json(&results),
        OutputFormat::Tsv => {
            let mut s = String::from("status\ttask\tpath\tentities\tdocuments\tdiagnostic\n");
            for r in &results {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                s.push_str(&format!(
                    "{status}\t{}\t{}\t{}\t{}\t{}\n",
                    r.name.as_deref().unwrap_or("-"),
                    r.path.display(),
                    r.entities,
                    r.documents,
                    r.diagnostics.join("; ").replace(['\t', '\n'], " "),
                ));
            }
            s
        }
    };
    emit(None, &content)?;
    let all_pass = !results.is_empty() && results.iter().all(|r| r.passed());
    Ok(if all_pass { 0 } else { EXIT_INTEGRITY })
}

fn classify(
    root: &Path,
    mut cfg: RunConfig,
    output: Option<&Path>,
    assignments: Option<&Path>,
) -> Result<u8, Failure> {
    cfg.models = vec![cfg.model];
    cfg.noise_modes = vec![cfg.noise];
    cfg.hac = false;
    cfg.kmeans = false;
    let corpus = load_corpus(root, &cfg)?;
    let mut out = run_grid_on(&corpus.tasks, &cfg)?;
    out.failures.splice(0..0, corpus.failures);
    emit(output, &report::render_grid(&out, cfg.format))?;

    if let Some(path) = assignments {
        let computed: Vec<_> = corpus
            .tasks
            .iter()
            .filter_map(|t| {
                classify_task(t, &cfg, cfg.model, cfg.noise)
                    .ok()
                    .map(|a| (t.name(), a))
            })
            .collect();
        let content = match cfg.format {
            OutputFormat::Tsv => report::assignments_tsv(computed.iter().map(|(t, a)| (*t, a))),
            OutputFormat::Json => report::to_json(
                &computed
                    .iter()
                    .map(|(task, assignment)| TaskAssignment { task, assignment })
                    .collect::<Vec<_>>(),
            ),
        };
        emit(Some(path), &content)?;
    }
    Ok(partial_status(&out))
}

fn cluster(
    root: &Path,
    mut cfg: RunConfig,
    output: Option<&Path>,
    clusters: Option<&Path>,
) -> Result<u8, Failure> {
    cfg.models.clear();
    if !cfg.hac && !cfg.kmeans {
        return Err(Failure::usage("both baselines are disabled"));
    }
    let corpus = load_corpus(root, &cfg)?;
    let mut out = run_grid_on(&corpus.tasks, &cfg)?;
    out.failures.splice(0..0, corpus.failures);
    emit(output, &report::render_grid(&out, cfg.format))?;

    if let Some(path) = clusters {
        let mut computed = Vec::new();
        for task in &corpus.tasks {
            let input = BaselineInput::new(task, &cfg);
            if input.is_empty() {
                continue;
            }
            if cfg.hac {
                computed.extend(input.hac().ok().map(|c| (task.name(), c)));
            }
            if cfg.kmeans {
                for c in input.kmeans(&cfg).unwrap_or_default() {
                    computed.push((task.name(), c));
                }
            }
        }
        let content = match cfg.format {
            OutputFormat::Tsv => report::clusterings_tsv(computed.iter().map(|(t, c)| (*t, c))),
            OutputFormat::Json => report::to_json(
                &computed
                    .iter()
                    .map(|(task, clustering)| TaskClustering { task, clustering })
                    .collect::<Vec<_>>(),
            ),
        };
        emit(Some(path), &content)?;
    }
    Ok(partial_status(&out))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
