//! Experiment driver: loads a corpus tree and evaluates the model × noise
//! grid and the clustering baselines over it.

use std::path::{Path, PathBuf};

use namesift_core::baselines::{
    assignment_to_clustering, hac_complete, run_repetitions, Clustering, DocVector,
};
use namesift_core::corpus::Task;
use namesift_core::eval::{
    clustering_eval_filter, micro_macro_f1, nmi, purity, EvalReport, Metrics, TaskMetrics,
};
use namesift_core::features::{build_index, FeatureVector};
use namesift_core::models::{Assignment, Classifier, ModelKind, NoiseMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, RunConfig};
use crate::corpus_io::{discover_tasks, load_task, CorpusIoError};

pub const HAC_NAME: &str = "hac_complete";
pub const KMEANS_NAME: &str = "kmeans";
/// Noise column of baseline reports.
pub const NO_NOISE_COLUMN: &str = "-";

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusIoError),
    #[error("no task could be loaded from {}", .0.display())]
    NoTasks(PathBuf),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

/// A task or cell that was skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    /// Task directory or task name.
    pub task: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub corpus_root: PathBuf,
    pub config: RunConfig,
}

/// Loaded tasks sorted by name, plus the directories that failed to load.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub tasks: Vec<Task>,
    pub failures: Vec<Failure>,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, ExperimentError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))
}

/// Loads every task under `root`, keeping those named in `config.tasks`
/// (all when empty). Unloadable tasks become failures.
pub fn load_corpus(root: &Path, config: &RunConfig) -> Result<Corpus, ExperimentError> {
    let dirs = discover_tasks(root)?;
    let opts = config.load_options();
    let loaded: Vec<_> =
        pool(config.jobs)?.install(|| dirs.par_iter().map(|d| (d, load_task(d, &opts))).collect());
    let wanted = |name: &str| config.tasks.is_empty() || config.tasks.iter().any(|t| t == name);
    let mut corpus = Corpus::default();
    for (dir, result) in loaded {
        match result {
            Ok(task) if wanted(task.name()) => corpus.tasks.push(task),
            Ok(_) => {}
            Err(e) => {
                let dir_name = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default();
                if wanted(dir_name) {
                    log::warn!("skipping {}: {e}", dir.display());
                    corpus.failures.push(Failure {
                        task: dir.display().to_string(),
                        error: e.to_string(),
                    });
                }
            }
        }
    }
    corpus.tasks.sort_by(|a, b| a.name().cmp(b.name()));
    if corpus.tasks.is_empty() && !corpus.failures.is_empty() {
        return Err(ExperimentError::NoTasks(root.to_path_buf()));
    }
    Ok(corpus)
}

/// Classification metrics of one task: F1 over all documents and
/// purity/NMI of the induced grouping over entity-labelled documents.
pub fn classification_metrics(task: &Task, assignment: &Assignment) -> Metrics {
    let mut m = Metrics::default();
    if let Ok((micro, macro_)) = micro_macro_f1(assignment, task.gold()) {
        m = m.with_f1(micro, macro_);
    }
    let keep = clustering_eval_filter(task);
    if !keep.is_empty() {
        let clustering = assignment_to_clustering(assignment, |d| keep.contains(&d));
        if let (Ok(p), Ok(n)) = (
            purity(&clustering, task.gold()),
            nmi(&clustering, task.gold()),
        ) {
            m = m.with_clustering(p, n);
        }
    }
    m
}

fn clustering_metrics(clustering: &Clustering, task: &Task) -> Option<(f64, f64)> {
    Some((
        purity(clustering, task.gold()).ok()?,
        nmi(clustering, task.gold()).ok()?,
    ))
}

/// Per-task outcome of all grid cells.
#[derive(Debug)]
struct TaskOutcome {
    name: String,
    cells: Vec<Result<(Metrics, usize), String>>,
    hac: Option<Result<Metrics, String>>,
    kmeans: Option<Result<Metrics, String>>,
    clustering_documents: usize,
}

fn grid_cells(config: &RunConfig) -> Vec<(ModelKind, NoiseMode)> {
    config
        .models
        .iter()
        .flat_map(|&m| config.noise_modes.iter().map(move |&n| (m, n)))
        .collect()
}

/// Runs the classifier of one cell on one task.
pub fn classify_task(
    task: &Task,
    config: &RunConfig,
    model: ModelKind,
    noise: NoiseMode,
) -> Result<Assignment, String> {
    let classifier =
        Classifier::new(task, &config.model_config(model, noise)).map_err(|e| e.to_string())?;
    Ok(classifier.assign(task))
}

/// Baseline clusterings of the entity-labelled documents of a task, with
/// `k` = number of entities clamped to the document count.
#[derive(Debug)]
pub struct BaselineInput<'t> {
    vectors: Vec<(&'t str, FeatureVector)>,
    k: usize,
}

impl<'t> BaselineInput<'t> {
    pub fn new(task: &'t Task, config: &RunConfig) -> Self {
        let keep = clustering_eval_filter(task);
        let index = build_index(task);
        let features = config.features();
        let vectors: Vec<(&str, FeatureVector)> = task
            .documents()
            .iter()
            .enumerate()
            .filter(|(_, d)| keep.contains(&d.id.as_str()))
            .map(|(i, d)| {
                let c = namesift_core::features::ElementRef::Document(i);
                (
                    d.id.as_str(),
                    index.vectorize(c, &features).expect("indexed document"),
                )
            })
            .collect();
        let k = task.entities().len().clamp(1, vectors.len().max(1));
        BaselineInput { vectors, k }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn docs(&self) -> Vec<DocVector<'_>> {
        self.vectors.iter().map(|(id, v)| (*id, v)).collect()
    }

    pub fn hac(&self) -> Result<Clustering, String> {
        hac_complete(&self.docs(), self.k).map_err(|e| e.to_string())
    }

    pub fn kmeans(&self, config: &RunConfig) -> Result<Vec<Clustering>, String> {
        run_repetitions(&self.docs(), self.k, config.reps, &config.kmeans_config())
            .map_err(|e| e.to_string())
    }
}

fn baseline_metrics(
    task: &Task,
    clusterings: Result<Vec<Clustering>, String>,
) -> Result<Metrics, String> {
    let per_rep = clusterings?
        .iter()
        .map(|c| {
            clustering_metrics(c, task)
                .map(|(p, n)| Metrics::default().with_clustering(p, n))
                .ok_or_else(|| "clustering does not cover the gold documents".to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Metrics::mean(&per_rep))
}

fn run_task(task: &Task, config: &RunConfig, cells: &[(ModelKind, NoiseMode)]) -> TaskOutcome {
    let results = cells
        .iter()
        .map(|&(model, noise)| {
            classify_task(task, config, model, noise)
                .map(|a| (classification_metrics(task, &a), a.floored_events))
        })
        .collect();
    let input = BaselineInput::new(task, config);
    let run_baseline = |enabled: bool, f: &dyn Fn() -> Result<Vec<Clustering>, String>| {
        (enabled && !input.is_empty()).then(|| baseline_metrics(task, f()))
    };
    TaskOutcome {
        name: task.name().to_string(),
        cells: results,
        hac: run_baseline(config.hac, &|| input.hac().map(|c| vec![c])),
        kmeans: run_baseline(config.kmeans, &|| input.kmeans(config)),
        clustering_documents: input.len(),
    }
}

/// Everything a grid run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutput {
    /// Classification cells in model-major order, then HAC, then K-Means.
    pub reports: Vec<EvalReport>,
    /// Entity-labelled documents over all evaluated tasks.
    pub clustering_documents: usize,
    /// Probabilities clamped to the floor, over all cells.
    pub floored_events: usize,
    pub failures: Vec<Failure>,
}

/// Evaluates the configured grid on already loaded tasks.
pub fn run_grid_on(tasks: &[Task], config: &RunConfig) -> Result<GridOutput, ExperimentError> {
    config.validate_grid()?;
    let cells = grid_cells(config);
    let outcomes: Vec<TaskOutcome> = pool(config.jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|t| run_task(t, config, &cells))
            .collect()
    });

    let mut failures = Vec::new();
    let mut floored_events = 0;
    let mut reports = Vec::new();
    for (c, &(model, noise)) in cells.iter().enumerate() {
        let mut rows = Vec::new();
        for o in &outcomes {
            match &o.cells[c] {
                Ok((metrics, floored)) => {
                    floored_events += floored;
                    rows.push(TaskMetrics {
                        task: o.name.clone(),
                        metrics: metrics.clone(),
                    });
                }
                Err(e) => failures.push(Failure {
                    task: o.name.clone(),
                    error: format!("{}/{}: {e}", model.as_str(), noise.as_str()),
                }),
            }
        }
        reports.push(EvalReport::new(
            model.as_str(),
            noise.as_str(),
            config.model_fingerprint(model, noise),
            rows,
        ));
    }
    type Pick = fn(&TaskOutcome) -> &Option<Result<Metrics, String>>;
    let baselines: [(bool, &str, Pick); 2] = [
        (config.hac, HAC_NAME, |o| &o.hac),
        (config.kmeans, KMEANS_NAME, |o| &o.kmeans),
    ];
    for (enabled, name, get) in baselines {
        if !enabled {
            continue;
        }
        let mut rows = Vec::new();
        for o in &outcomes {
            match get(o) {
                Some(Ok(metrics)) => rows.push(TaskMetrics {
                    task: o.name.clone(),
                    metrics: metrics.clone(),
                }),
                Some(Err(e)) => failures.push(Failure {
                    task: o.name.clone(),
                    error: format!("{name}: {e}"),
                }),
                None => {}
            }
        }
        reports.push(EvalReport::new(
            name,
            NO_NOISE_COLUMN,
            config.baseline_fingerprint(name),
            rows,
        ));
    }
    Ok(GridOutput {
        reports,
        clustering_documents: outcomes.iter().map(|o| o.clustering_documents).sum(),
        floored_events,
        failures,
    })
}

/// Loads the corpus and runs the grid; load failures are carried into the
/// output.
pub fn run_grid(spec: &RunSpec) -> Result<GridOutput, ExperimentError> {
    spec.config.validate_grid()?;
    let corpus = load_corpus(&spec.corpus_root, &spec.config)?;
    let mut out = run_grid_on(&corpus.tasks, &spec.config)?;
    let mut failures = corpus.failures;
    failures.append(&mut out.failures);
    out.failures = failures;
    Ok(out)
}
