//! Clustering and classification quality measures.
//!
//! Purity and NMI compare a [`Clustering`] with the gold partition; micro and
//! macro F1 compare an [`Assignment`] with the gold labels. NMI uses natural
//! logs and the mean of the two entropies as normalizer.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::baselines::Clustering;
use crate::corpus::{GoldAlignment, Label, Task};
use crate::math;
use crate::models::Assignment;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("document `{0}` has no gold label")]
    Unlabeled(String),
    #[error("document `{0}` is not covered by the assignment")]
    Uncovered(String),
    #[error("nothing to evaluate")]
    Empty,
}

/// Cluster × class counts.
#[derive(Debug, Default)]
struct Contingency<'a> {
    cells: BTreeMap<(usize, &'a Label), usize>,
    clusters: Vec<usize>,
    classes: BTreeMap<&'a Label, usize>,
    total: usize,
}

impl<'a> Contingency<'a> {
    fn build(clustering: &Clustering, gold: &'a GoldAlignment) -> Result<Self, EvalError> {
        let mut t = Contingency::default();
        for (ci, cluster) in clustering.clusters.iter().enumerate() {
            t.clusters.push(cluster.len());
            for doc in cluster {
                let label = gold
                    .get(doc)
                    .ok_or_else(|| EvalError::Unlabeled(doc.clone()))?;
                *t.cells.entry((ci, label)).or_insert(0) += 1;
                *t.classes.entry(label).or_insert(0) += 1;
                t.total += 1;
            }
        }
        if t.total == 0 {
            return Err(EvalError::Empty);
        }
        Ok(t)
    }
}

/// Fraction of documents that belong to the majority gold class of their
/// cluster.
pub fn purity(clustering: &Clustering, gold: &GoldAlignment) -> Result<f64, EvalError> {
    let t = Contingency::build(clustering, gold)?;
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for (&(c, _), &n) in &t.cells {
        let b = best.entry(c).or_insert(0);
        *b = (*b).max(n);
    }
    Ok(best.values().sum::<usize>() as f64 / t.total as f64)
}

fn entropy<I: IntoIterator<Item = usize>>(sizes: I, total: f64) -> f64 {
    sizes
        .into_iter()
        .filter(|&n| n > 0)
        .map(|n| {
            let p = n as f64 / total;
            -p * math::ln(p)
        })
        .sum()
}

/// Normalized mutual information `I(Ω; C) / ((H(Ω) + H(C)) / 2)`.
///
/// Two single-block partitions count as identical (1.0). Zero mutual
/// information yields 0.0.
pub fn nmi(clustering: &Clustering, gold: &GoldAlignment) -> Result<f64, EvalError> {
    let t = Contingency::build(clustering, gold)?;
    let n = t.total as f64;
    let h_clusters = entropy(t.clusters.iter().copied(), n);
    let h_classes = entropy(t.classes.values().copied(), n);
    let non_empty_clusters = t.clusters.iter().filter(|&&s| s > 0).count();
    if non_empty_clusters == 1 && t.classes.len() == 1 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (&(c, class), &nij) in &t.cells {
        let ni = t.clusters[c] as f64;
        let nj = t.classes[class] as f64;
        let nij = nij as f64;
        mi += nij / n * math::ln(n * nij / (ni * nj));
    }
    if mi <= 0.0 {
        return Ok(0.0);
    }
    Ok((mi / ((h_clusters + h_classes) / 2.0)).min(1.0))
}

/// Micro- and macro-averaged F1 of a single-label assignment.
///
/// Macro F1 averages per-class F1 over the classes present in the gold
/// labels (noise included when present); a class with zero precision and
/// recall scores 0. Micro F1 pools true positives, false positives and false
/// negatives over every gold or predicted class, so it equals accuracy.
pub fn micro_macro_f1(
    assignment: &Assignment,
    gold: &GoldAlignment,
) -> Result<(f64, f64), EvalError> {
    let predicted: BTreeMap<&str, &Label> = assignment.iter().collect();
    for (doc, _) in gold.iter() {
        if !predicted.contains_key(doc) {
            return Err(EvalError::Uncovered(doc.to_string()));
        }
    }
    let mut tp: BTreeMap<&Label, usize> = BTreeMap::new();
    let mut fp: BTreeMap<&Label, usize> = BTreeMap::new();
    let mut fn_: BTreeMap<&Label, usize> = BTreeMap::new();
    let mut gold_classes: BTreeSet<&Label> = BTreeSet::new();
    for (doc, &pred) in &predicted {
        let truth = gold
            .get(doc)
            .ok_or_else(|| EvalError::Unlabeled(doc.to_string()))?;
        gold_classes.insert(truth);
        if pred == truth {
            *tp.entry(truth).or_insert(0) += 1;
        } else {
            *fp.entry(pred).or_insert(0) += 1;
            *fn_.entry(truth).or_insert(0) += 1;
        }
    }
    if gold_classes.is_empty() {
        return Err(EvalError::Empty);
    }
    let get = |m: &BTreeMap<&Label, usize>, l: &Label| m.get(l).copied().unwrap_or(0) as f64;
    let macro_f1 = gold_classes
        .iter()
        .map(|&l| f1(get(&tp, l), get(&fp, l), get(&fn_, l)))
        .sum::<f64>()
        / gold_classes.len() as f64;
    let sum = |m: &BTreeMap<&Label, usize>| m.values().sum::<usize>() as f64;
    let micro_f1 = f1(sum(&tp), sum(&fp), sum(&fn_));
    Ok((micro_f1, macro_f1))
}

fn f1(tp: f64, fp: f64, fn_: f64) -> f64 {
    let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Mean over tasks of `(micro + macro) / 2`.
pub fn f1_bar(per_task: &[(f64, f64)]) -> Result<f64, EvalError> {
    if per_task.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(per_task.iter().map(|(mi, ma)| (mi + ma) / 2.0).sum::<f64>() / per_task.len() as f64)
}

/// Documents whose gold label is a real entity, in task order.
pub fn clustering_eval_filter(task: &Task) -> Vec<&str> {
    task.documents()
        .iter()
        .filter(|d| matches!(task.gold_label(&d.id), Some(Label::Entity(_))))
        .map(|d| d.id.as_str())
        .collect()
}

/// Metrics of one task; absent values were not computed for this run.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub purity: Option<f64>,
    pub nmi: Option<f64>,
    pub micro_f1: Option<f64>,
    pub macro_f1: Option<f64>,
    pub f1_bar: Option<f64>,
}

impl Metrics {
    pub fn with_f1(mut self, micro: f64, macro_: f64) -> Self {
        self.micro_f1 = Some(micro);
        self.macro_f1 = Some(macro_);
        self.f1_bar = Some((micro + macro_) / 2.0);
        self
    }

    pub fn with_clustering(mut self, purity: f64, nmi: f64) -> Self {
        self.purity = Some(purity);
        self.nmi = Some(nmi);
        self
    }

    /// Unweighted mean of each metric over the entries that carry it.
    pub fn mean<'a, I: IntoIterator<Item = &'a Metrics>>(items: I) -> Metrics {
        let items: Vec<&Metrics> = items.into_iter().collect();
        let avg = |get: fn(&Metrics) -> Option<f64>| {
            let vals: Vec<f64> = items.iter().filter_map(|m| get(m)).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        Metrics {
            purity: avg(|m| m.purity),
            nmi: avg(|m| m.nmi),
            micro_f1: avg(|m| m.micro_f1),
            macro_f1: avg(|m| m.macro_f1),
            f1_bar: avg(|m| m.f1_bar),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TaskMetrics {
    pub task: String,
    pub metrics: Metrics,
}

/// Per-task and aggregate metrics of one configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    /// Model or baseline name.
    pub model: String,
    /// Noise mode, `-` for baselines.
    pub noise: String,
    /// Canonical echo of the parameters that produced the report.
    pub config_fingerprint: String,
    pub per_task: Vec<TaskMetrics>,
    pub aggregate: Metrics,
}

impl EvalReport {
    /// Sorts rows by task name and recomputes the aggregate.
    pub fn new(
        model: impl Into<String>,
        noise: impl Into<String>,
        config_fingerprint: impl Into<String>,
        mut per_task: Vec<TaskMetrics>,
    ) -> Self {
        per_task.sort_by(|a, b| a.task.cmp(&b.task));
        let aggregate = Metrics::mean(per_task.iter().map(|t| &t.metrics));
        EvalReport {
            model: model.into(),
            noise: noise.into(),
            config_fingerprint: config_fingerprint.into(),
            per_task,
            aggregate,
        }
    }
}
