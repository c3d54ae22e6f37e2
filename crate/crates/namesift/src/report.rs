//! TSV and JSON renderings of reports, assignments and clusterings.

use std::fmt::Write as _;

use namesift_core::baselines::Clustering;
use namesift_core::eval::{EvalReport, Metrics};
use namesift_core::models::Assignment;
use serde::Serialize;

use crate::config::OutputFormat;
use crate::experiment::GridOutput;

/// Task column of the per-report aggregate row.
pub const AGGREGATE_ROW: &str = "__ALL__";
pub const REPORT_HEADER: &str = "task\tmodel\tnoise\tpurity\tnmi\tmicro_f1\tmacro_f1\tf1_bar";

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

fn metric_cells(m: &Metrics) -> String {
    [m.purity, m.nmi, m.micro_f1, m.macro_f1, m.f1_bar]
        .map(cell)
        .join("\t")
}

/// Header, then per report its task rows followed by an aggregate row.
pub fn reports_tsv(reports: &[EvalReport]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in reports {
        let rows = r
            .per_task
            .iter()
            .map(|t| (t.task.as_str(), &t.metrics))
            .chain([(AGGREGATE_ROW, &r.aggregate)]);
        for (task, m) in rows {
            let _ = writeln!(out, "{task}\t{}\t{}\t{}", r.model, r.noise, metric_cells(m));
        }
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

pub fn render_reports(reports: &[EvalReport], format: OutputFormat) -> String {
    match format {
        OutputFormat::Tsv => reports_tsv(reports),
        OutputFormat::Json => to_json(reports),
    }
}

/// TSV shows the reports only; JSON carries the whole output, including
/// failures and counters.
pub fn render_grid(out: &GridOutput, format: OutputFormat) -> String {
    match format {
        OutputFormat::Tsv => reports_tsv(&out.reports),
        OutputFormat::Json => to_json(out),
    }
}

/// `task doc_id assigned score` rows, documents in task order.
pub fn assignments_tsv<'a, I>(assignments: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a Assignment)>,
{
    let mut out = String::from("task\tdoc_id\tassigned\tscore\n");
    for (task, a) in assignments {
        for row in &a.rows {
            let score = row.assigned_score(&a.candidates);
            let _ = writeln!(out, "{task}\t{}\t{}\t{score:.6}", row.doc_id, row.assigned);
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct TaskAssignment<'a> {
    pub task: &'a str,
    pub assignment: &'a Assignment,
}

#[derive(Debug, Serialize)]
pub struct TaskClustering<'a> {
    pub task: &'a str,
    pub clustering: &'a Clustering,
}

pub fn clusterings_tsv<'a, I>(clusterings: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a Clustering)>,
{
    let mut out = String::from("task\tmethod\tseed\tcluster\tdoc_id\n");
    for (task, c) in clusterings {
        let seed = c.seed.map_or_else(|| "-".to_string(), |s| s.to_string());
        for (i, cluster) in c.clusters.iter().enumerate() {
            for doc in cluster {
                let _ = writeln!(out, "{task}\t{}\t{seed}\t{i}\t{doc}", c.method.as_str());
            }
        }
    }
    out
}
