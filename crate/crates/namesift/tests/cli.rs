use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use namesift::corpus_io::{GOLD_FILE, MANIFEST_FILE};
use namesift::report::REPORT_HEADER;

fn namesift(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_namesift"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn synth(root: &Path, count: usize) {
    let out = namesift(
        &[
            "synth",
            root.to_str().unwrap(),
            "--count",
            &count.to_string(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

/// Models and noise modes of the non-aggregate report rows.
fn cells(tsv: &str) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = tsv
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("__ALL__"))
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            (cols[1].to_string(), cols[2].to_string())
        })
        .collect();
    v.dedup();
    v
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    assert_eq!(code(&namesift(&["--bogus", "grid", root], &[])), 1);
    assert_eq!(code(&namesift(&["grid"], &[])), 1);
    assert_eq!(code(&namesift(&["--model", "nope", "grid", root], &[])), 1);
    assert_eq!(code(&namesift(&["--alpha", "-1", "grid", root], &[])), 1);
    assert_eq!(code(&namesift(&["--lambda", "2", "grid", root], &[])), 1);
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "unknown_key = 3\n").unwrap();
    assert_eq!(
        code(&namesift(
            &["--config", cfg.to_str().unwrap(), "grid", root],
            &[]
        )),
        1
    );
    assert_eq!(code(&namesift(&["--help"], &[])), 0);
}

#[test]
fn validate_reports_each_task() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 3);
    let root = dir.path().to_str().unwrap();

    let clean = namesift(&["validate", root], &[]);
    assert_eq!(code(&clean), 0);
    let text = stdout(&clean);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS\t")).count(), 3);

    fs::remove_file(dir.path().join("task02").join(GOLD_FILE)).unwrap();
    let manifest = dir.path().join("task03").join(MANIFEST_FILE);
    let raw = fs::read_to_string(&manifest).unwrap();
    fs::write(
        &manifest,
        raw.replacen("documents/0001.txt", "documents/gone.txt", 1),
    )
    .unwrap();

    let broken = namesift(&["validate", root], &[]);
    assert_eq!(code(&broken), 2);
    let text = stdout(&broken);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("PASS\t"));
    assert!(
        rows[1].starts_with("FAIL\t") && rows[1].contains("missing gold"),
        "{}",
        rows[1]
    );
    assert!(
        rows[2].starts_with("FAIL\t") && rows[2].contains("dangling"),
        "{}",
        rows[2]
    );

    let json = namesift(&["--format", "json", "validate", root], &[]);
    let parsed: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 3);
}

#[test]
fn integrity_and_partial_failures() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent");
    assert_eq!(
        code(&namesift(&["grid", missing.to_str().unwrap()], &[])),
        2
    );

    synth(dir.path(), 2);
    let root = dir.path().to_str().unwrap();
    fs::remove_file(dir.path().join("task01").join(GOLD_FILE)).unwrap();
    let partial = namesift(&["grid", root], &[]);
    assert_eq!(code(&partial), 3);
    assert!(String::from_utf8_lossy(&partial.stderr).contains("warning"));
    let text = stdout(&partial);
    assert!(text.starts_with(REPORT_HEADER));
    assert!(!text.contains("\ttask01") && text.lines().count() > 1);

    fs::remove_file(dir.path().join("task02").join(GOLD_FILE)).unwrap();
    assert_eq!(code(&namesift(&["grid", root], &[])), 2);
}

#[test]
fn config_precedence_file_env_flag() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    synth(&corpus, 1);
    let root = corpus.to_str().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "model = \"cosine\"\nnoise = \"union\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = namesift(&["--config", cfg, "classify", root], &[]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(
        cells(&stdout(&from_file)),
        [("cosine".into(), "union".into())]
    );

    let env = [("NAMESIFT_MODEL", "score")];
    let from_env = namesift(&["--config", cfg, "classify", root], &env);
    assert_eq!(
        cells(&stdout(&from_env)),
        [("score".into(), "union".into())]
    );

    let from_flag = namesift(
        &["--config", cfg, "--model", "nb-bernoulli", "classify", root],
        &env,
    );
    assert_eq!(
        cells(&stdout(&from_flag)),
        [("nb-bernoulli".into(), "union".into())]
    );

    let env_file = [("NAMESIFT_CONFIG", cfg)];
    let via_env_path = namesift(&["classify", root], &env_file);
    assert_eq!(
        cells(&stdout(&via_env_path)),
        [("cosine".into(), "union".into())]
    );
}

#[test]
fn grid_json_rerenders_through_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    synth(&corpus, 2);
    let root = corpus.to_str().unwrap();
    let json = dir.path().join("grid.json");

    let tsv = namesift(&["--reps", "3", "grid", root], &[]);
    assert_eq!(code(&tsv), 0);
    let written = namesift(
        &[
            "--reps",
            "3",
            "--format",
            "json",
            "grid",
            root,
            "-o",
            json.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&written), 0);
    assert!(written.stdout.is_empty());
    let rendered = namesift(&["report", json.to_str().unwrap()], &[]);
    assert_eq!(code(&rendered), 0);
    assert_eq!(stdout(&rendered), stdout(&tsv));
    assert_eq!(cells(&stdout(&tsv)).len(), 17);

    let garbage = dir.path().join("x.json");
    fs::write(&garbage, "{}").unwrap();
    assert_eq!(
        code(&namesift(&["report", garbage.to_str().unwrap()], &[])),
        1
    );
}

#[test]
fn classify_and_cluster_side_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    synth(&corpus, 2);
    let root = corpus.to_str().unwrap();

    let assignments = dir.path().join("a.tsv");
    let out = namesift(
        &[
            "classify",
            root,
            "--assignments",
            assignments.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0);
    let rows = fs::read_to_string(&assignments).unwrap();
    assert!(rows.starts_with("task\tdoc_id\tassigned\tscore\n"));
    assert_eq!(rows.lines().count(), 1 + 2 * 30);

    let clusters = dir.path().join("c.tsv");
    let out = namesift(
        &[
            "--reps",
            "2",
            "cluster",
            root,
            "--clusters",
            clusters.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(
        cells(&stdout(&out)),
        [
            ("hac_complete".into(), "-".into()),
            ("kmeans".into(), "-".into())
        ]
    );
    let rows = fs::read_to_string(&clusters).unwrap();
    // Each method assigns the 20 entity documents of both tasks; K-Means twice.
    assert_eq!(rows.lines().count(), 1 + 2 * 20 * 3);
    assert_eq!(
        code(&namesift(
            &["--hac", "false", "--kmeans", "false", "cluster", root],
            &[]
        )),
        1
    );
}
