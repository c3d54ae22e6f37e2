//! On-disk corpus format: one directory per task.
//!
//! ```text
//! <task>/task.json   {"name", "entities": [{"id","title","file"}], "documents": [{"id","url","rank","file"}]}
//! <task>/gold.tsv    doc_id<TAB>entity_id, `__NOISE__` for noise, `#` comments
//! <task>/<file>      UTF-8 plain-text bodies referenced by `file`
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use namesift_core::corpus::{
    CorpusError, EntityProfile, GoldAlignment, Label, ResultDocument, Task, Tokenizer,
};
use serde::{Deserialize, Serialize};

use crate::markup::strip_markup;

pub const MANIFEST_FILE: &str = "task.json";
pub const GOLD_FILE: &str = "gold.tsv";

#[derive(Debug, thiserror::Error)]
pub enum CorpusIoError {
    #[error("missing manifest {}", .0.display())]
    MissingManifest(PathBuf),
    #[error("malformed manifest {}: {source}", .path.display())]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("missing gold {}", .0.display())]
    MissingGold(PathBuf),
    #[error("{}:{line}: {message}", .path.display())]
    GoldFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("dangling file reference {}", .0.display())]
    MissingFile(PathBuf),
    #[error("integrity error in {}: {source}", .path.display())]
    Integrity {
        path: PathBuf,
        #[source]
        source: CorpusError,
    },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CorpusIoError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusIoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub entities: Vec<EntityEntry>,
    pub documents: Vec<DocumentEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityEntry {
    pub id: String,
    pub title: String,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentEntry {
    pub id: String,
    pub url: String,
    pub rank: u32,
    pub file: String,
}

/// Ingestion options.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub tokenizer: Tokenizer,
    /// Remove HTML tags and decode entities before tokenizing.
    pub strip_html: bool,
}

fn read_body(dir: &Path, file: &str, opts: &LoadOptions) -> Result<String, CorpusIoError> {
    let path = dir.join(file);
    let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CorpusIoError::MissingFile(path.clone()),
        _ => CorpusIoError::io(&path, e),
    })?;
    Ok(if opts.strip_html {
        strip_markup(&text)
    } else {
        text
    })
}

/// Reads the gold file: one `doc_id<TAB>label` row per document.
pub fn read_gold(path: &Path) -> Result<GoldAlignment, CorpusIoError> {
    let content = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CorpusIoError::MissingGold(path.to_path_buf()),
        _ => CorpusIoError::io(path, e),
    })?;
    let mut gold = GoldAlignment::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let format_err = |message: String| CorpusIoError::GoldFormat {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let mut cols = line.split('\t');
        let (Some(doc), Some(label), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(format_err("expected two tab-separated columns".into()));
        };
        if doc.is_empty() || label.is_empty() {
            return Err(format_err("empty column".into()));
        }
        if gold.insert(doc, Label::parse(label)).is_some() {
            return Err(format_err(format!("duplicate row for document `{doc}`")));
        }
    }
    Ok(gold)
}

/// Loads and validates one task directory.
pub fn load_task(dir: &Path, opts: &LoadOptions) -> Result<Task, CorpusIoError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let raw = fs::read_to_string(&manifest_path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CorpusIoError::MissingManifest(manifest_path.clone()),
        _ => CorpusIoError::io(&manifest_path, e),
    })?;
    let manifest: Manifest =
        serde_json::from_str(&raw).map_err(|source| CorpusIoError::Manifest {
            path: manifest_path.clone(),
            source,
        })?;
    let gold = read_gold(&dir.join(GOLD_FILE))?;

    let entities = manifest
        .entities
        .iter()
        .map(|e| {
            let text = read_body(dir, &e.file, opts)?;
            Ok(EntityProfile::new(&e.id, &e.title, text, &opts.tokenizer))
        })
        .collect::<Result<Vec<_>, CorpusIoError>>()?;
    let documents = manifest
        .documents
        .iter()
        .map(|d| {
            let text = read_body(dir, &d.file, opts)?;
            Ok(ResultDocument::new(
                &d.id,
                &d.url,
                d.rank,
                text,
                &opts.tokenizer,
            ))
        })
        .collect::<Result<Vec<_>, CorpusIoError>>()?;

    Task::new(manifest.name, entities, documents, gold).map_err(|source| CorpusIoError::Integrity {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes a task in the corpus format. Bodies go to `entities/NNNN.txt` and
/// `documents/NNNN.txt`.
pub fn write_task(task: &Task, dir: &Path) -> Result<(), CorpusIoError> {
    for sub in ["entities", "documents"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| CorpusIoError::io(&p, e))?;
    }
    let write = |rel: &str, body: &str| {
        let p = dir.join(rel);
        fs::write(&p, body).map_err(|e| CorpusIoError::io(&p, e))
    };

    let mut manifest = Manifest {
        name: task.name().to_string(),
        entities: Vec::new(),
        documents: Vec::new(),
    };
    for (i, e) in task.entities().iter().enumerate() {
        let file = format!("entities/{i:04}.txt");
        write(&file, &e.text)?;
        manifest.entities.push(EntityEntry {
            id: e.id.clone(),
            title: e.title.clone(),
            file,
        });
    }
    let mut gold = String::from("# doc_id\tentity_id\n");
    for (i, d) in task.documents().iter().enumerate() {
        let file = format!("documents/{i:04}.txt");
        write(&file, &d.text)?;
        manifest.documents.push(DocumentEntry {
            id: d.id.clone(),
            url: d.url.clone(),
            rank: d.rank,
            file,
        });
        let label = task.gold_label(&d.id).expect("validated task");
        gold.push_str(&format!("{}\t{}\n", d.id, label));
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(MANIFEST_FILE, &(json + "\n"))?;
    write(GOLD_FILE, &gold)
}

/// Task directories under `root`, sorted by path. `root` itself counts as a
/// task directory when it holds a manifest.
pub fn discover_tasks(root: &Path) -> Result<Vec<PathBuf>, CorpusIoError> {
    if root.join(MANIFEST_FILE).is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let entries = fs::read_dir(root).map_err(|e| CorpusIoError::io(root, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CorpusIoError::io(root, e))?;
        let path = entry.path();
        if path.is_dir() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

/// Outcome of validating one task directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskValidation {
    pub path: PathBuf,
    pub name: Option<String>,
    pub documents: usize,
    pub entities: usize,
    pub diagnostics: Vec<String>,
}

impl TaskValidation {
    pub fn passed(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Validates every task under `root`, collecting diagnostics instead of
/// stopping at the first failure.
pub fn validate_corpus(
    root: &Path,
    opts: &LoadOptions,
) -> Result<Vec<TaskValidation>, CorpusIoError> {
    let mut out = Vec::new();
    let mut names = BTreeSet::new();
    for dir in discover_tasks(root)? {
        let mut v = TaskValidation {
            path: dir.clone(),
            name: None,
            documents: 0,
            entities: 0,
            diagnostics: Vec::new(),
        };
        match load_task(&dir, opts) {
            Ok(task) => {
                if !names.insert(task.name().to_string()) {
                    v.diagnostics
                        .push(format!("duplicate task name `{}`", task.name()));
                }
                v.name = Some(task.name().to_string());
                v.documents = task.documents().len();
                v.entities = task.entities().len();
            }
            Err(e) => v.diagnostics.push(e.to_string()),
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_fixture(dir: &Path) {
        fs::create_dir_all(dir.join("docs")).unwrap();
        fs::write(
            dir.join(MANIFEST_FILE),
            r#"{"name": "John Doe",
                "entities": [{"id": "e1", "title": "John Doe (chemist)", "file": "e1.txt"},
                             {"id": "e2", "title": "John Doe (pitcher)", "file": "e2.txt"}],
                "documents": [{"id": "d1", "url": "http://a", "rank": 1, "file": "docs/d1.txt"},
                              {"id": "d2", "url": "http://b", "rank": 2, "file": "docs/d2.txt"},
                              {"id": "d3", "url": "http://c", "rank": 3, "file": "docs/d3.txt"}]}"#,
        )
        .unwrap();
        fs::write(dir.join("e1.txt"), "John Doe is a chemist.").unwrap();
        fs::write(dir.join("e2.txt"), "John Doe pitched for Boston.").unwrap();
        fs::write(dir.join("docs/d1.txt"), "<p>Chemist &amp; professor</p>").unwrap();
        fs::write(dir.join("docs/d2.txt"), "Boston pitcher").unwrap();
        fs::write(dir.join("docs/d3.txt"), "unrelated").unwrap();
        fs::write(
            dir.join(GOLD_FILE),
            "# gold\nd1\te1\nd2\te2\nd3\t__NOISE__\n",
        )
        .unwrap();
    }

    #[test]
    fn loads_fixture() {
        let tmp = tempfile::tempdir().unwrap();
        write_fixture(tmp.path());
        let task = load_task(tmp.path(), &LoadOptions::default()).unwrap();
        assert_eq!(task.name(), "John Doe");
        assert_eq!(task.entities().len(), 2);
        assert_eq!(task.documents().len(), 3);
        assert_eq!(task.gold_label("d3"), Some(&Label::Noise));
        assert!(task.documents()[0].tokens().contains(&"p".to_string()));

        let opts = LoadOptions {
            strip_html: true,
            ..Default::default()
        };
        let task = load_task(tmp.path(), &opts).unwrap();
        assert_eq!(task.documents()[0].tokens(), ["chemist", "professor"]);
    }

    #[test]
    fn unknown_entity_in_gold_is_integrity_error() {
        let tmp = tempfile::tempdir().unwrap();
        write_fixture(tmp.path());
        fs::write(
            tmp.path().join(GOLD_FILE),
            "d1\te9\nd2\te2\nd3\t__NOISE__\n",
        )
        .unwrap();
        let err = load_task(tmp.path(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            CorpusIoError::Integrity {
                source: CorpusError::UnknownEntityLabel { .. },
                ..
            }
        ));
    }

    #[test]
    fn missing_pieces() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_task(tmp.path(), &LoadOptions::default()),
            Err(CorpusIoError::MissingManifest(_))
        ));
        write_fixture(tmp.path());
        fs::remove_file(tmp.path().join("docs/d2.txt")).unwrap();
        assert!(matches!(
            load_task(tmp.path(), &LoadOptions::default()),
            Err(CorpusIoError::MissingFile(p)) if p.ends_with("docs/d2.txt")
        ));
        fs::remove_file(tmp.path().join(GOLD_FILE)).unwrap();
        assert!(matches!(
            load_task(tmp.path(), &LoadOptions::default()),
            Err(CorpusIoError::MissingGold(_))
        ));
    }

    #[test]
    fn gold_format_errors() {
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join(GOLD_FILE);
        fs::write(&p, "d1 e1\n").unwrap();
        assert!(matches!(
            read_gold(&p),
            Err(CorpusIoError::GoldFormat { line: 1, .. })
        ));
        fs::write(&p, "d1\te1\nd1\te2\n").unwrap();
        assert!(matches!(
            read_gold(&p),
            Err(CorpusIoError::GoldFormat { line: 2, .. })
        ));
        fs::write(&p, "# only\n\n").unwrap();
        assert!(read_gold(&p).unwrap().is_empty());
    }

    #[test]
    fn empty_documents_list() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(
            tmp.path().join(MANIFEST_FILE),
            r#"{"name": "x", "entities": [], "documents": []}"#,
        )
        .unwrap();
        fs::write(tmp.path().join(GOLD_FILE), "").unwrap();
        let task = load_task(tmp.path(), &LoadOptions::default()).unwrap();
        assert!(task.documents().is_empty());
    }

    #[test]
    fn validate_reports_each_task() {
        let tmp = tempfile::tempdir().unwrap();
        write_fixture(&tmp.path().join("a"));
        write_fixture(&tmp.path().join("b"));
        fs::remove_file(tmp.path().join("b").join(GOLD_FILE)).unwrap();
        let report = validate_corpus(tmp.path(), &LoadOptions::default()).unwrap();
        assert_eq!(report.len(), 2);
        assert!(report[0].passed());
        assert!(!report[1].passed());
        assert!(report[1].diagnostics[0].contains("missing gold"));
    }
}
