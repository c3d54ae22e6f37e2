//! Disambiguation tasks and unigram feature extraction.
//!
//! A [`Task`] bundles one ambiguous name with the entity profiles sharing that
//! name, the retrieved result documents and the gold alignment of documents to
//! entities (or to the noise label).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Literal used for the noise label in gold files and reports.
pub const NOISE_LABEL: &str = "__NOISE__";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("duplicate entity id `{0}`")]
    DuplicateEntity(String),
    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),
    #[error("entity id `{0}` is reserved")]
    ReservedId(String),
    #[error("document `{0}` has rank 0 (ranks start at 1)")]
    InvalidRank(String),
    #[error("gold label of document `{doc}` refers to unknown entity `{entity}`")]
    UnknownEntityLabel { doc: String, entity: String },
    #[error("document `{0}` has no gold label")]
    MissingGoldLabel(String),
    #[error("gold label given for unknown document `{0}`")]
    UnknownGoldDocument(String),
}

/// Target of a document: a real entity or the artificial noise entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Label {
    Entity(String),
    Noise,
}

impl Label {
    /// Parses the gold-file / report representation.
    pub fn parse(s: &str) -> Label {
        if s == NOISE_LABEL {
            Label::Noise
        } else {
            Label::Entity(s.to_string())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Label::Entity(id) => id,
            Label::Noise => NOISE_LABEL,
        }
    }

    pub fn is_noise(&self) -> bool {
        matches!(self, Label::Noise)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Function words dropped when [`Tokenizer::stopwords`] is enabled.
pub const STOP_WORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
    "but", "by", "can", "could", "did", "do", "does", "for", "from", "had", "has", "have", "he",
    "her", "his", "how", "i", "if", "in", "into", "is", "it", "its", "may", "more", "most", "my",
    "no", "not", "of", "on", "one", "or", "other", "our", "out", "she", "so", "some", "such",
    "than", "that", "the", "their", "them", "then", "there", "these", "they", "this", "to", "up",
    "was", "we", "were", "what", "when", "where", "which", "who", "will", "with", "would", "you",
    "your",
];

/// Lowercasing unigram tokenizer.
///
/// Text is lowercased and split on every maximal run of non-alphanumeric
/// characters. Digit-only tokens are kept. No stemming.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tokenizer {
    /// Drop tokens listed in [`STOP_WORDS`].
    pub stopwords: bool,
}

impl Tokenizer {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        // Lowercase first: some characters expand into sequences that contain
        // combining marks, which must go through the same split rule.
        let lowered = text.to_lowercase();
        lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .filter(|t| !self.stopwords || STOP_WORDS.binary_search(t).is_err())
            .map(ToString::to_string)
            .collect()
    }
}

/// Tokenizes with the default (no stop-word removal) configuration.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

/// Absolute frequency of each distinct token.
pub fn term_frequencies<S: AsRef<str>>(tokens: &[S]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_ref().to_string()).or_insert(0) += 1;
    }
    counts
}

/// A knowledge-base article about one individual.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntityProfile {
    pub id: String,
    pub title: String,
    pub text: String,
    tokens: Vec<String>,
}

impl EntityProfile {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        text: impl Into<String>,
        tokenizer: &Tokenizer,
    ) -> Self {
        let text = text.into();
        let tokens = tokenizer.tokenize(&text);
        EntityProfile {
            id: id.into(),
            title: title.into(),
            text,
            tokens,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// One retrieved search result.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResultDocument {
    pub id: String,
    pub url: String,
    pub rank: u32,
    pub text: String,
    tokens: Vec<String>,
}

impl ResultDocument {
    pub fn new(
        id: impl Into<String>,
        url: impl Into<String>,
        rank: u32,
        text: impl Into<String>,
        tokenizer: &Tokenizer,
    ) -> Self {
        let text = text.into();
        let tokens = tokenizer.tokenize(&text);
        ResultDocument {
            id: id.into(),
            url: url.into(),
            rank,
            text,
            tokens,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Gold label of every result document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoldAlignment {
    labels: BTreeMap<String, Label>,
}

impl GoldAlignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a label, returning the previous one for the same document.
    pub fn insert(&mut self, doc_id: impl Into<String>, label: Label) -> Option<Label> {
        self.labels.insert(doc_id.into(), label)
    }

    pub fn get(&self, doc_id: &str) -> Option<&Label> {
        self.labels.get(doc_id)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Label)> {
        self.labels.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl<K: Into<String>> FromIterator<(K, Label)> for GoldAlignment {
    fn from_iter<I: IntoIterator<Item = (K, Label)>>(iter: I) -> Self {
        GoldAlignment {
            labels: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

/// One ambiguous name with its entities, result documents and gold labels.
///
/// Construction through [`Task::new`] checks id uniqueness and that the gold
/// alignment labels exactly the document set with known entities or noise.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Task {
    name: String,
    entities: Vec<EntityProfile>,
    documents: Vec<ResultDocument>,
    gold: GoldAlignment,
}

impl Task {
    pub fn new(
        name: impl Into<String>,
        entities: Vec<EntityProfile>,
        documents: Vec<ResultDocument>,
        gold: GoldAlignment,
    ) -> Result<Self, CorpusError> {
        let mut entity_ids = BTreeSet::new();
        for e in &entities {
            if e.id == NOISE_LABEL {
                return Err(CorpusError::ReservedId(e.id.clone()));
            }
            if !entity_ids.insert(e.id.as_str()) {
                return Err(CorpusError::DuplicateEntity(e.id.clone()));
            }
        }
        let mut doc_ids = BTreeSet::new();
        for d in &documents {
            if !doc_ids.insert(d.id.as_str()) {
                return Err(CorpusError::DuplicateDocument(d.id.clone()));
            }
            if d.rank == 0 {
                return Err(CorpusError::InvalidRank(d.id.clone()));
            }
            match gold.get(&d.id) {
                None => return Err(CorpusError::MissingGoldLabel(d.id.clone())),
                Some(Label::Entity(e)) if !entity_ids.contains(e.as_str()) => {
                    return Err(CorpusError::UnknownEntityLabel {
                        doc: d.id.clone(),
                        entity: e.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        if let Some((doc, _)) = gold.iter().find(|(doc, _)| !doc_ids.contains(doc)) {
            return Err(CorpusError::UnknownGoldDocument(doc.to_string()));
        }
        Ok(Task {
            name: name.into(),
            entities,
            documents,
            gold,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entities(&self) -> &[EntityProfile] {
        &self.entities
    }

    pub fn documents(&self) -> &[ResultDocument] {
        &self.documents
    }

    pub fn gold(&self) -> &GoldAlignment {
        &self.gold
    }

    /// Gold label of a document of this task.
    pub fn gold_label(&self, doc_id: &str) -> Option<&Label> {
        self.gold.get(doc_id)
    }
}
