//! Feature index, tf-idf weighting and noise-profile construction.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use crate::corpus::Task;
use crate::math::{self, LogBase};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("unknown feature id {0}")]
    UnknownFeature(u32),
    #[error("unknown element {0:?}")]
    UnknownElement(ElementRef),
    #[error("unknown option `{0}`")]
    UnknownOption(String),
}

/// Dense id of a token in a [`FeatureIndex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureId(pub u32);

impl FeatureId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A non-noise corpus element: an entity profile or a result document,
/// addressed by its position in the task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementRef {
    Entity(usize),
    Document(usize),
}

/// Numerator of the idf fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum IdfNumerator {
    /// Number of distinct features of the weighted element, `|F_c|`.
    Paper,
    /// Number of corpus elements, `|C|`.
    #[default]
    Corpus,
}

impl IdfNumerator {
    pub fn as_str(self) -> &'static str {
        match self {
            IdfNumerator::Paper => "paper",
            IdfNumerator::Corpus => "corpus",
        }
    }
}

impl FromStr for IdfNumerator {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(IdfNumerator::Paper),
            "corpus" => Ok(IdfNumerator::Corpus),
            other => Err(FeatureError::UnknownOption(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureConfig {
    pub idf_numerator: IdfNumerator,
    pub log_base: LogBase,
}

/// Sparse weight vector keyed by [`FeatureId`], sorted by id, without
/// explicit zeros.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector {
    entries: Vec<(FeatureId, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from arbitrary pairs. Duplicate ids are summed and
    /// zero weights dropped.
    pub fn from_pairs<I: IntoIterator<Item = (FeatureId, f64)>>(pairs: I) -> Self {
        let mut entries: Vec<(FeatureId, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(f, _)| f);
        let mut merged: Vec<(FeatureId, f64)> = Vec::with_capacity(entries.len());
        for (f, w) in entries {
            debug_assert!(w.is_finite(), "non-finite weight for {f:?}");
            match merged.last_mut() {
                Some((last, acc)) if *last == f => *acc += w,
                _ => merged.push((f, w)),
            }
        }
        merged.retain(|&(_, w)| w != 0.0);
        FeatureVector { entries: merged }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FeatureId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, f: FeatureId) -> f64 {
        self.entries
            .binary_search_by_key(&f, |&(g, _)| g)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn contains(&self, f: FeatureId) -> bool {
        self.entries.binary_search_by_key(&f, |&(g, _)| g).is_ok()
    }

    /// Sum of weights.
    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    /// Sum of absolute weights.
    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        math::sqrt(self.entries.iter().map(|&(_, w)| w * w).sum())
    }

    /// Inner product over the shared support.
    pub fn dot(&self, other: &FeatureVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut acc = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Cosine of the angle between two vectors; 0 if either is empty.
    pub fn cosine(&self, other: &FeatureVector) -> f64 {
        let denom = self.l2_norm() * other.l2_norm();
        if denom == 0.0 {
            return 0.0;
        }
        self.dot(other) / denom
    }

    pub fn scaled(&self, factor: f64) -> FeatureVector {
        FeatureVector::from_pairs(self.entries.iter().map(|&(f, w)| (f, w * factor)))
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &FeatureVector, factor: f64) -> FeatureVector {
        if factor == 0.0 || other.is_empty() {
            return self.clone();
        }
        FeatureVector::from_pairs(
            self.iter()
                .chain(other.iter().map(|(f, w)| (f, w * factor))),
        )
    }
}

/// Scales a vector so its absolute weights sum to 1. Empty and all-zero
/// inputs yield the empty vector.
pub fn l1_normalize(v: &FeatureVector) -> FeatureVector {
    let norm = v.l1_norm();
    if norm == 0.0 {
        return FeatureVector::new();
    }
    v.scaled(1.0 / norm)
}

/// Feature counts of one element.
#[derive(Debug, Clone, Default, PartialEq)]
struct ElementStats {
    tf: Vec<(FeatureId, u32)>,
    len: u64,
    max_freq: u32,
}

impl ElementStats {
    fn freq(&self, f: FeatureId) -> u32 {
        self.tf
            .binary_search_by_key(&f, |&(g, _)| g)
            .map(|i| self.tf[i].1)
            .unwrap_or(0)
    }
}

/// Corpus-wide feature dictionary over `C = D ∪ E` with document
/// frequencies and per-element term frequencies.
///
/// Feature ids are assigned in first-appearance order, entities first and
/// then documents, each in task order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureIndex {
    vocab: Vec<String>,
    lookup: BTreeMap<String, FeatureId>,
    df: Vec<u32>,
    collection_freq: Vec<u64>,
    total_tokens: u64,
    entities: Vec<ElementStats>,
    documents: Vec<ElementStats>,
}

impl FeatureIndex {
    /// Indexes raw token lists of entity profiles and result documents.
    pub fn from_tokens<E, D, S>(entities: E, documents: D) -> Self
    where
        E: IntoIterator,
        E::Item: AsRef<[S]>,
        D: IntoIterator,
        D::Item: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut index = FeatureIndex::default();
        for tokens in entities {
            let stats = index.add_element(tokens.as_ref());
            index.entities.push(stats);
        }
        for tokens in documents {
            let stats = index.add_element(tokens.as_ref());
            index.documents.push(stats);
        }
        index
    }

    fn add_element<S: AsRef<str>>(&mut self, tokens: &[S]) -> ElementStats {
        let mut counts: BTreeMap<FeatureId, u32> = BTreeMap::new();
        for t in tokens {
            let t = t.as_ref();
            let id = match self.lookup.get(t) {
                Some(&id) => id,
                None => {
                    let id = FeatureId(self.vocab.len() as u32);
                    self.vocab.push(t.to_string());
                    self.lookup.insert(t.to_string(), id);
                    self.df.push(0);
                    self.collection_freq.push(0);
                    id
                }
            };
            *counts.entry(id).or_insert(0) += 1;
            self.collection_freq[id.index()] += 1;
        }
        for &f in counts.keys() {
            self.df[f.index()] += 1;
        }
        self.total_tokens += tokens.len() as u64;
        let max_freq = counts.values().copied().max().unwrap_or(0);
        ElementStats {
            tf: counts.into_iter().collect(),
            len: tokens.len() as u64,
            max_freq,
        }
    }

    pub fn num_features(&self) -> usize {
        self.vocab.len()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }

    /// `|C|`, the number of non-noise elements.
    pub fn num_elements(&self) -> usize {
        self.entities.len() + self.documents.len()
    }

    /// All non-noise elements, entities first.
    pub fn elements(&self) -> impl Iterator<Item = ElementRef> {
        (0..self.entities.len())
            .map(ElementRef::Entity)
            .chain((0..self.documents.len()).map(ElementRef::Document))
    }

    pub fn feature_id(&self, token: &str) -> Option<FeatureId> {
        self.lookup.get(token).copied()
    }

    pub fn token(&self, f: FeatureId) -> Option<&str> {
        self.vocab.get(f.index()).map(String::as_str)
    }

    /// Number of elements of `C` containing `f`.
    pub fn df(&self, f: FeatureId) -> Result<u32, FeatureError> {
        self.df
            .get(f.index())
            .copied()
            .ok_or(FeatureError::UnknownFeature(f.0))
    }

    /// Relative token frequency of `f` over all of `C`.
    pub fn background_probability(&self, f: FeatureId) -> f64 {
        if self.total_tokens == 0 {
            return 0.0;
        }
        self.collection_freq.get(f.index()).copied().unwrap_or(0) as f64 / self.total_tokens as f64
    }

    fn stats(&self, c: ElementRef) -> Result<&ElementStats, FeatureError> {
        match c {
            ElementRef::Entity(i) => self.entities.get(i),
            ElementRef::Document(i) => self.documents.get(i),
        }
        .ok_or(FeatureError::UnknownElement(c))
    }

    /// `freq(f, c)`.
    pub fn freq(&self, f: FeatureId, c: ElementRef) -> Result<u32, FeatureError> {
        Ok(self.stats(c)?.freq(f))
    }

    /// Token count `|c|`.
    pub fn length(&self, c: ElementRef) -> Result<u64, FeatureError> {
        Ok(self.stats(c)?.len)
    }

    /// Term frequencies of `c`, sorted by feature id.
    pub fn term_counts(&self, c: ElementRef) -> Result<&[(FeatureId, u32)], FeatureError> {
        Ok(&self.stats(c)?.tf)
    }

    /// `F_c`, the distinct features of `c`.
    pub fn feature_set(
        &self,
        c: ElementRef,
    ) -> Result<impl Iterator<Item = FeatureId> + '_, FeatureError> {
        Ok(self.stats(c)?.tf.iter().map(|&(f, _)| f))
    }

    /// Max-normalized term frequency times idf. Zero when `f` is absent from `c`.
    pub fn tfidf(
        &self,
        f: FeatureId,
        c: ElementRef,
        config: &FeatureConfig,
    ) -> Result<f64, FeatureError> {
        let df = self.df(f)?;
        let stats = self.stats(c)?;
        let freq = stats.freq(f);
        if freq == 0 {
            return Ok(0.0);
        }
        Ok(self.weight(freq, df, stats, config))
    }

    fn weight(&self, freq: u32, df: u32, stats: &ElementStats, config: &FeatureConfig) -> f64 {
        let numerator = match config.idf_numerator {
            IdfNumerator::Paper => stats.tf.len(),
            IdfNumerator::Corpus => self.num_elements(),
        } as f64;
        let tf = freq as f64 / stats.max_freq as f64;
        tf * config.log_base.log(numerator / df as f64)
    }

    /// tf-idf vector of `c` over `F_c`; zero weights are omitted.
    pub fn vectorize(
        &self,
        c: ElementRef,
        config: &FeatureConfig,
    ) -> Result<FeatureVector, FeatureError> {
        let stats = self.stats(c)?;
        Ok(FeatureVector::from_pairs(stats.tf.iter().map(
            |&(f, freq)| (f, self.weight(freq, self.df[f.index()], stats, config)),
        )))
    }
}

/// Indexes the entity profiles and result documents of a task.
pub fn build_index(task: &Task) -> FeatureIndex {
    FeatureIndex::from_tokens(
        task.entities().iter().map(|e| e.tokens()),
        task.documents().iter().map(|d| d.tokens()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NoiseKind {
    Union,
    Intersection,
}

/// How pairwise intersections are combined into the intersection-noise set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum IntersectionSemantics {
    /// Union over all (entity, other element) pairs of `F_e ∩ F_c`.
    #[default]
    Exists,
    /// Intersection over all such pairs.
    Forall,
}

impl IntersectionSemantics {
    pub fn as_str(self) -> &'static str {
        match self {
            IntersectionSemantics::Exists => "exists",
            IntersectionSemantics::Forall => "forall",
        }
    }
}

impl FromStr for IntersectionSemantics {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exists" => Ok(IntersectionSemantics::Exists),
            "forall" => Ok(IntersectionSemantics::Forall),
            other => Err(FeatureError::UnknownOption(other.to_string())),
        }
    }
}

/// Artificial noise entity: a feature set with equal weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseProfile {
    pub kind: NoiseKind,
    pub vector: FeatureVector,
}

impl NoiseProfile {
    fn uniform(kind: NoiseKind, features: Vec<FeatureId>) -> Self {
        let w = 1.0 / features.len() as f64;
        NoiseProfile {
            kind,
            vector: FeatureVector::from_pairs(features.into_iter().map(|f| (f, w))),
        }
    }

    /// Number of features in the profile.
    pub fn len(&self) -> usize {
        self.vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vector.is_empty()
    }
}

/// Every feature of every entity profile, equally weighted.
pub fn union_noise(index: &FeatureIndex) -> NoiseProfile {
    let mut present = alloc::vec![false; index.num_features()];
    for e in &index.entities {
        for &(f, _) in &e.tf {
            present[f.index()] = true;
        }
    }
    NoiseProfile::uniform(NoiseKind::Union, selected(&present))
}

/// Features shared between entity profiles and other corpus elements,
/// equally weighted.
///
/// A feature of `F_e` lies in `F_e ∩ F_c` for some other element `c`
/// exactly when its document frequency is at least 2, and it lies in every
/// such pairwise intersection exactly when it occurs in all of `C`. Both
/// sets are empty when no (entity, other element) pair exists.
pub fn intersection_noise(index: &FeatureIndex, semantics: IntersectionSemantics) -> NoiseProfile {
    let n = index.num_elements();
    if index.num_entities() == 0 || n < 2 {
        return NoiseProfile::uniform(NoiseKind::Intersection, Vec::new());
    }
    let mut present = alloc::vec![false; index.num_features()];
    match semantics {
        IntersectionSemantics::Exists => {
            for e in &index.entities {
                for &(f, _) in &e.tf {
                    if index.df[f.index()] >= 2 {
                        present[f.index()] = true;
                    }
                }
            }
        }
        IntersectionSemantics::Forall => {
            for (f, &df) in index.df.iter().enumerate() {
                present[f] = df as usize == n;
            }
        }
    }
    NoiseProfile::uniform(NoiseKind::Intersection, selected(&present))
}

fn selected(mask: &[bool]) -> Vec<FeatureId> {
    mask.iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(i, _)| FeatureId(i as u32))
        .collect()
}
