//! Membership scoring functions and the argmax mapping of documents onto the
//! extended entity set `E' = E ∪ {noise}`.
//!
//! Three vector-space scores (cosine, dot product, smoothed dot product) and
//! two naive Bayes log-likelihoods (Bernoulli with Laplace smoothing,
//! multinomial with Jelinek-Mercer smoothing) are available. Candidates are
//! ordered as the task's entities followed by the noise entity; ties go to
//! the earliest candidate, so real entities win over noise.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::{Label, Task};
use crate::features::{
    build_index, intersection_noise, l1_normalize, union_noise, ElementRef, FeatureConfig,
    FeatureId, FeatureIndex, FeatureVector, IntersectionSemantics, NoiseProfile,
};
use crate::math;

/// Probabilities below this value are clamped before taking logs.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("extended entity set is empty")]
    EmptyEntitySet,
    #[error("lambda must lie in (0, 1), got {0}")]
    InvalidLambda(f64),
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("unknown option `{0}`")]
    UnknownOption(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelKind {
    #[cfg_attr(feature = "serde", serde(rename = "cosine"))]
    Cosine,
    #[cfg_attr(feature = "serde", serde(rename = "score"))]
    Score,
    #[cfg_attr(feature = "serde", serde(rename = "score-smoothed"))]
    ScoreSmoothed,
    #[cfg_attr(feature = "serde", serde(rename = "nb-bernoulli"))]
    NbBernoulliLaplace,
    #[cfg_attr(feature = "serde", serde(rename = "nb-multinomial"))]
    NbMultinomialJm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Cosine,
        ModelKind::Score,
        ModelKind::ScoreSmoothed,
        ModelKind::NbBernoulliLaplace,
        ModelKind::NbMultinomialJm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cosine => "cosine",
            ModelKind::Score => "score",
            ModelKind::ScoreSmoothed => "score-smoothed",
            ModelKind::NbBernoulliLaplace => "nb-bernoulli",
            ModelKind::NbMultinomialJm => "nb-multinomial",
        }
    }

    pub fn is_probabilistic(self) -> bool {
        matches!(
            self,
            ModelKind::NbBernoulliLaplace | ModelKind::NbMultinomialJm
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ModelError::UnknownOption(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NoiseMode {
    #[default]
    None,
    Union,
    Intersection,
}

impl NoiseMode {
    pub const ALL: [NoiseMode; 3] = [NoiseMode::None, NoiseMode::Union, NoiseMode::Intersection];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseMode::None => "none",
            NoiseMode::Union => "union",
            NoiseMode::Intersection => "intersection",
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NoiseMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ModelError::UnknownOption(s.to_string()))
    }
}

/// Denominator of the Laplace likelihood estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LaplaceDenominator {
    /// `Σ w(f, e) + α`.
    #[default]
    Paper,
    /// `Σ w(f, e) + α · |F|`.
    PerFeature,
}

impl LaplaceDenominator {
    pub fn as_str(self) -> &'static str {
        match self {
            LaplaceDenominator::Paper => "paper",
            LaplaceDenominator::PerFeature => "per_feature",
        }
    }
}

impl FromStr for LaplaceDenominator {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(LaplaceDenominator::Paper),
            "per_feature" => Ok(LaplaceDenominator::PerFeature),
            other => Err(ModelError::UnknownOption(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelConfig {
    pub model: ModelKind,
    /// Laplace smoothing factor.
    pub alpha: f64,
    /// Jelinek-Mercer background weight.
    pub lambda: f64,
    pub noise: NoiseMode,
    pub intersection_semantics: IntersectionSemantics,
    pub laplace_denominator: LaplaceDenominator,
    pub features: FeatureConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            model: ModelKind::ScoreSmoothed,
            alpha: 0.01,
            lambda: 0.5,
            noise: NoiseMode::Intersection,
            intersection_semantics: IntersectionSemantics::Exists,
            laplace_denominator: LaplaceDenominator::Paper,
            features: FeatureConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn new(model: ModelKind, noise: NoiseMode) -> Self {
        ModelConfig {
            model,
            noise,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ModelError::InvalidAlpha(self.alpha));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(ModelError::InvalidLambda(self.lambda));
        }
        Ok(())
    }
}

/// Cosine similarity of two sparse vectors; 0 if either is empty.
pub fn cosine_sim(d: &FeatureVector, e: &FeatureVector) -> f64 {
    d.cosine(e)
}

/// `score(d, e) = Σ_f w(f, e) · w(f, d)`.
pub fn score(d: &FeatureVector, e: &FeatureVector) -> f64 {
    d.dot(e)
}

/// Entity vector pulled towards similar documents:
/// `l1(e) + Σ_d cos(e, d) · l1(d)` over every document vector given.
pub fn smoothed_profile(entity: &FeatureVector, documents: &[FeatureVector]) -> FeatureVector {
    let mut pairs: Vec<(FeatureId, f64)> = l1_normalize(entity).iter().collect();
    for d in documents {
        let sim = entity.cosine(d);
        if sim != 0.0 {
            pairs.extend(l1_normalize(d).iter().map(|(f, w)| (f, sim * w)));
        }
    }
    FeatureVector::from_pairs(pairs)
}

/// `score'(d, e)`: dot product of a smoothed profile with a document vector.
pub fn score_smoothed(d: &FeatureVector, smoothed: &FeatureVector) -> f64 {
    d.dot(smoothed)
}

/// `ln(|d|! / Π_f freq(f, d)!)`, the multinomial coefficient that the
/// multinomial score leaves out because it does not depend on the entity.
pub fn multinomial_log_coefficient(term_counts: &[(FeatureId, u32)]) -> f64 {
    let total: u64 = term_counts.iter().map(|&(_, n)| n as u64).sum();
    math::ln_factorial(total)
        - term_counts
            .iter()
            .map(|&(_, n)| math::ln_factorial(n as u64))
            .sum::<f64>()
}

fn floored_ln(p: f64, floored: &mut usize) -> f64 {
    if p >= PROBABILITY_FLOOR {
        math::ln(p)
    } else {
        *floored += 1;
        math::ln(PROBABILITY_FLOOR)
    }
}

/// Laplace prior over candidates: `(Σ_f w(f, e) + α) / (Σ_{e'} Σ_f w(f, e') + α)`.
pub fn laplace_priors(weights: &[FeatureVector], alpha: f64) -> Vec<f64> {
    let total: f64 = weights.iter().map(FeatureVector::sum).sum();
    weights
        .iter()
        .map(|w| (w.sum() + alpha) / (total + alpha))
        .collect()
}

/// Bernoulli naive Bayes over the distinct features of a document, with
/// Laplace-smoothed estimates from candidate weight vectors.
#[derive(Debug, Clone)]
pub struct BernoulliLaplace {
    weights: Vec<FeatureVector>,
    priors: Vec<f64>,
    denominators: Vec<f64>,
    alpha: f64,
}

impl BernoulliLaplace {
    /// `weights[i]` is `w(·, e_i)` for candidate `i`; `num_features` is `|F|`
    /// and only matters for [`LaplaceDenominator::PerFeature`].
    pub fn new(
        weights: Vec<FeatureVector>,
        alpha: f64,
        denominator: LaplaceDenominator,
        num_features: usize,
    ) -> Self {
        let priors = laplace_priors(&weights, alpha);
        let denominators = weights
            .iter()
            .map(|w| match denominator {
                LaplaceDenominator::Paper => w.sum() + alpha,
                LaplaceDenominator::PerFeature => w.sum() + alpha * num_features as f64,
            })
            .collect();
        BernoulliLaplace {
            weights,
            priors,
            denominators,
            alpha,
        }
    }

    pub fn prior(&self, candidate: usize) -> f64 {
        self.priors[candidate]
    }

    /// `p(f | e)`.
    pub fn likelihood(&self, candidate: usize, f: FeatureId) -> f64 {
        (self.weights[candidate].get(f) + self.alpha) / self.denominators[candidate]
    }

    /// `ln p(e) + Σ_{f ∈ F_d} ln p(f | e)`.
    pub fn log_score<I>(&self, candidate: usize, features: I, floored: &mut usize) -> f64
    where
        I: IntoIterator<Item = FeatureId>,
    {
        features
            .into_iter()
            .fold(floored_ln(self.priors[candidate], floored), |acc, f| {
                acc + floored_ln(self.likelihood(candidate, f), floored)
            })
    }
}

/// Multinomial naive Bayes with Jelinek-Mercer smoothing against the corpus
/// token distribution.
#[derive(Debug, Clone)]
pub struct MultinomialJm {
    ml: Vec<FeatureVector>,
    priors: Vec<f64>,
    background: Vec<f64>,
    lambda: f64,
}

impl MultinomialJm {
    /// `ml[i]` holds the maximum-likelihood estimates `p(f | F_{e_i})`,
    /// `priors[i]` the candidate prior and `background[f]` the corpus
    /// probability of feature `f`.
    pub fn new(
        ml: Vec<FeatureVector>,
        priors: Vec<f64>,
        background: Vec<f64>,
        lambda: f64,
    ) -> Self {
        MultinomialJm {
            ml,
            priors,
            background,
            lambda,
        }
    }

    pub fn prior(&self, candidate: usize) -> f64 {
        self.priors[candidate]
    }

    /// `(1 - λ) p_ML(f | e) + λ p(f | F)`.
    pub fn probability(&self, candidate: usize, f: FeatureId) -> f64 {
        let bg = self.background.get(f.index()).copied().unwrap_or(0.0);
        (1.0 - self.lambda) * self.ml[candidate].get(f) + self.lambda * bg
    }

    /// `ln p(e) + Σ_{f ∈ F_d} freq(f, d) · ln p_λ(f | e)`.
    pub fn log_score(
        &self,
        candidate: usize,
        term_counts: &[(FeatureId, u32)],
        floored: &mut usize,
    ) -> f64 {
        term_counts.iter().fold(
            floored_ln(self.priors[candidate], floored),
            |acc, &(f, n)| acc + n as f64 * floored_ln(self.probability(candidate, f), floored),
        )
    }
}

#[derive(Debug, Clone)]
enum Scorer {
    Cosine(Vec<FeatureVector>),
    Score(Vec<FeatureVector>),
    Smoothed(Vec<FeatureVector>),
    Bernoulli(BernoulliLaplace),
    Multinomial(MultinomialJm),
}

/// Per-task scoring state for one configuration: the feature index, the
/// document vectors and the candidate profiles or estimates.
#[derive(Debug, Clone)]
pub struct Classifier {
    config: ModelConfig,
    candidates: Vec<Label>,
    index: FeatureIndex,
    doc_vectors: Vec<FeatureVector>,
    noise: Option<NoiseProfile>,
    scorer: Scorer,
}

impl Classifier {
    pub fn new(task: &Task, config: &ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let index = build_index(task);
        let fc = config.features;
        let noise = match config.noise {
            NoiseMode::None => None,
            NoiseMode::Union => Some(union_noise(&index)),
            NoiseMode::Intersection => {
                Some(intersection_noise(&index, config.intersection_semantics))
            }
        };
        let mut candidates: Vec<Label> = task
            .entities()
            .iter()
            .map(|e| Label::Entity(e.id.clone()))
            .collect();
        if noise.is_some() {
            candidates.push(Label::Noise);
        }
        if candidates.is_empty() {
            return Err(ModelError::EmptyEntitySet);
        }

        let vectorize = |c| index.vectorize(c, &fc).expect("element of its own index");
        let doc_vectors: Vec<FeatureVector> = (0..index.num_documents())
            .map(|i| vectorize(ElementRef::Document(i)))
            .collect();
        let entity_vectors: Vec<FeatureVector> = (0..index.num_entities())
            .map(|i| vectorize(ElementRef::Entity(i)))
            .collect();
        let with_noise = |mut v: Vec<FeatureVector>| {
            if let Some(n) = &noise {
                v.push(n.vector.clone());
            }
            v
        };

        let scorer = match config.model {
            ModelKind::Cosine => Scorer::Cosine(with_noise(entity_vectors)),
            ModelKind::Score => Scorer::Score(with_noise(entity_vectors)),
            ModelKind::ScoreSmoothed => Scorer::Smoothed(with_noise(
                entity_vectors
                    .iter()
                    .map(|e| smoothed_profile(e, &doc_vectors))
                    .collect(),
            )),
            ModelKind::NbBernoulliLaplace => Scorer::Bernoulli(BernoulliLaplace::new(
                with_noise(entity_vectors),
                config.alpha,
                config.laplace_denominator,
                index.num_features(),
            )),
            ModelKind::NbMultinomialJm => {
                let priors = laplace_priors(&with_noise(entity_vectors), config.alpha);
                let mut ml: Vec<FeatureVector> = (0..index.num_entities())
                    .map(|i| maximum_likelihood(&index, ElementRef::Entity(i)))
                    .collect();
                if let Some(n) = &noise {
                    ml.push(n.vector.clone());
                }
                let background = (0..index.num_features())
                    .map(|f| index.background_probability(FeatureId(f as u32)))
                    .collect();
                Scorer::Multinomial(MultinomialJm::new(ml, priors, background, config.lambda))
            }
        };

        Ok(Classifier {
            config: *config,
            candidates,
            index,
            doc_vectors,
            noise,
            scorer,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// `E'` in scoring order: entities in task order, then noise if enabled.
    pub fn candidates(&self) -> &[Label] {
        &self.candidates
    }

    pub fn index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn document_vector(&self, doc: usize) -> &FeatureVector {
        &self.doc_vectors[doc]
    }

    pub fn noise_profile(&self) -> Option<&NoiseProfile> {
        self.noise.as_ref()
    }

    /// Scores of document `doc` against every candidate, plus the number of
    /// probabilities that hit the floor.
    pub fn score_document(&self, doc: usize) -> (Vec<f64>, usize) {
        let d = &self.doc_vectors[doc];
        let element = ElementRef::Document(doc);
        let mut floored = 0;
        let n = self.candidates.len();
        let scores = match &self.scorer {
            Scorer::Cosine(p) => p.iter().map(|e| cosine_sim(d, e)).collect(),
            Scorer::Score(p) => p.iter().map(|e| score(d, e)).collect(),
            Scorer::Smoothed(p) => p.iter().map(|e| score_smoothed(d, e)).collect(),
            Scorer::Bernoulli(nb) => {
                let features: Vec<FeatureId> = self
                    .index
                    .feature_set(element)
                    .expect("document of its own index")
                    .collect();
                (0..n)
                    .map(|c| nb.log_score(c, features.iter().copied(), &mut floored))
                    .collect()
            }
            Scorer::Multinomial(nb) => {
                let counts = self
                    .index
                    .term_counts(element)
                    .expect("document of its own index");
                (0..n)
                    .map(|c| nb.log_score(c, counts, &mut floored))
                    .collect()
            }
        };
        (scores, floored)
    }

    /// Maps every document of `task` to its best-scoring candidate.
    ///
    /// `task` must be the task this classifier was built from.
    pub fn assign(&self, task: &Task) -> Assignment {
        let mut floored_events = 0;
        let rows = task
            .documents()
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (scores, floored) = self.score_document(i);
                floored_events += floored;
                let best = argmax(&scores);
                AssignmentRow {
                    doc_id: d.id.clone(),
                    assigned: self.candidates[best].clone(),
                    scores,
                }
            })
            .collect();
        Assignment {
            candidates: self.candidates.clone(),
            rows,
            floored_events,
        }
    }
}

fn maximum_likelihood(index: &FeatureIndex, c: ElementRef) -> FeatureVector {
    let len = index.length(c).expect("element of its own index");
    if len == 0 {
        return FeatureVector::new();
    }
    FeatureVector::from_pairs(
        index
            .term_counts(c)
            .expect("element of its own index")
            .iter()
            .map(|&(f, n)| (f, n as f64 / len as f64)),
    )
}

/// Index of the maximum; the first index wins ties and NaN never wins.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, &s) in scores.iter().enumerate() {
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Maps each document of `task` to the candidate of `E'` maximizing the
/// configured score.
pub fn map_documents(task: &Task, config: &ModelConfig) -> Result<Assignment, ModelError> {
    Ok(Classifier::new(task, config)?.assign(task))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssignmentRow {
    pub doc_id: String,
    pub assigned: Label,
    /// Scores aligned with [`Assignment::candidates`]; log-domain for the
    /// naive Bayes models.
    pub scores: Vec<f64>,
}

impl AssignmentRow {
    pub fn assigned_score(&self, candidates: &[Label]) -> f64 {
        candidates
            .iter()
            .position(|c| *c == self.assigned)
            .map(|i| self.scores[i])
            .unwrap_or(f64::NAN)
    }
}

/// Document → candidate mapping with the full score matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    pub candidates: Vec<Label>,
    /// One row per document, in task order.
    pub rows: Vec<AssignmentRow>,
    /// Probabilities clamped to [`PROBABILITY_FLOOR`].
    pub floored_events: usize,
}

impl Assignment {
    pub fn get(&self, doc_id: &str) -> Option<&Label> {
        self.rows
            .iter()
            .find(|r| r.doc_id == doc_id)
            .map(|r| &r.assigned)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Label)> {
        self.rows.iter().map(|r| (r.doc_id.as_str(), &r.assigned))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntityProfile, GoldAlignment, ResultDocument, Tokenizer};
    use alloc::vec;
    use proptest::prelude::*;

    fn fv(pairs: &[(u32, f64)]) -> FeatureVector {
        FeatureVector::from_pairs(pairs.iter().map(|&(f, w)| (FeatureId(f), w)))
    }

    fn task(entities: &[&str], docs: &[&str]) -> Task {
        let t = Tokenizer::default();
        let ents = entities
            .iter()
            .enumerate()
            .map(|(i, s)| EntityProfile::new(alloc::format!("e{}", i + 1), "", *s, &t))
            .collect();
        let ds: Vec<ResultDocument> = docs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                ResultDocument::new(alloc::format!("d{}", i + 1), "", i as u32 + 1, *s, &t)
            })
            .collect();
        let gold: GoldAlignment = ds.iter().map(|d| (d.id.clone(), Label::Noise)).collect();
        Task::new("t", ents, ds, gold).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let v = fv(&[(0, 1.0), (1, 2.0)]);
        assert!((cosine_sim(&v, &v) - 1.0).abs() < 1e-15);
        assert_eq!(cosine_sim(&fv(&[(0, 1.0)]), &fv(&[(1, 1.0)])), 0.0);
        let c = cosine_sim(&fv(&[(0, 1.0), (1, 1.0)]), &fv(&[(0, 1.0)]));
        assert!((c - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(cosine_sim(&v, &FeatureVector::new()), 0.0);
    }

    #[test]
    fn score_examples() {
        let s = score(&fv(&[(0, 0.5), (1, 0.5)]), &fv(&[(0, 0.2), (2, 0.3)]));
        assert!((s - 0.1).abs() < 1e-15);
        assert_eq!(score(&fv(&[(0, 3.0)]), &FeatureVector::new()), 0.0);
        let v = fv(&[(0, 3.0), (4, 4.0)]);
        assert!((score(&v, &v) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn smoothed_profile_examples() {
        let e = fv(&[(0, 1.0)]);
        assert_eq!(smoothed_profile(&e, &[]), l1_normalize(&e));
        let orthogonal = fv(&[(5, 1.0)]);
        assert_eq!(smoothed_profile(&e, &[orthogonal]), l1_normalize(&e));

        let d = fv(&[(0, 1.0), (1, 1.0)]);
        let s = smoothed_profile(&e, &[d]);
        // Frozen from hand computation: 1 + 0.5/sqrt(2) and 0.5/sqrt(2).
        assert!((s.get(FeatureId(0)) - 1.353_553_390_593_273_8).abs() < 1e-15);
        assert!((s.get(FeatureId(1)) - 0.353_553_390_593_273_8).abs() < 1e-15);

        let query = fv(&[(0, 0.3466)]);
        let got = score_smoothed(&query, &s);
        assert!((got - 1.353_553_390_593_273_8 * 0.3466).abs() < 1e-15);
        assert!((got - 0.4692).abs() < 1e-4);
        assert_eq!(score_smoothed(&FeatureVector::new(), &s), 0.0);
        assert_eq!(
            score_smoothed(&query, &smoothed_profile(&e, &[])),
            score(&query, &l1_normalize(&e))
        );
    }

    #[test]
    fn bernoulli_examples() {
        let nb = BernoulliLaplace::new(vec![fv(&[(0, 1.0)])], 0.01, LaplaceDenominator::Paper, 3);
        assert!((nb.likelihood(0, FeatureId(2)) - 0.01 / 1.01).abs() < 1e-15);

        let nb = BernoulliLaplace::new(
            vec![fv(&[(0, 0.5), (1, 0.5)])],
            0.01,
            LaplaceDenominator::Paper,
            2,
        );
        let mut floored = 0;
        let s = nb.log_score(0, [FeatureId(0)], &mut floored);
        let prior = nb.prior(0);
        assert!((prior - 1.0).abs() < 1e-15);
        assert!((s - (prior.ln() + (0.51f64 / 1.01).ln())).abs() < 1e-15);
        assert!((s.exp() - prior * 0.51 / 1.01).abs() < 1e-15);
        assert_eq!(nb.log_score(0, [], &mut floored), prior.ln());
        assert_eq!(floored, 0);
    }

    #[test]
    fn bernoulli_per_feature_denominator() {
        let nb = BernoulliLaplace::new(
            vec![fv(&[(0, 1.0)])],
            0.01,
            LaplaceDenominator::PerFeature,
            10,
        );
        assert!((nb.likelihood(0, FeatureId(3)) - 0.01 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn jelinek_mercer_examples() {
        let nb = MultinomialJm::new(vec![fv(&[(0, 0.2)])], vec![1.0], vec![0.1, 0.4], 0.5);
        assert!((nb.probability(0, FeatureId(0)) - 0.15).abs() < 1e-15);
        assert!((nb.probability(0, FeatureId(1)) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn floor_is_counted() {
        let nb = MultinomialJm::new(vec![FeatureVector::new()], vec![1.0], vec![0.0], 0.5);
        let mut floored = 0;
        let s = nb.log_score(0, &[(FeatureId(0), 2)], &mut floored);
        assert_eq!(floored, 1);
        assert!((s - 2.0 * PROBABILITY_FLOOR.ln()).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        let mut c = ModelConfig {
            lambda: 1.0,
            ..Default::default()
        };
        assert_eq!(c.validate(), Err(ModelError::InvalidLambda(1.0)));
        c.lambda = 0.0;
        assert!(c.validate().is_err());
        c.lambda = 0.5;
        c.alpha = 0.0;
        assert_eq!(c.validate(), Err(ModelError::InvalidAlpha(0.0)));
    }

    #[test]
    fn identical_document_maps_to_entity_under_cosine() {
        let t = task(
            &["quantum physics lab", "football striker goal"],
            &["football striker goal"],
        );
        let a = map_documents(&t, &ModelConfig::new(ModelKind::Cosine, NoiseMode::None)).unwrap();
        assert_eq!(a.get("d1"), Some(&Label::Entity("e2".into())));
    }

    #[test]
    fn document_sharing_only_noise_features_maps_to_noise() {
        let cfg = ModelConfig::new(ModelKind::Score, NoiseMode::Union);
        // d1 overlaps e1 only on "common", which e1 mentions once against four
        // "alpha"s; the union profile weights it 1/3.
        let t = task(
            &["alpha alpha alpha alpha common", "beta"],
            &["common zeta", "alpha beta gamma"],
        );
        let c = Classifier::new(&t, &cfg).unwrap();
        let (scores, _) = c.score_document(0);
        let ln2 = core::f64::consts::LN_2;
        assert!((scores[0] - 0.25 * ln2 * ln2).abs() < 1e-12);
        assert_eq!(scores[1], 0.0);
        assert!((scores[2] - ln2 / 3.0).abs() < 1e-12);
        assert_eq!(c.assign(&t).get("d1"), Some(&Label::Noise));

        // "common" in every element has zero idf: all scores vanish and the
        // tie goes to the first entity.
        let t = task(&["common alpha", "common beta"], &["common zeta"]);
        let c = Classifier::new(&t, &cfg).unwrap();
        assert_eq!(c.score_document(0).0, vec![0.0, 0.0, 0.0]);
        assert_eq!(c.assign(&t).get("d1"), Some(&Label::Entity("e1".into())));
    }

    #[test]
    fn all_equal_scores_pick_first_entity() {
        let t = task(&["a", "b"], &["z"]);
        for model in ModelKind::ALL {
            let a = map_documents(&t, &ModelConfig::new(model, NoiseMode::Union)).unwrap();
            let row = &a.rows[0];
            if row.scores.iter().all(|&s| s == row.scores[0]) {
                assert_eq!(row.assigned, Label::Entity("e1".into()));
            }
        }
        assert_eq!(argmax(&[1.0, 1.0, 1.0]), 0);
        assert_eq!(argmax(&[f64::NAN, 0.5]), 1);
    }

    #[test]
    fn empty_extended_set_is_an_error() {
        let t = task(&[], &["a"]);
        assert_eq!(
            map_documents(&t, &ModelConfig::new(ModelKind::Score, NoiseMode::None)).unwrap_err(),
            ModelError::EmptyEntitySet
        );
        // Noise alone is a valid extended set.
        let a = map_documents(&t, &ModelConfig::new(ModelKind::Score, NoiseMode::Union)).unwrap();
        assert_eq!(a.get("d1"), Some(&Label::Noise));
    }

    #[test]
    fn empty_document_nb_is_log_prior() {
        let t = task(&["a b", "c"], &[""]);
        let c = Classifier::new(
            &t,
            &ModelConfig::new(ModelKind::NbBernoulliLaplace, NoiseMode::Union),
        )
        .unwrap();
        let (scores, _) = c.score_document(0);
        let Scorer::Bernoulli(nb) = &c.scorer else {
            unreachable!()
        };
        for (i, s) in scores.iter().enumerate() {
            assert_eq!(*s, nb.prior(i).ln());
        }
    }

    #[test]
    fn multinomial_coefficient_matches_factorials() {
        let counts = [(FeatureId(0), 2), (FeatureId(1), 1)];
        // 3! / (2! 1!) = 3
        assert!((multinomial_log_coefficient(&counts) - 3f64.ln()).abs() < 1e-12);
        assert_eq!(multinomial_log_coefficient(&[]), 0.0);
    }

    fn word_task() -> impl Strategy<Value = (Vec<String>, Vec<String>)> {
        let word = (0u8..6).prop_map(|i| alloc::format!("w{i}"));
        let text = proptest::collection::vec(word, 0..8).prop_map(|w| w.join(" "));
        (
            proptest::collection::vec(text.clone(), 1..4),
            proptest::collection::vec(text, 1..6),
        )
    }

    fn build(ents: &[String], docs: &[String]) -> Task {
        let e: Vec<&str> = ents.iter().map(String::as_str).collect();
        let d: Vec<&str> = docs.iter().map(String::as_str).collect();
        task(&e, &d)
    }

    proptest! {
        #[test]
        fn every_row_realizes_its_maximum((ents, docs) in word_task(), m in 0usize..5, n in 0usize..3) {
            let t = build(&ents, &docs);
            let cfg = ModelConfig::new(ModelKind::ALL[m], NoiseMode::ALL[n]);
            let a = map_documents(&t, &cfg).unwrap();
            prop_assert_eq!(a.len(), t.documents().len());
            let expected = ents.len() + usize::from(cfg.noise != NoiseMode::None);
            for row in &a.rows {
                prop_assert_eq!(row.scores.len(), expected);
                let best = row.assigned_score(&a.candidates);
                prop_assert!(row.scores.iter().all(|&s| s <= best));
                let first = row.scores.iter().position(|&s| s == best).unwrap();
                prop_assert_eq!(&a.candidates[first], &row.assigned);
            }
        }

        #[test]
        fn single_entity_without_noise_takes_everything((ents, docs) in word_task(), m in 0usize..5) {
            let t = build(&ents[..1], &docs);
            let a = map_documents(&t, &ModelConfig::new(ModelKind::ALL[m], NoiseMode::None)).unwrap();
            prop_assert!(a.iter().all(|(_, l)| *l == Label::Entity("e1".into())));
        }

        #[test]
        fn vector_space_argmax_is_scale_invariant(
            entities in proptest::collection::vec(proptest::collection::vec((0u32..6, 0.01f64..2.0), 0..5), 1..4),
            docs in proptest::collection::vec(proptest::collection::vec((0u32..6, 0.01f64..2.0), 0..5), 1..5),
            noise in proptest::collection::vec(0u32..6, 0..4),
            k in -4i32..8,
        ) {
            // Powers of two keep the rescaling exact in binary floating point.
            let factor = libm::exp2(k as f64);
            let ents: Vec<FeatureVector> = entities.iter().map(|p| FeatureVector::from_pairs(p.iter().map(|&(f, w)| (FeatureId(f), w)))).collect();
            let ds: Vec<FeatureVector> = docs.iter().map(|p| FeatureVector::from_pairs(p.iter().map(|&(f, w)| (FeatureId(f), w)))).collect();
            let scaled: Vec<FeatureVector> = ds.iter().map(|d| d.scaled(factor)).collect();
            let noise = l1_normalize(&FeatureVector::from_pairs(noise.iter().map(|&f| (FeatureId(f), 1.0))));
            let argmaxes = |docs: &[FeatureVector]| -> [Vec<usize>; 3] {
                let mut cands = ents.clone();
                cands.push(noise.clone());
                let mut smoothed: Vec<FeatureVector> = ents.iter().map(|e| smoothed_profile(e, docs)).collect();
                smoothed.push(noise.clone());
                [
                    docs.iter().map(|d| argmax(&cands.iter().map(|e| cosine_sim(d, e)).collect::<Vec<_>>())).collect(),
                    docs.iter().map(|d| argmax(&cands.iter().map(|e| score(d, e)).collect::<Vec<_>>())).collect(),
                    docs.iter().map(|d| argmax(&smoothed.iter().map(|e| score_smoothed(d, e)).collect::<Vec<_>>())).collect(),
                ]
            };
            prop_assert_eq!(argmaxes(&ds), argmaxes(&scaled));
        }
    }
}
