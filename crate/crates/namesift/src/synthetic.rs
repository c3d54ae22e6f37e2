//! Seeded generator of open-world disambiguation tasks. Each entity owns a
//! topic vocabulary and entity documents draw from it. Noise documents mix
//! generic words, which entity profiles mention in passing, with unrelated
//! topics of their own.

use std::collections::BTreeSet;

use namesift_core::corpus::{
    CorpusError, EntityProfile, GoldAlignment, Label, ResultDocument, Task, Tokenizer,
};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub tasks: usize,
    pub entities_per_task: usize,
    pub documents_per_task: usize,
    pub noise_documents_per_task: usize,
    /// Words per entity topic.
    pub topic_vocabulary: usize,
    /// Extra topic draws in each entity profile beyond one of every word.
    pub profile_extra_words: usize,
    /// Topic draws per entity document.
    pub document_topic_words: usize,
    /// Words shared by the whole task, outside any entity topic.
    pub generic_vocabulary: usize,
    /// Distinct generic words each entity profile mentions once.
    pub profile_generic_words: usize,
    /// Unrelated topics noise documents are drawn from.
    pub noise_topics: usize,
    pub noise_topic_vocabulary: usize,
    /// Generic draws per noise document.
    pub noise_generic_words: usize,
    /// Unrelated-topic draws per noise document.
    pub noise_topic_words: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            tasks: 5,
            entities_per_task: 3,
            documents_per_task: 30,
            noise_documents_per_task: 10,
            topic_vocabulary: 60,
            profile_extra_words: 1000,
            document_topic_words: 6,
            generic_vocabulary: 40,
            profile_generic_words: 16,
            noise_topics: 3,
            noise_topic_vocabulary: 20,
            noise_generic_words: 6,
            noise_topic_words: 5,
        }
    }
}

const ONSETS: &[&str] = &[
    "b", "br", "c", "ch", "d", "dr", "f", "g", "gr", "h", "j", "k", "l", "m", "n", "p", "pl", "r",
    "s", "sh", "st", "t", "tr", "v", "w", "z",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ou"];
const CODAS: &[&str] = &["", "", "n", "r", "s", "l", "m", "x", "th"];

/// Draws pronounceable, globally unique words.
struct WordSource {
    rng: ChaCha8Rng,
    used: BTreeSet<String>,
}

impl WordSource {
    fn word(&mut self) -> String {
        loop {
            let syllables = self.rng.gen_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(&mut self.rng).unwrap());
                w.push_str(VOWELS.choose(&mut self.rng).unwrap());
            }
            w.push_str(CODAS.choose(&mut self.rng).unwrap());
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn words(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.word()).collect()
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

/// Zipf-weighted draws from `vocab`.
fn draw(rng: &mut ChaCha8Rng, vocab: &[String], n: usize) -> Vec<String> {
    let zipf = WeightedIndex::new((1..=vocab.len()).map(|r| 1.0 / r as f64))
        .expect("non-empty vocabulary");
    (0..n).map(|_| vocab[zipf.sample(rng)].clone()).collect()
}

fn sentence(parts: impl IntoIterator<Item = String>) -> String {
    parts.into_iter().collect::<Vec<_>>().join(" ")
}

/// Generates the configured corpus. Identical configs give identical tasks.
pub fn generate(config: &SynthConfig) -> Result<Vec<Task>, CorpusError> {
    let mut words = WordSource {
        rng: ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed),
        used: BTreeSet::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let tokenizer = Tokenizer::default();
    let mut tasks = Vec::with_capacity(config.tasks);

    for _ in 0..config.tasks {
        let first = capitalize(&words.word());
        let last = capitalize(&words.word());
        let name = format!("{first} {last}");
        let generic = words.words(config.generic_vocabulary);
        let topics: Vec<Vec<String>> = (0..config.entities_per_task)
            .map(|_| words.words(config.topic_vocabulary))
            .collect();
        let noise_topics: Vec<Vec<String>> = (0..config.noise_topics)
            .map(|_| words.words(config.noise_topic_vocabulary))
            .collect();

        let entities: Vec<EntityProfile> = topics
            .iter()
            .enumerate()
            .map(|(i, topic)| {
                let mut body: Vec<String> = topic.clone();
                body.extend(draw(&mut rng, topic, config.profile_extra_words));
                let mentions = config.profile_generic_words.min(generic.len());
                body.extend(generic.choose_multiple(&mut rng, mentions).cloned());
                body.shuffle(&mut rng);
                let text = sentence([name.clone()].into_iter().chain(body));
                let title = format!("{name} ({})", topic[0]);
                EntityProfile::new(format!("e{}", i + 1), title, text, &tokenizer)
            })
            .collect();

        let noise = config
            .noise_documents_per_task
            .min(config.documents_per_task);
        let mut labelled: Vec<(Label, String)> = Vec::with_capacity(config.documents_per_task);
        for j in 0..config.documents_per_task - noise {
            let e = j % topics.len().max(1);
            let body = draw(&mut rng, &topics[e], config.document_topic_words);
            labelled.push((Label::Entity(entities[e].id.clone()), sentence(body)));
        }
        for j in 0..noise {
            let mut body = Vec::new();
            if !generic.is_empty() {
                body.extend(draw(&mut rng, &generic, config.noise_generic_words));
            }
            if !noise_topics.is_empty() {
                let topic = &noise_topics[j % noise_topics.len()];
                body.extend(draw(&mut rng, topic, config.noise_topic_words));
            }
            body.shuffle(&mut rng);
            labelled.push((Label::Noise, sentence(body)));
        }
        labelled.shuffle(&mut rng);

        let mut gold = GoldAlignment::new();
        let documents = labelled
            .into_iter()
            .enumerate()
            .map(|(j, (label, text))| {
                let id = format!("d{:03}", j + 1);
                gold.insert(id.clone(), label);
                let url = format!("http://example.org/{}/{}", last.to_lowercase(), j + 1);
                ResultDocument::new(id, url, j as u32 + 1, text, &tokenizer)
            })
            .collect();
        tasks.push(Task::new(name, entities, documents, gold)?);
    }
    Ok(tasks)
}
