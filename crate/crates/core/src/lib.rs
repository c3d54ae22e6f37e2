//! Grouping of web search results for an ambiguous person name.
//!
//! Each result document is classified against knowledge-base entity profiles
//! sharing the name, plus an artificial noise entity that absorbs documents
//! about people the knowledge base does not know. The crate is `no_std` and
//! only needs an allocator; file formats, reports and the command line live
//! in the `namesift` crate.
//!
//! Module map:
//!
//! * [`corpus`]: tasks, profiles, documents, gold labels and tokenization.
//! * [`features`]: feature index, tf-idf weights and noise profiles.
//! * [`models`]: the five membership scoring functions and the argmax mapping.
//! * [`baselines`]: complete-link HAC and K-Means over tf-idf vectors.
//! * [`eval`]: purity, NMI, micro/macro F1 and the averaged F1.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![deny(missing_debug_implementations)]

extern crate alloc;

pub mod baselines;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod math;
pub mod models;

pub use baselines::{Clustering, ClusteringMethod};
pub use corpus::{EntityProfile, GoldAlignment, Label, ResultDocument, Task, Tokenizer};
pub use eval::{EvalReport, TaskMetrics};
pub use features::{FeatureConfig, FeatureIndex, FeatureVector, NoiseProfile};
pub use models::{Assignment, ModelConfig, ModelKind, NoiseMode};
