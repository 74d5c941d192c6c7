//! Answer triggering over dependency graphs.
//!
//! The crate turns parsed question/answer pairs into a battery of structural
//! alignment features (graph edit distance, TF-IDF similarity over words,
//! head/dependent pairs and labeled triplets, relation/vocabulary/sub-graph
//! coverage), fuses them with an optional external per-pair score through a
//! logistic model, and evaluates the result with answer-selection (MAP, MRR)
//! and question-level triggering (precision, recall, F1) metrics.

pub mod baselines;
pub mod combiner;
pub mod corpus;
pub mod coverage;
pub mod depgraph;
pub mod eval;
pub mod ged;
pub mod graphsim;

pub use combiner::{Feature, FeatureManifest, FeatureVector, TriggerModel};
pub use corpus::{Label, QuestionGroup, Sentence, Token};
pub use depgraph::DependencyGraph;
pub use eval::{EvalReport, ScoredGroup};
