//! Feature extraction and the logistic trigger model.
//!
//! A [`FeatureManifest`] selects which features are computed; their order is
//! always the canonical order of [`Feature::ALL`], so a manifest fully
//! determines the column layout of every [`FeatureVector`]. The model is a
//! two-class softmax written as a single sigmoid over standardized features,
//! trained by full-batch gradient descent on L2-regularized mean log loss.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{self, AnswerPool, Bm25Params, EmbeddingTable};
use crate::corpus::{Label, QaPair, QuestionGroup, ScoreMap, Sentence};
use crate::coverage;
use crate::depgraph::DependencyGraph;
use crate::ged::{self, GedConfig};
use crate::graphsim::{self, Alphas, DfTables};

#[derive(Debug, Error)]
pub enum CombinerError {
    #[error("no features enabled")]
    EmptyManifest,
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("feature {feature} needs {resource}, which was not provided")]
    MissingResource {
        feature: Feature,
        resource: &'static str,
    },
    #[error("ext_score has no entry for ({question_id}, {candidate_id})")]
    MissingScore {
        question_id: String,
        candidate_id: String,
    },
    #[error("feature {feature} needs a parse for sentence {sentence_id}")]
    Unparsed {
        feature: Feature,
        sentence_id: String,
    },
    #[error("expected {expected} feature values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training needs both positive and negative examples")]
    SingleClass,
    #[error("{rows} feature rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error("model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    ExtScore,
    Ged,
    SimWord,
    SimPair,
    SimTriplet,
    RelCov,
    GraphCovAns,
    GraphCovQues,
    VocabCov,
    Bm25,
    Ngram,
    Semvec,
}

impl Feature {
    pub const ALL: [Feature; 12] = [
        Feature::ExtScore,
        Feature::Ged,
        Feature::SimWord,
        Feature::SimPair,
        Feature::SimTriplet,
        Feature::RelCov,
        Feature::GraphCovAns,
        Feature::GraphCovQues,
        Feature::VocabCov,
        Feature::Bm25,
        Feature::Ngram,
        Feature::Semvec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::ExtScore => "ext_score",
            Feature::Ged => "ged",
            Feature::SimWord => "sim_word",
            Feature::SimPair => "sim_pair",
            Feature::SimTriplet => "sim_triplet",
            Feature::RelCov => "rel_cov",
            Feature::GraphCovAns => "graph_cov_ans",
            Feature::GraphCovQues => "graph_cov_ques",
            Feature::VocabCov => "vocab_cov",
            Feature::Bm25 => "bm25",
            Feature::Ngram => "ngram",
            Feature::Semvec => "semvec",
        }
    }

    /// Features computed from dependency graphs.
    pub fn needs_parse(self) -> bool {
        matches!(
            self,
            Feature::Ged
                | Feature::SimWord
                | Feature::SimPair
                | Feature::SimTriplet
                | Feature::RelCov
                | Feature::GraphCovAns
                | Feature::GraphCovQues
                | Feature::VocabCov
        )
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Feature::Bm25 | Feature::Ngram | Feature::Semvec)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = CombinerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CombinerError::UnknownFeature(s.to_string()))
    }
}

/// The enabled features, deduplicated and in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureManifest {
    features: Vec<Feature>,
}

impl Default for FeatureManifest {
    /// The eight dependency-graph features.
    fn default() -> Self {
        FeatureManifest::new(Feature::ALL.into_iter().filter(|f| f.needs_parse()))
    }
}

impl FeatureManifest {
    pub fn new(features: impl IntoIterator<Item = Feature>) -> Self {
        let mut features: Vec<Feature> = features.into_iter().collect();
        features.sort();
        features.dedup();
        FeatureManifest { features }
    }

    /// Parses a comma-separated list such as `ged, rel_cov`.
    pub fn parse(list: &str) -> Result<Self, CombinerError> {
        let features = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Feature::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureManifest::new(features))
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name().to_string()).collect()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn contains(&self, f: Feature) -> bool {
        self.features.contains(&f)
    }

    pub fn position(&self, f: Feature) -> Option<usize> {
        self.features.iter().position(|&x| x == f)
    }

    pub fn needs_parses(&self) -> bool {
        self.features.iter().any(|f| f.needs_parse())
    }
}

impl fmt::Display for FeatureManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(","))
    }
}

/// Feature values in manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        FeatureVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Everything feature extraction may need. Optional parts are only required
/// by the features that use them.
#[derive(Debug, Clone)]
pub struct Resources {
    pub ged: GedConfig,
    pub df_tables: Option<DfTables>,
    pub alphas: Alphas,
    /// Longest path (in edges) admitted into the aligned sub-graph.
    pub max_path_edges: usize,
    pub bm25: Bm25Params,
    pub ngram_max: usize,
    pub embeddings: Option<EmbeddingTable>,
    pub scores: Option<ScoreMap>,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            ged: GedConfig::default(),
            df_tables: None,
            alphas: Alphas::default(),
            max_path_edges: 3,
            bm25: Bm25Params::default(),
            ngram_max: 3,
            embeddings: None,
            scores: None,
        }
    }
}

struct PairInputs<'a> {
    pair: &'a QaPair<'a>,
    question_graph: Option<&'a DependencyGraph>,
    answer_graph: Option<&'a DependencyGraph>,
    question_tokens: &'a [String],
    answer_tokens: &'a [String],
    pool: &'a AnswerPool,
}

/// Computes feature vectors for a fixed manifest and resource set.
pub struct FeatureExtractor<'a> {
    resources: &'a Resources,
    manifest: &'a FeatureManifest,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(resources: &'a Resources, manifest: &'a FeatureManifest) -> Result<Self, CombinerError> {
        if manifest.is_empty() {
            return Err(CombinerError::EmptyManifest);
        }
        for &feature in manifest.features() {
            let missing = match feature {
                Feature::SimWord | Feature::SimPair | Feature::SimTriplet
                    if resources.df_tables.is_none() =>
                {
                    Some("document-frequency tables")
                }
                Feature::Semvec if resources.embeddings.is_none() => Some("word embeddings"),
                Feature::ExtScore if resources.scores.is_none() => Some("a score file"),
                _ => None,
            };
            if let Some(resource) = missing {
                return Err(CombinerError::MissingResource { feature, resource });
            }
        }
        Ok(FeatureExtractor {
            resources,
            manifest,
        })
    }

    pub fn manifest(&self) -> &FeatureManifest {
        self.manifest
    }

    fn graph(&self, s: &Sentence) -> Result<Option<DependencyGraph>, CombinerError> {
        match self.manifest.features().iter().find(|f| f.needs_parse()) {
            None => Ok(None),
            Some(&feature) if !s.is_parsed() => Err(CombinerError::Unparsed {
                feature,
                sentence_id: s.sentence_id.clone(),
            }),
            Some(_) => Ok(Some(DependencyGraph::build(s))),
        }
    }

    /// Features for one pair; `pool` holds the tokenized candidates of the
    /// pair's question (used by BM25).
    pub fn extract_pair(&self, pair: &QaPair<'_>, pool: &AnswerPool) -> Result<FeatureVector, CombinerError> {
        let qg = self.graph(pair.question)?;
        let ag = self.graph(pair.answer)?;
        let qt = baselines::tokenize(&pair.question.text);
        let at = baselines::tokenize(&pair.answer.text);
        self.compute(&PairInputs {
            pair,
            question_graph: qg.as_ref(),
            answer_graph: ag.as_ref(),
            question_tokens: &qt,
            answer_tokens: &at,
            pool,
        })
    }

    /// Features for every candidate of a group, in candidate order.
    pub fn extract_group(&self, group: &QuestionGroup) -> Result<Vec<FeatureVector>, CombinerError> {
        let qg = self.graph(&group.question)?;
        let qt = baselines::tokenize(&group.question.text);
        let answer_tokens: Vec<Vec<String>> = group
            .candidates
            .iter()
            .map(|c| baselines::tokenize(&c.sentence.text))
            .collect();
        let pool = AnswerPool::new(answer_tokens.clone());
        group
            .pairs()
            .zip(&answer_tokens)
            .map(|(pair, at)| {
                let ag = self.graph(pair.answer)?;
                self.compute(&PairInputs {
                    pair: &pair,
                    question_graph: qg.as_ref(),
                    answer_graph: ag.as_ref(),
                    question_tokens: &qt,
                    answer_tokens: at,
                    pool: &pool,
                })
            })
            .collect()
    }

    /// Extracts groups in parallel; the result keeps corpus order.
    pub fn extract_corpus(&self, groups: &[QuestionGroup]) -> Result<Vec<Vec<FeatureVector>>, CombinerError> {
        groups.par_iter().map(|g| self.extract_group(g)).collect()
    }

    fn compute(&self, input: &PairInputs<'_>) -> Result<FeatureVector, CombinerError> {
        let r = self.resources;
        let graphs = || {
            (
                input.question_graph.expect("graph built for parse features"),
                input.answer_graph.expect("graph built for parse features"),
            )
        };
        let mut similarity = None;
        let mut graph_cov = None;
        let mut values = Vec::with_capacity(self.manifest.len());
        for &feature in self.manifest.features() {
            let v = match feature {
                Feature::ExtScore => {
                    let scores = r.scores.as_ref().expect("checked in new");
                    scores
                        .get(input.pair.question_id, input.pair.candidate_id)
                        .ok_or_else(|| CombinerError::MissingScore {
                            question_id: input.pair.question_id.to_string(),
                            candidate_id: input.pair.candidate_id.to_string(),
                        })?
                }
                Feature::Ged => {
                    let (q, a) = graphs();
                    ged::graph_edit_distance(q, a, &r.ged)
                }
                Feature::SimWord | Feature::SimPair | Feature::SimTriplet => {
                    let s = *similarity.get_or_insert_with(|| {
                        let (q, a) = graphs();
                        let tables = r.df_tables.as_ref().expect("checked in new");
                        graphsim::graph_similarity_features(q, a, tables, &r.alphas)
                    });
                    match feature {
                        Feature::SimWord => s.word,
                        Feature::SimPair => s.pair,
                        _ => s.triplet,
                    }
                }
                Feature::RelCov => {
                    let (q, a) = graphs();
                    coverage::relation_coverage(q, a)
                }
                Feature::GraphCovAns | Feature::GraphCovQues => {
                    let c = *graph_cov.get_or_insert_with(|| {
                        let (q, a) = graphs();
                        coverage::graph_coverage_features(q, a, r.max_path_edges)
                    });
                    if feature == Feature::GraphCovAns {
                        c.answer
                    } else {
                        c.question
                    }
                }
                Feature::VocabCov => {
                    let (q, a) = graphs();
                    coverage::vocabulary_coverage(q, a)
                }
                Feature::Bm25 => {
                    baselines::bm25_score(input.question_tokens, input.answer_tokens, input.pool, r.bm25)
                }
                Feature::Ngram => {
                    baselines::ngram_score(input.question_tokens, input.answer_tokens, r.ngram_max)
                }
                Feature::Semvec => baselines::semantic_similarity(
                    input.question_tokens,
                    input.answer_tokens,
                    r.embeddings.as_ref().expect("checked in new"),
                ),
            };
            values.push(v);
        }
        Ok(FeatureVector { values })
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[FeatureVector], dim: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; dim];
        for r in rows {
            for (m, x) in means.iter_mut().zip(&r.values) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; dim];
        for r in rows {
            for ((s, x), m) in stds.iter_mut().zip(&r.values).zip(&means) {
                *s += (x - m) * (x - m);
            }
        }
        stds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Standardizer { means, stds }
    }

    /// `(x - mean) / std`, with constant features mapped to 0.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

/// Trained logistic combiner plus its decision threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub threshold: f64,
}

/// Default question-level trigger threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.14;

impl TriggerModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    fn standardizer(&self) -> Standardizer {
        Standardizer {
            means: self.means.clone(),
            stds: self.stds.clone(),
        }
    }

    pub fn logit(&self, x: &FeatureVector) -> Result<f64, CombinerError> {
        if x.len() != self.dim() {
            return Err(CombinerError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let z = self.standardizer().apply(&x.values);
        Ok(dot(&self.weights, &z) + self.bias)
    }

    /// Trigger probability `σ(w·z + b)`.
    pub fn probability(&self, x: &FeatureVector) -> Result<f64, CombinerError> {
        self.logit(x).map(sigmoid)
    }

    /// Fraction of rows whose 0.5-cutoff prediction matches the label.
    pub fn accuracy(&self, rows: &[FeatureVector], labels: &[Label]) -> Result<f64, CombinerError> {
        let mut correct = 0usize;
        for (x, y) in rows.iter().zip(labels) {
            if (self.probability(x)? > 0.5) == y.is_positive() {
                correct += 1;
            }
        }
        Ok(correct as f64 / rows.len().max(1) as f64)
    }

    /// Text serialization: `version 1`, the threshold, one
    /// `feature<TAB>weight<TAB>mean<TAB>std` row per feature, then `BIAS<TAB>b`.
    /// Reals use 17 significant digits so they read back bit-for-bit.
    pub fn to_text(&self) -> String {
        let mut out = String::from("version 1\n");
        out.push_str(&format!("{}\n", exact(self.threshold)));
        for i in 0..self.dim() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                self.feature_names[i],
                exact(self.weights[i]),
                exact(self.means[i]),
                exact(self.stds[i])
            ));
        }
        out.push_str(&format!("BIAS\t{}\n", exact(self.bias)));
        out
    }

    pub fn from_text(content: &str) -> Result<Self, CombinerError> {
        let bad = |line: usize, message: String| CombinerError::ModelFormat { line, message };
        let lines: Vec<&str> = content.lines().map(|l| l.trim_end_matches('\r')).collect();
        if lines.first().map(|l| l.trim()) != Some("version 1") {
            return Err(bad(1, "expected `version 1`".into()));
        }
        let num = |line: usize, s: &str| -> Result<f64, CombinerError> {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| bad(line, format!("{s:?} is not a number")))
        };
        let threshold = num(2, lines.get(1).ok_or_else(|| bad(2, "missing threshold".into()))?)?;
        let mut model = TriggerModel {
            feature_names: Vec::new(),
            weights: Vec::new(),
            bias: 0.0,
            means: Vec::new(),
            stds: Vec::new(),
            threshold,
        };
        let mut bias = None;
        for (i, l) in lines.iter().enumerate().skip(2) {
            let line = i + 1;
            if l.trim().is_empty() {
                continue;
            }
            if bias.is_some() {
                return Err(bad(line, "content after BIAS row".into()));
            }
            let cols: Vec<&str> = l.split('\t').collect();
            match cols.as_slice() {
                ["BIAS", b] => bias = Some(num(line, b)?),
                [name, w, m, s] => {
                    let std = num(line, s)?;
                    if std < 0.0 {
                        return Err(bad(line, "negative standard deviation".into()));
                    }
                    model.feature_names.push(name.to_string());
                    model.weights.push(num(line, w)?);
                    model.means.push(num(line, m)?);
                    model.stds.push(std);
                }
                _ => return Err(bad(line, "expected 4 columns or BIAS<TAB>value".into())),
            }
        }
        model.bias = bias.ok_or_else(|| bad(lines.len(), "missing BIAS row".into()))?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CombinerError> {
        let path = path.as_ref();
        fs::File::create(path)
            .and_then(|mut f| f.write_all(self.to_text().as_bytes()))
            .map_err(|source| CombinerError::Io {
                path: path.display().to_string(),
                source,
            })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CombinerError> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|source| CombinerError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&content)
    }
}

/// 17 significant digits in scientific notation.
pub fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sigmoid probability of `x` under `model`.
pub fn sigmoid_prob(model: &TriggerModel, x: &FeatureVector) -> Result<f64, CombinerError> {
    model.probability(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Recorded for reproducibility; training itself draws no random numbers.
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            learning_rate: 0.1,
            epochs: 200,
            l2: 1e-4,
            seed: 0,
        }
    }
}

/// Mean log loss plus `l2 / 2 · |w|²`, and its gradient in `(w, b)`.
pub fn loss_and_gradient(
    weights: &[f64],
    bias: f64,
    rows: &[Vec<f64>],
    targets: &[f64],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = rows.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (z, &y) in rows.iter().zip(targets) {
        let s = dot(weights, z) + bias;
        loss += softplus(s) - y * s;
        let err = sigmoid(s) - y;
        for (g, x) in grad_w.iter_mut().zip(z) {
            *g += err * x;
        }
        grad_b += err;
    }
    loss /= n;
    grad_b /= n;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    loss += 0.5 * l2 * dot(weights, weights);
    (loss, grad_w, grad_b)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TriggerModel,
    /// Loss before each update, then the final loss.
    pub losses: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("at least the initial loss")
    }
}

/// Fits standardization statistics and weights from zero initialization.
pub fn train(
    rows: &[FeatureVector],
    labels: &[Label],
    feature_names: &[String],
    params: &TrainParams,
    threshold: f64,
) -> Result<TrainOutcome, CombinerError> {
    if rows.len() != labels.len() {
        return Err(CombinerError::LabelCount {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let dim = feature_names.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(CombinerError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let positives = labels.iter().filter(|l| l.is_positive()).count();
    if positives == 0 || positives == labels.len() {
        return Err(CombinerError::SingleClass);
    }
    let standardizer = Standardizer::fit(rows, dim);
    let z: Vec<Vec<f64>> = rows.iter().map(|r| standardizer.apply(&r.values)).collect();
    let y: Vec<f64> = labels.iter().map(|l| l.as_u8() as f64).collect();

    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut losses = Vec::with_capacity(params.epochs + 1);
    for _ in 0..params.epochs {
        let (loss, gw, gb) = loss_and_gradient(&weights, bias, &z, &y, params.l2);
        losses.push(loss);
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * gb;
    }
    losses.push(loss_and_gradient(&weights, bias, &z, &y, params.l2).0);

    Ok(TrainOutcome {
        model: TriggerModel {
            feature_names: feature_names.to_vec(),
            weights,
            bias,
            means: standardizer.means,
            stds: standardizer.stds,
            threshold,
        },
        losses,
    })
}
