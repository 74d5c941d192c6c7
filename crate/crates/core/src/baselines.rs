//! Standalone surface-level scorers: Okapi BM25 over the question's answer
//! pool, clipped n-gram coverage, and cosine between averaged word vectors.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

/// Lowercased whitespace tokens with non-alphanumeric characters stripped
/// from both ends; tokens that strip to nothing are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// The tokenized candidates of one question.
#[derive(Debug, Clone, Default)]
pub struct AnswerPool {
    pub candidates: Vec<Vec<String>>,
    pub avgdl: f64,
    pub df_in_pool: HashMap<String, usize>,
}

impl AnswerPool {
    pub fn new(candidates: Vec<Vec<String>>) -> Self {
        let mut df_in_pool: HashMap<String, usize> = HashMap::new();
        for c in &candidates {
            let unique: HashSet<&String> = c.iter().collect();
            for t in unique {
                *df_in_pool.entry(t.clone()).or_default() += 1;
            }
        }
        let total: usize = candidates.iter().map(Vec::len).sum();
        let avgdl = if candidates.is_empty() {
            0.0
        } else {
            total as f64 / candidates.len() as f64
        };
        AnswerPool {
            candidates,
            avgdl,
            df_in_pool,
        }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// `ln((N - n + 0.5) / (n + 0.5))`, negative for terms in most candidates.
pub fn bm25_idf(pool: &AnswerPool, term: &str) -> f64 {
    let n_total = pool.len() as f64;
    let n = pool.df_in_pool.get(term).copied().unwrap_or(0) as f64;
    ((n_total - n + 0.5) / (n + 0.5)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.5, b: 0.75 }
    }
}

/// Sums the saturated, length-normalised term weight of every question
/// token (repeats included) against `answer`.
pub fn bm25_score(question: &[String], answer: &[String], pool: &AnswerPool, params: Bm25Params) -> f64 {
    if question.is_empty() || pool.avgdl <= 0.0 {
        return 0.0;
    }
    let mut tf: HashMap<&str, usize> = HashMap::new();
    for t in answer {
        *tf.entry(t.as_str()).or_default() += 1;
    }
    let length_norm = 1.0 - params.b + params.b * answer.len() as f64 / pool.avgdl;
    question
        .iter()
        .map(|q| {
            let f = tf.get(q.as_str()).copied().unwrap_or(0) as f64;
            if f == 0.0 {
                return 0.0;
            }
            bm25_idf(pool, q) * f * (params.k1 + 1.0) / (f + params.k1 * length_norm)
        })
        .sum()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_default() += 1;
        }
    }
    counts
}

/// Question n-grams also found in the answer (counts clipped per type) over
/// all question n-grams; 0 when the question has none.
pub fn ngram_coverage(question: &[String], answer: &[String], n: usize) -> f64 {
    let q = ngram_counts(question, n);
    let total: usize = q.values().sum();
    if total == 0 {
        return 0.0;
    }
    let a = ngram_counts(answer, n);
    let common: usize = q
        .iter()
        .map(|(g, &c)| c.min(a.get(g).copied().unwrap_or(0)))
        .sum();
    common as f64 / total as f64
}

/// Coverage for n = 1..=n_max summed and divided by `1 + 2 + … + n_max`.
pub fn ngram_score(question: &[String], answer: &[String], n_max: usize) -> f64 {
    if n_max == 0 {
        return 0.0;
    }
    let sum: f64 = (1..=n_max).map(|n| ngram_coverage(question, answer, n)).sum();
    sum / (n_max * (n_max + 1) / 2) as f64
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read embeddings {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("embeddings line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("embedding table is empty")]
    Empty,
}

/// Word vectors of one shared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let io_err = |source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = File::open(path).map_err(io_err)?;
        Self::read(BufReader::new(file)).map_err(|e| match e {
            ReadError::Io(source) => io_err(source),
            ReadError::Embedding(e) => e,
        })
    }

    pub fn parse(content: &str) -> Result<Self, EmbeddingError> {
        Self::read(content.as_bytes()).map_err(|e| match e {
            ReadError::Io(_) => unreachable!("reading from memory"),
            ReadError::Embedding(e) => e,
        })
    }

    /// Text format: `word v1 … vd` per line. An optional first line holding
    /// exactly two integers (`count dim`) is skipped.
    fn read<R: BufRead>(reader: R) -> Result<Self, ReadError> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(ReadError::Io)?;
            let line_no = i + 1;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            if line_no == 1 && parts.len() == 2 && parts.iter().all(|p| p.parse::<usize>().is_ok()) {
                continue;
            }
            let malformed = |message: String| {
                ReadError::Embedding(EmbeddingError::Malformed {
                    line: line_no,
                    message,
                })
            };
            let values: Vec<f64> = parts[1..]
                .iter()
                .map(|p| p.parse::<f64>().map_err(|_| malformed(format!("bad component {p:?}"))))
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err(malformed("word without vector".into()));
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(malformed(format!("expected {d} components, found {}", values.len())))
                }
                _ => {}
            }
            vectors.insert(parts[0].to_string(), values);
        }
        let dim = dim.ok_or(ReadError::Embedding(EmbeddingError::Empty))?;
        Ok(EmbeddingTable { dim, vectors })
    }

    /// Exact match first, then the lowercased word.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.vectors
            .get(word)
            .or_else(|| self.vectors.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }
}

enum ReadError {
    Io(io::Error),
    Embedding(EmbeddingError),
}

/// Mean of the vectors found for `tokens`; `None` when no token is known.
pub fn semantic_vector(tokens: &[String], emb: &EmbeddingTable) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; emb.dim];
    let mut lookups = 0usize;
    for v in tokens.iter().filter_map(|t| emb.lookup(t)) {
        lookups += 1;
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    if lookups == 0 {
        return None;
    }
    Some(sum.into_iter().map(|s| s / lookups as f64).collect())
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine between averaged vectors; 0 when either side has no known word.
pub fn semantic_similarity(question: &[String], answer: &[String], emb: &EmbeddingTable) -> f64 {
    match (semantic_vector(question, emb), semantic_vector(answer, emb)) {
        (Some(q), Some(a)) => dense_cosine(&q, &a),
        _ => 0.0,
    }
}

/// Default trigger threshold for the averaged-embedding scorer.
pub const SEMANTIC_THRESHOLD: f64 = 0.70;

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn tokenizer_strips_edges() {
        assert_eq!(toks("How did David-Carradine die?"), ["how", "did", "david-carradine", "die"]);
        assert_eq!(toks(" , ( ) "), Vec::<String>::new());
    }

    fn pool3() -> AnswerPool {
        AnswerPool::new(vec![toks("a b c"), toks("d e"), toks("f g h i")])
    }

    #[test]
    fn idf_values() {
        let p = pool3();
        assert!((bm25_idf(&p, "a") - (2.5f64 / 1.5).ln()).abs() < 1e-15);
        assert!((bm25_idf(&p, "a") - 0.5108256237659907).abs() < 1e-12);
        assert!((bm25_idf(&p, "zzz") - 1.945910149055313).abs() < 1e-12);
        let single = AnswerPool::new(vec![toks("a")]);
        assert!((bm25_idf(&single, "a") - (-1.0986122886681098)).abs() < 1e-12);
    }

    #[test]
    fn bm25_zero_cases() {
        let p = pool3();
        assert_eq!(bm25_score(&[], &p.candidates[0], &p, Bm25Params::default()), 0.0);
        assert_eq!(bm25_score(&toks("zzz"), &p.candidates[0], &p, Bm25Params::default()), 0.0);
    }

    #[test]
    fn bm25_single_term_by_hand() {
        // avgdl = 3, |A| = 3, f = 1: tf part = 2.5 / (1 + 1.5) = 1.
        let p = pool3();
        let s = bm25_score(&toks("a"), &p.candidates[0], &p, Bm25Params::default());
        assert!((s - (2.5f64 / 1.5).ln()).abs() < 1e-12);
    }

    #[test]
    fn ngram_cases() {
        let q = toks("a b a");
        let a = toks("a b");
        assert!((ngram_coverage(&q, &a, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ngram_coverage(&toks("x y"), &toks("z"), 1), 0.0);
        assert_eq!(ngram_score(&toks("a b c d"), &toks("a b c d"), 3), 0.5);
        assert!((ngram_score(&toks("a b"), &toks("a b"), 3) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ngram_score(&toks("a b"), &toks("c d"), 3), 0.0);
    }

    fn emb() -> EmbeddingTable {
        EmbeddingTable::parse("3 2\nx 1 0\ny 0 1\nZ 1 1\n").unwrap()
    }

    #[test]
    fn embedding_file_and_lookup() {
        let e = emb();
        assert_eq!(e.dim, 2);
        assert_eq!(e.lookup("Z"), Some(&[1.0, 1.0][..]));
        assert_eq!(e.lookup("X"), Some(&[1.0, 0.0][..]));
        assert!(EmbeddingTable::parse("a 1 2\nb 1\n").is_err());
        assert!(EmbeddingTable::parse("").is_err());
    }

    #[test]
    fn semantic_vectors() {
        let e = emb();
        assert_eq!(semantic_vector(&toks("q r"), &e), None);
        assert_eq!(semantic_vector(&toks("x q"), &e), Some(vec![1.0, 0.0]));
        assert_eq!(semantic_vector(&toks("x y"), &e), Some(vec![0.5, 0.5]));
    }

    #[test]
    fn semantic_similarity_cases() {
        let e = emb();
        assert!((semantic_similarity(&toks("x y"), &toks("x y"), &e) - 1.0).abs() < 1e-15);
        assert_eq!(semantic_similarity(&toks("q"), &toks("x"), &e), 0.0);
        // (1,0) vs (0.5,0.5): 0.5 / (1 * sqrt(0.5))
        let s = semantic_similarity(&toks("x"), &toks("x y"), &e);
        assert!((s - 0.5 / 0.5f64.sqrt()).abs() < 1e-12);
    }
}
