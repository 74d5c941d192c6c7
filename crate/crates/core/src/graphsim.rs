//! TF-IDF similarity between dependency graphs at three granularities:
//! lemmas, head/dependent lemma pairs, and pairs labeled with their relation.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::depgraph::DependencyGraph;

#[derive(Debug, Error)]
pub enum DfError {
    #[error("document frequencies need at least one sentence")]
    EmptyInput,
    #[error("cannot read DF table {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("DF table line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Word,
    Pair,
    Triplet,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Word, Level::Pair, Level::Triplet];

    pub fn name(self) -> &'static str {
        match self {
            Level::Word => "word",
            Level::Pair => "pair",
            Level::Triplet => "triplet",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word" => Ok(Level::Word),
            "pair" => Ok(Level::Pair),
            "triplet" => Ok(Level::Triplet),
            other => Err(format!("unknown level {other:?}")),
        }
    }
}

/// Keys of a graph at one level; repeats are kept so they count toward tf.
///
/// Word keys are lemmas, pair keys `gov|dep`, triplet keys `gov|dep|rel`.
pub fn extract_keys(g: &DependencyGraph, level: Level) -> Vec<String> {
    match level {
        Level::Word => g.lemmas().map(str::to_string).collect(),
        Level::Pair => g
            .edges
            .iter()
            .map(|e| format!("{}|{}", g.lemma(e.gov), g.lemma(e.dep)))
            .collect(),
        Level::Triplet => g
            .edges
            .iter()
            .map(|e| format!("{}|{}|{}", g.lemma(e.gov), g.lemma(e.dep), e.rel))
            .collect(),
    }
}

/// Document frequencies at one level, each sentence counting as a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfTable {
    pub level: Level,
    pub n_docs: usize,
    pub df: BTreeMap<String, usize>,
}

impl DfTable {
    pub fn build<'a, I>(graphs: I, level: Level) -> Result<Self, DfError>
    where
        I: IntoIterator<Item = &'a DependencyGraph>,
    {
        let mut n_docs = 0;
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for g in graphs {
            n_docs += 1;
            let mut keys = extract_keys(g, level);
            keys.sort();
            keys.dedup();
            for k in keys {
                *df.entry(k).or_default() += 1;
            }
        }
        if n_docs == 0 {
            return Err(DfError::EmptyInput);
        }
        Ok(DfTable { level, n_docs, df })
    }

    pub fn df(&self, key: &str) -> usize {
        self.df.get(key).copied().unwrap_or(0)
    }

    /// Smoothed inverse document frequency, `ln((N + 1) / (df + 1)) + 1`.
    pub fn idf(&self, key: &str) -> f64 {
        ((self.n_docs as f64 + 1.0) / (self.df(key) as f64 + 1.0)).ln() + 1.0
    }

    pub fn load(path: impl AsRef<Path>, level: Level) -> Result<Self, DfError> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|source| DfError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&content, level)
    }

    /// Parses `N<TAB>n_docs` followed by `key<TAB>df` rows.
    pub fn parse(content: &str, level: Level) -> Result<Self, DfError> {
        let malformed = |line, message: String| DfError::Malformed { line, message };
        let mut lines = content
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty());
        let (line, first) = lines
            .next()
            .ok_or_else(|| malformed(1, "missing N<TAB>n_docs header".into()))?;
        let n_docs = match first.split_once('\t') {
            Some(("N", n)) => n
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| malformed(line, format!("bad document count {n:?}")))?,
            _ => return Err(malformed(line, "first line must be N<TAB>n_docs".into())),
        };
        let mut df = BTreeMap::new();
        for (line, text) in lines {
            let (key, count) = text
                .rsplit_once('\t')
                .ok_or_else(|| malformed(line, "expected key<TAB>df".into()))?;
            let count: usize = count
                .trim()
                .parse()
                .ok()
                .filter(|&c| c > 0 && c <= n_docs)
                .ok_or_else(|| malformed(line, format!("df {count:?} not in 1..={n_docs}")))?;
            if df.insert(key.to_string(), count).is_some() {
                return Err(malformed(line, format!("key {key:?} repeated")));
            }
        }
        Ok(DfTable { level, n_docs, df })
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "N\t{}", self.n_docs)?;
        for (k, c) in &self.df {
            writeln!(out, "{k}\t{c}")?;
        }
        Ok(())
    }
}

/// Sparse non-negative weights; zero-weight keys are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedVector {
    pub entries: BTreeMap<String, f64>,
}

impl WeightedVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    fn norm(&self) -> f64 {
        self.entries.values().map(|w| w * w).sum::<f64>().sqrt()
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for WeightedVector {
    fn from_iter<T: IntoIterator<Item = (K, f64)>>(iter: T) -> Self {
        WeightedVector {
            entries: iter
                .into_iter()
                .filter(|(_, w)| *w > 0.0)
                .map(|(k, w)| (k.into(), w))
                .collect(),
        }
    }
}

/// Raw-count tf times smoothed idf; keys weighing `<= alpha` are dropped.
pub fn tfidf_vector(g: &DependencyGraph, table: &DfTable, alpha: f64) -> WeightedVector {
    let mut tf: BTreeMap<String, usize> = BTreeMap::new();
    for k in extract_keys(g, table.level) {
        *tf.entry(k).or_default() += 1;
    }
    tf.into_iter()
        .map(|(k, count)| {
            let w = count as f64 * table.idf(&k);
            (k, w)
        })
        .filter(|(_, w)| *w > alpha)
        .collect()
}

/// Cosine over the key union, 0 when either side is empty.
pub fn cosine(v1: &WeightedVector, v2: &WeightedVector) -> f64 {
    let (small, large) = if v1.len() <= v2.len() { (v1, v2) } else { (v2, v1) };
    let dot: f64 = small
        .entries
        .iter()
        .filter_map(|(k, w)| large.entries.get(k).map(|x| w * x))
        .fold(0.0, |acc, x| acc + x);
    let denom = v1.norm() * v2.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (dot / denom).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfTables {
    pub word: DfTable,
    pub pair: DfTable,
    pub triplet: DfTable,
}

impl DfTables {
    pub fn build<'a, I>(graphs: I) -> Result<Self, DfError>
    where
        I: IntoIterator<Item = &'a DependencyGraph> + Clone,
    {
        Ok(DfTables {
            word: DfTable::build(graphs.clone(), Level::Word)?,
            pair: DfTable::build(graphs.clone(), Level::Pair)?,
            triplet: DfTable::build(graphs, Level::Triplet)?,
        })
    }

    pub fn get(&self, level: Level) -> &DfTable {
        match level {
            Level::Word => &self.word,
            Level::Pair => &self.pair,
            Level::Triplet => &self.triplet,
        }
    }
}

/// Filtering thresholds for the three levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alphas {
    pub word: f64,
    pub pair: f64,
    pub triplet: f64,
}

impl Default for Alphas {
    fn default() -> Self {
        Alphas {
            word: 7.0,
            pair: 5.0,
            triplet: 2.0,
        }
    }
}

impl Alphas {
    pub fn get(&self, level: Level) -> f64 {
        match level {
            Level::Word => self.word,
            Level::Pair => self.pair,
            Level::Triplet => self.triplet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSimilarity {
    pub word: f64,
    pub pair: f64,
    pub triplet: f64,
}

pub fn graph_similarity_features(
    gq: &DependencyGraph,
    ga: &DependencyGraph,
    tables: &DfTables,
    alphas: &Alphas,
) -> GraphSimilarity {
    let sim = |level| {
        let table = tables.get(level);
        let alpha = alphas.get(level);
        cosine(&tfidf_vector(gq, table, alpha), &tfidf_vector(ga, table, alpha))
    };
    GraphSimilarity {
        word: sim(Level::Word),
        pair: sim(Level::Pair),
        triplet: sim(Level::Triplet),
    }
}
