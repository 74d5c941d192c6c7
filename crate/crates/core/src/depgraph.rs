//! Dependency graphs built from parsed sentences.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Sentence, Token};

/// A labeled head → dependent edge, identified by 1-based token indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub gov: usize,
    pub dep: usize,
    pub rel: String,
}

/// Edge key used for one-to-one matching across sentences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSignature {
    pub gov_lemma: String,
    pub dep_lemma: String,
    pub rel: String,
}

/// Rooted dependency tree over a sentence's tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: Vec<Token>,
    pub edges: Vec<Edge>,
}

/// Undirected neighbour sets keyed by node index. Every node has an entry.
pub type Adjacency = BTreeMap<usize, BTreeSet<usize>>;

impl DependencyGraph {
    /// One edge per non-root token, in token order. The sentence is assumed
    /// to satisfy the tree invariants enforced by [`Sentence::parsed`].
    pub fn build(sentence: &Sentence) -> Self {
        let nodes = sentence.tokens.clone();
        let edges = nodes
            .iter()
            .filter(|t| t.head != 0)
            .map(|t| Edge {
                gov: t.head,
                dep: t.index,
                rel: t.deprel.clone(),
            })
            .collect();
        DependencyGraph { nodes, edges }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Token at a 1-based index.
    pub fn node(&self, index: usize) -> &Token {
        &self.nodes[index - 1]
    }

    pub fn lemma(&self, index: usize) -> &str {
        &self.node(index).lemma
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|t| t.lemma.as_str())
    }

    /// Relation labels of every edge touching `index`, regardless of direction.
    pub fn incident_relations(&self, index: usize) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|e| e.gov == index || e.dep == index)
            .map(|e| e.rel.as_str())
            .collect()
    }

    pub fn degree(&self, index: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.gov == index || e.dep == index)
            .count()
    }

    pub fn undirected_adjacency(&self) -> Adjacency {
        let mut adj: Adjacency = self
            .nodes
            .iter()
            .map(|t| (t.index, BTreeSet::new()))
            .collect();
        for e in &self.edges {
            adj.entry(e.gov).or_default().insert(e.dep);
            adj.entry(e.dep).or_default().insert(e.gov);
        }
        adj
    }

    /// `(gov_lemma, dep_lemma, rel)` for every edge; repeats are kept.
    pub fn edge_signatures(&self) -> Vec<EdgeSignature> {
        self.edges
            .iter()
            .map(|e| EdgeSignature {
                gov_lemma: self.lemma(e.gov).to_string(),
                dep_lemma: self.lemma(e.dep).to_string(),
                rel: e.rel.clone(),
            })
            .collect()
    }
}

pub fn build_graph(sentence: &Sentence) -> DependencyGraph {
    DependencyGraph::build(sentence)
}

/// Size of the maximum one-to-one matching between two multisets: the sum
/// over distinct items of the smaller of the two counts.
pub fn multiset_overlap<T, I, J>(left: I, right: J) -> usize
where
    T: Ord,
    I: IntoIterator<Item = T>,
    J: IntoIterator<Item = T>,
{
    let mut counts: BTreeMap<T, (usize, usize)> = BTreeMap::new();
    for x in left {
        counts.entry(x).or_default().0 += 1;
    }
    for x in right {
        counts.entry(x).or_default().1 += 1;
    }
    counts.values().map(|&(a, b)| a.min(b)).sum()
}
