//! How much of the question graph the answer graph covers.
//!
//! Relation and vocabulary coverage count one-to-one edge and lemma matches.
//! Graph coverage first aligns a sub-graph of the answer: for every pair of
//! answer nodes whose lemmas also occur in the question, the shortest
//! undirected unit-weight path between them is added when it has at most `m`
//! edges. The sub-graph's edge count is then compared with the answer's and
//! the question's edge counts.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::depgraph::{multiset_overlap, Adjacency, DependencyGraph};

/// Matched edge signatures over question edges; 0 when the question has none.
pub fn relation_coverage(gq: &DependencyGraph, ga: &DependencyGraph) -> f64 {
    if gq.edge_count() == 0 {
        return 0.0;
    }
    let matched = multiset_overlap(gq.edge_signatures(), ga.edge_signatures());
    matched as f64 / gq.edge_count() as f64
}

/// Matched lemmas over question nodes; 0 for an empty question.
pub fn vocabulary_coverage(gq: &DependencyGraph, ga: &DependencyGraph) -> f64 {
    if gq.node_count() == 0 {
        return 0.0;
    }
    let matched = multiset_overlap(gq.lemmas(), ga.lemmas());
    matched as f64 / gq.node_count() as f64
}

/// Single-source unit-weight distances and parent links.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    source: usize,
    distance: BTreeMap<usize, usize>,
    parent: BTreeMap<usize, usize>,
}

impl ShortestPaths {
    /// Relaxes edges out of the queue head until the queue drains. The queue
    /// is ordered by `(distance, node)`; an improved node is removed and
    /// re-added with its new key, and neighbours are visited in index order.
    pub fn compute(adjacency: &Adjacency, source: usize) -> Self {
        let mut distance = BTreeMap::new();
        let mut parent = BTreeMap::new();
        let mut queue: BTreeSet<(usize, usize)> = BTreeSet::new();
        if adjacency.contains_key(&source) {
            distance.insert(source, 0);
            queue.insert((0, source));
        }
        while let Some((du, u)) = queue.pop_first() {
            for &v in adjacency.get(&u).into_iter().flatten() {
                let candidate = du + 1;
                let current = distance.get(&v).copied();
                if current.is_none_or(|d| candidate < d) {
                    if let Some(d) = current {
                        queue.remove(&(d, v));
                    }
                    distance.insert(v, candidate);
                    parent.insert(v, u);
                    queue.insert((candidate, v));
                }
            }
        }
        ShortestPaths {
            source,
            distance,
            parent,
        }
    }

    pub fn distance(&self, dest: usize) -> Option<usize> {
        self.distance.get(&dest).copied()
    }

    /// Walks parent links back from `dest` and reverses them. Empty when
    /// `dest` was never reached.
    pub fn path_to(&self, dest: usize) -> Vec<usize> {
        if !self.distance.contains_key(&dest) {
            return Vec::new();
        }
        let mut path = vec![dest];
        let mut vertex = dest;
        while let Some(&p) = self.parent.get(&vertex) {
            path.push(p);
            vertex = p;
        }
        path.reverse();
        debug_assert_eq!(path.first(), Some(&self.source));
        path
    }
}

/// Shortest undirected path from `source` to `dest` as a node list, or empty.
pub fn find_path(adjacency: &Adjacency, source: usize, dest: usize) -> Vec<usize> {
    ShortestPaths::compute(adjacency, source).path_to(dest)
}

/// Nodes and undirected edges `(low, high)` of the answer graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubGraph {
    pub nodes: BTreeSet<usize>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl SubGraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_subset_of(&self, other: &SubGraph) -> bool {
        self.nodes.is_subset(&other.nodes) && self.edges.is_subset(&other.edges)
    }

    fn add_path(&mut self, path: &[usize]) {
        self.nodes.extend(path.iter().copied());
        for w in path.windows(2) {
            self.edges.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
}

/// Answer nodes whose lemma appears among the question's lemmas, in index order.
pub fn common_nodes(gq: &DependencyGraph, ga: &DependencyGraph) -> Vec<usize> {
    let question: HashSet<&str> = gq.lemmas().collect();
    ga.nodes
        .iter()
        .filter(|t| question.contains(t.lemma.as_str()))
        .map(|t| t.index)
        .collect()
}

/// Unions every shortest path of at most `max_path_edges` edges between two
/// common nodes.
pub fn align_subgraph(gq: &DependencyGraph, ga: &DependencyGraph, max_path_edges: usize) -> SubGraph {
    let common = common_nodes(gq, ga);
    let adjacency = ga.undirected_adjacency();
    let mut sub = SubGraph::default();
    for (i, &s) in common.iter().enumerate() {
        let paths = ShortestPaths::compute(&adjacency, s);
        for &d in &common[i + 1..] {
            let path = paths.path_to(d);
            if !path.is_empty() && path.len() - 1 <= max_path_edges {
                sub.add_path(&path);
            }
        }
    }
    sub
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphCoverage {
    /// Sub-graph edges over answer edges.
    pub answer: f64,
    /// Sub-graph edges over question edges, capped at 1.
    pub question: f64,
}

pub fn coverage_ratios(sub: &SubGraph, ga: &DependencyGraph, gq: &DependencyGraph) -> GraphCoverage {
    let ratio = |den: usize| {
        if den == 0 {
            0.0
        } else {
            (sub.edge_count() as f64 / den as f64).min(1.0)
        }
    };
    GraphCoverage {
        answer: ratio(ga.edge_count()),
        question: ratio(gq.edge_count()),
    }
}

pub fn graph_coverage_features(
    gq: &DependencyGraph,
    ga: &DependencyGraph,
    max_path_edges: usize,
) -> GraphCoverage {
    coverage_ratios(&align_subgraph(gq, ga, max_path_edges), ga, gq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::build_graph;
    use crate::depgraph::fixtures::*;

    fn adjacency(n: usize, edges: &[(usize, usize)]) -> Adjacency {
        let mut adj: Adjacency = (1..=n).map(|i| (i, BTreeSet::new())).collect();
        for &(a, b) in edges {
            adj.get_mut(&a).unwrap().insert(b);
            adj.get_mut(&b).unwrap().insert(a);
        }
        adj
    }

    #[test]
    fn chain_path() {
        let adj = adjacency(4, &[(1, 2), (2, 3), (3, 4)]);
        assert_eq!(find_path(&adj, 1, 4), vec![1, 2, 3, 4]);
        assert_eq!(find_path(&adj, 4, 1), vec![4, 3, 2, 1]);
        assert_eq!(find_path(&adj, 2, 2), vec![2]);
    }

    #[test]
    fn disconnected_path_is_empty() {
        let adj = adjacency(4, &[(1, 2), (3, 4)]);
        assert!(find_path(&adj, 1, 4).is_empty());
        assert!(find_path(&adj, 1, 9).is_empty());
    }

    #[test]
    fn equal_length_ties_prefer_smaller_parent() {
        // Square 1-2-4-3-1: both 2 and 3 reach 4 at distance 2.
        let adj = adjacency(4, &[(1, 2), (2, 4), (1, 3), (3, 4)]);
        assert_eq!(find_path(&adj, 1, 4), vec![1, 2, 4]);
    }

    #[test]
    fn identical_and_disjoint_coverage() {
        let q = build_graph(&carradine_question());
        assert_eq!(relation_coverage(&q, &q), 1.0);
        assert_eq!(vocabulary_coverage(&q, &q), 1.0);
        let other = build_graph(&sentence(
            "x",
            &[("zebras", "zebra", "NOUN", 2, "nsubj"), ("graze", "graze", "VERB", 0, "root")],
        ));
        assert_eq!(relation_coverage(&q, &other), 0.0);
        assert_eq!(vocabulary_coverage(&q, &other), 0.0);
    }

    #[test]
    fn half_the_relations_matched() {
        // Question edges: (die,how,advmod) (die,do,aux) (carradine,david,compound)
        // (die,carradine,nsubj); the answer shares the last two.
        let q = build_graph(&carradine_question());
        let a = build_graph(&carradine_answer());
        assert_eq!(relation_coverage(&q, &a), 0.5);
    }

    #[test]
    fn carradine_vocabulary_coverage() {
        let q = build_graph(&carradine_question());
        let a = build_graph(&carradine_answer());
        assert!((vocabulary_coverage(&q, &a) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn carradine_subgraph() {
        let q = build_graph(&carradine_question());
        let a = build_graph(&carradine_answer());
        assert_eq!(common_nodes(&q, &a), vec![1, 2, 3]);
        let sub = align_subgraph(&q, &a, 3);
        assert_eq!(sub.nodes, BTreeSet::from([1, 2, 3]));
        assert_eq!(sub.edges, BTreeSet::from([(1, 2), (2, 3)]));
        let cov = graph_coverage_features(&q, &a, 3);
        assert!((cov.answer - 2.0 / 12.0).abs() < 1e-15);
        assert_eq!(cov.question, 0.5);
    }

    #[test]
    fn degenerate_subgraphs() {
        let q = build_graph(&carradine_question());
        let a = build_graph(&carradine_answer());
        assert!(align_subgraph(&q, &a, 0).is_empty());
        let single = build_graph(&sentence(
            "s",
            &[("david", "david", "PROPN", 2, "nsubj"), ("sleeps", "sleep", "VERB", 0, "root")],
        ));
        assert!(align_subgraph(&q, &single, 5).is_empty());
        let cov = graph_coverage_features(&q, &single, 5);
        assert_eq!((cov.answer, cov.question), (0.0, 0.0));
    }

    #[test]
    fn whole_answer_covered() {
        let q = build_graph(&carradine_question());
        let a = build_graph(&sentence(
            "a",
            &[
                ("carradine", "carradine", "PROPN", 2, "nsubj"),
                ("died", "die", "VERB", 0, "root"),
            ],
        ));
        let cov = graph_coverage_features(&q, &a, 3);
        assert_eq!(cov.answer, 1.0);
    }

    #[test]
    fn fixture_ratios() {
        // |E_sub| = 2, |E_A| = 8, |E_Q| = 4.
        let sub = SubGraph {
            nodes: BTreeSet::from([1, 2, 3]),
            edges: BTreeSet::from([(1, 2), (2, 3)]),
        };
        let chain = |n: usize| {
            let rows: Vec<(&str, &str, &str, usize, &str)> = (1..=n)
                .map(|i| ("w", "w", "X", if i == 1 { 0 } else { i - 1 }, "dep"))
                .collect();
            build_graph(&sentence("c", &rows))
        };
        let cov = coverage_ratios(&sub, &chain(9), &chain(5));
        assert_eq!((cov.answer, cov.question), (0.25, 0.5));
    }
}
