mod common;

use std::collections::{BTreeSet, VecDeque};

use common::*;
use deptrigger::coverage::{
    align_subgraph, find_path, graph_coverage_features, relation_coverage, vocabulary_coverage,
};
use deptrigger::depgraph::Adjacency;
use deptrigger::DependencyGraph;
use proptest::prelude::*;
use rand::Rng;

fn bfs(adj: &Adjacency, source: usize) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut dist = vec![None; n + 1];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[&u] {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn undirected_edges(g: &DependencyGraph) -> BTreeSet<(usize, usize)> {
    g.edges.iter().map(|e| (e.gov.min(e.dep), e.gov.max(e.dep))).collect()
}

#[test]
fn paths_match_bfs_on_random_trees() {
    let mut r = rng(5);
    for _ in 0..300 {
        let g = random_graph(&mut r, 1, 12);
        let adj = g.undirected_adjacency();
        let edges = undirected_edges(&g);
        for s in 1..=g.node_count() {
            let dist = bfs(&adj, s);
            for (d, want) in dist.iter().enumerate().skip(1) {
                let path = find_path(&adj, s, d);
                assert_eq!(Some(path.len() - 1), *want);
                assert_eq!((path[0], *path.last().unwrap()), (s, d));
                for w in path.windows(2) {
                    assert!(edges.contains(&(w[0].min(w[1]), w[0].max(w[1]))));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tree_has_one_fewer_edge_than_nodes(seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), 1, 15);
        prop_assert_eq!(g.edge_count(), g.node_count() - 1);
    }

    #[test]
    fn subgraph_grows_with_m(seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = random_graph(&mut r, 2, 8);
        let a = random_graph(&mut r, 2, 12);
        prop_assert!(align_subgraph(&q, &a, 0).is_empty());
        let answer_edges = undirected_edges(&a);
        let mut previous = align_subgraph(&q, &a, 0);
        for m in 1..=5 {
            let next = align_subgraph(&q, &a, m);
            prop_assert!(previous.is_subset_of(&next), "m = {}", m);
            prop_assert!(next.edges.is_subset(&answer_edges));
            prop_assert!(next.nodes.iter().all(|&v| (1..=a.node_count()).contains(&v)));
            previous = next;
        }
    }

    #[test]
    fn coverage_values_in_unit_interval(seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = random_graph(&mut r, 1, 8);
        let a = random_graph(&mut r, 1, 12);
        let m = r.gen_range(0..5);
        let c = graph_coverage_features(&q, &a, m);
        for v in [c.answer, c.question, relation_coverage(&q, &a), vocabulary_coverage(&q, &a)] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
