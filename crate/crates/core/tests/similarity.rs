mod common;

use common::*;
use deptrigger::baselines::{
    bm25_score, ngram_score, semantic_similarity, AnswerPool, Bm25Params, EmbeddingTable,
};
use deptrigger::graphsim::{
    cosine, graph_similarity_features, tfidf_vector, Alphas, DfTable, DfTables, Level,
    WeightedVector,
};
use deptrigger::DependencyGraph;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn corpus(r: &mut impl Rng, n: usize) -> Vec<DependencyGraph> {
    (0..n).map(|_| random_graph(r, 1, 10)).collect()
}

fn words(r: &mut impl Rng, vocab: &[&str], max: usize) -> Vec<String> {
    let n = r.gen_range(0..=max);
    (0..n).map(|_| vocab[r.gen_range(0..vocab.len())].to_string()).collect()
}

const VOCAB: [&str; 10] = ["who", "founded", "acme", "in", "1990", "jones", "the", "a", "city", "river"];

fn embeddings() -> EmbeddingTable {
    let mut text = String::new();
    for (i, w) in VOCAB.iter().enumerate() {
        let x = i as f64;
        text.push_str(&format!("{w} {} {} {}\n", (x * 0.7).sin(), (x * 1.3).cos(), x / 10.0 - 0.4));
    }
    EmbeddingTable::parse(&text).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn similarities_are_symmetric_and_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let docs = corpus(&mut r, 12);
        let tables = DfTables::build(docs.iter()).unwrap();
        let alphas = Alphas { word: r.gen_range(0.0..3.0), pair: r.gen_range(0.0..3.0), triplet: 0.0 };
        let (q, a) = (&docs[0], &docs[1]);
        let s1 = graph_similarity_features(q, a, &tables, &alphas);
        let s2 = graph_similarity_features(a, q, &tables, &alphas);
        for (x, y) in [(s1.word, s2.word), (s1.pair, s2.pair), (s1.triplet, s2.triplet)] {
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn raising_alpha_never_adds_keys(seed in any::<u64>(), lo in 0.0f64..4.0, step in 0.0f64..4.0) {
        let mut r = rng(seed);
        let docs = corpus(&mut r, 8);
        for level in Level::ALL {
            let table = DfTable::build(docs.iter(), level).unwrap();
            let low = tfidf_vector(&docs[0], &table, lo);
            let high = tfidf_vector(&docs[0], &table, lo + step);
            prop_assert!(high.entries.keys().all(|k| low.entries.contains_key(k)));
        }
    }

    #[test]
    fn cosine_ignores_common_scale(
        a in proptest::collection::vec(0.0f64..5.0, 6),
        b in proptest::collection::vec(0.0f64..5.0, 6),
        c in 0.01f64..100.0,
    ) {
        let vec = |w: &[f64], s: f64| -> WeightedVector {
            w.iter().enumerate().map(|(i, x)| (format!("k{i}"), x * s)).collect()
        };
        let base = cosine(&vec(&a, 1.0), &vec(&b, 1.0));
        let scaled = cosine(&vec(&a, c), &vec(&b, c));
        prop_assert!((base - scaled).abs() < 1e-12);
    }

    #[test]
    fn bm25_non_negative_with_rare_terms(seed in any::<u64>()) {
        // Each question word sits in at most one of five candidates, so
        // every idf is positive.
        let mut r = rng(seed);
        let mut pool_docs: Vec<Vec<String>> = (0..5)
            .map(|i| {
                let mut d = words(&mut r, &["x", "y", "z"], 4);
                d.push(VOCAB[i].to_string());
                d
            })
            .collect();
        pool_docs.shuffle(&mut r);
        let pool = AnswerPool::new(pool_docs.clone());
        let q = words(&mut r, &VOCAB[..5], 6);
        for d in &pool_docs {
            let s = bm25_score(&q, d, &pool, Bm25Params::default());
            prop_assert!(s >= 0.0 && s.is_finite());
        }
    }

    #[test]
    fn bm25_pool_order_does_not_matter(seed in any::<u64>()) {
        let mut r = rng(seed);
        let docs: Vec<Vec<String>> = (0..5).map(|_| words(&mut r, &VOCAB, 8)).collect();
        let q = words(&mut r, &VOCAB, 5);
        let pool = AnswerPool::new(docs.clone());
        let mut shuffled = docs.clone();
        shuffled.shuffle(&mut r);
        let pool2 = AnswerPool::new(shuffled);
        for d in &docs {
            let p = Bm25Params::default();
            prop_assert_eq!(bm25_score(&q, d, &pool, p), bm25_score(&q, d, &pool2, p));
            prop_assert!(bm25_score(&q, d, &pool, p).is_finite());
        }
    }

    #[test]
    fn ngram_score_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = words(&mut r, &VOCAB, 8);
        let a = words(&mut r, &VOCAB, 12);
        let s = ngram_score(&q, &a, 3);
        prop_assert!((0.0..=0.5).contains(&s));
    }

    #[test]
    fn semantic_similarity_symmetric_and_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let emb = embeddings();
        let q = words(&mut r, &VOCAB, 6);
        let a = words(&mut r, &VOCAB, 6);
        let s = semantic_similarity(&q, &a, &emb);
        prop_assert!((-1.0..=1.0).contains(&s));
        prop_assert!((s - semantic_similarity(&a, &q, &emb)).abs() < 1e-12);
    }
}
