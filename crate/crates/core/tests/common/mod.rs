#![allow(dead_code)]

use deptrigger::corpus::{Sentence, Token};
use deptrigger::DependencyGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LEMMAS: [&str; 8] = ["die", "david", "born", "city", "film", "who", "make", "year"];
pub const UPOS: [&str; 6] = ["NOUN", "PROPN", "VERB", "AUX", "ADJ", "ADV"];
pub const RELS: [&str; 5] = ["nsubj", "obj", "obl", "amod", "compound"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random head vector for a tree over `1..=n`: a random node order where
/// each node after the first attaches to an earlier one.
pub fn random_heads(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0; n + 1];
    for k in 1..n {
        heads[order[k]] = order[rng.gen_range(0..k)];
    }
    heads
}

/// `(form, lemma, upos, head, deprel)` rows to a parsed sentence.
pub fn sentence(id: &str, rows: &[(&str, &str, &str, usize, &str)]) -> Sentence {
    let tokens = rows
        .iter()
        .enumerate()
        .map(|(i, &(form, lemma, upos, head, rel))| Token::new(i + 1, form, lemma, upos, head, rel))
        .collect();
    let text = rows.iter().map(|r| r.0).collect::<Vec<_>>().join(" ");
    Sentence::parsed(id, &text, tokens).expect("fixture must be a tree")
}

/// A random parsed sentence with `n` tokens over a small vocabulary, so
/// lemmas, tags and relations collide often.
pub fn random_sentence(rng: &mut impl Rng, id: &str, n: usize) -> Sentence {
    let heads = random_heads(rng, n);
    let tokens: Vec<Token> = (1..=n)
        .map(|i| {
            let lemma = LEMMAS[rng.gen_range(0..LEMMAS.len())];
            let upos = UPOS[rng.gen_range(0..UPOS.len())];
            let rel = if heads[i] == 0 { "root" } else { RELS[rng.gen_range(0..RELS.len())] };
            Token::new(i, lemma, lemma, upos, heads[i], rel)
        })
        .collect();
    let text = tokens.iter().map(|t| t.form.as_str()).collect::<Vec<_>>().join(" ");
    Sentence::parsed(id, &text, tokens).expect("generated heads form a tree")
}

pub fn random_graph(rng: &mut impl Rng, min: usize, max: usize) -> DependencyGraph {
    let n = rng.gen_range(min..=max);
    DependencyGraph::build(&random_sentence(rng, "g", n))
}
