//! Writes the bundled mini-corpus: three 12-question WikiQA splits with
//! synthetic CoNLL-U parses, toy embeddings and a run configuration.
//!
//! cargo run -p deptrigger-cli --example gen_minicorpus -- <out-dir> [seed]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Row = (String, String, &'static str, usize, &'static str);

struct Sent {
    rows: Vec<Row>,
}

impl Sent {
    fn new(rows: &[(&str, &str, &'static str, usize, &'static str)]) -> Self {
        Sent {
            rows: rows
                .iter()
                .map(|&(f, l, u, h, r)| (f.to_string(), l.to_string(), u, h, r))
                .collect(),
        }
    }

    fn text(&self) -> String {
        self.rows.iter().map(|r| r.0.as_str()).collect::<Vec<_>>().join(" ")
    }

    fn conllu(&self, sent_id: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(id) = sent_id {
            writeln!(out, "# sent_id = {id}").unwrap();
        }
        writeln!(out, "# text = {}", self.text()).unwrap();
        for (i, (form, lemma, upos, head, rel)) in self.rows.iter().enumerate() {
            writeln!(out, "{}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_", i + 1).unwrap();
        }
        out.push('\n');
        out
    }
}

/// (past form, lemma)
const VERBS: [(&str, &str); 6] = [
    ("founded", "found"),
    ("wrote", "write"),
    ("built", "build"),
    ("directed", "direct"),
    ("discovered", "discover"),
    ("painted", "paint"),
];
const ENTITIES: [&str; 12] = [
    "acme", "hamlet", "olympia", "vertigo", "neptune", "guernica", "initech", "ulysses", "alhambra",
    "casablanca", "radium", "sunflowers",
];
const PEOPLE: [&str; 8] = ["jones", "smith", "garcia", "nakamura", "okafor", "larsen", "rossi", "dubois"];

fn question(verb: (&str, &str), ent: &str) -> Sent {
    Sent::new(&[
        ("who", "who", "PRON", 2, "nsubj"),
        (verb.0, verb.1, "VERB", 0, "root"),
        (ent, ent, "PROPN", 2, "obj"),
        ("?", "?", "PUNCT", 2, "punct"),
    ])
}

fn correct(verb: (&str, &str), ent: &str, person: &str, year: &str) -> Sent {
    Sent::new(&[
        (person, person, "PROPN", 2, "nsubj"),
        (verb.0, verb.1, "VERB", 0, "root"),
        (ent, ent, "PROPN", 2, "obj"),
        ("in", "in", "ADP", 5, "case"),
        (year, year, "NUM", 2, "obl"),
    ])
}

/// Repeats the question's words in a passive frame.
fn distractor(verb: (&str, &str), ent: &str) -> Sent {
    Sent::new(&[
        (ent, ent, "PROPN", 2, "nsubj"),
        ("says", "say", "VERB", 0, "root"),
        (ent, ent, "PROPN", 5, "nsubj:pass"),
        ("was", "be", "AUX", 5, "aux:pass"),
        (verb.0, verb.1, "VERB", 2, "ccomp"),
        ("by", "by", "ADP", 7, "case"),
        ("nobody", "nobody", "PRON", 5, "obl"),
    ])
}

fn fillers(verb: (&str, &str), person: &str, year: &str) -> Vec<Sent> {
    vec![
        Sent::new(&[
            ("the", "the", "DET", 2, "det"),
            ("weather", "weather", "NOUN", 4, "nsubj"),
            ("was", "be", "AUX", 4, "cop"),
            ("mild", "mild", "ADJ", 0, "root"),
            ("that", "that", "DET", 6, "det"),
            ("year", "year", "NOUN", 4, "obl:tmod"),
        ]),
        Sent::new(&[
            ("many", "many", "ADJ", 2, "amod"),
            ("visitors", "visitor", "NOUN", 3, "nsubj"),
            ("arrive", "arrive", "VERB", 0, "root"),
            ("in", "in", "ADP", 5, "case"),
            ("summer", "summer", "NOUN", 3, "obl"),
        ]),
        Sent::new(&[
            ("the", "the", "DET", 2, "det"),
            ("river", "river", "NOUN", 3, "nsubj"),
            ("floods", "flood", "VERB", 0, "root"),
            ("every", "every", "DET", 5, "det"),
            ("spring", "spring", "NOUN", 3, "obl:tmod"),
        ]),
        Sent::new(&[
            ("local", "local", "ADJ", 2, "amod"),
            ("schools", "school", "NOUN", 3, "nsubj"),
            ("teach", "teach", "VERB", 0, "root"),
            ("music", "music", "NOUN", 3, "obj"),
        ]),
        Sent::new(&[
            ("prices", "price", "NOUN", 2, "nsubj"),
            ("rose", "rise", "VERB", 0, "root"),
            ("sharply", "sharply", "ADV", 2, "advmod"),
            ("in", "in", "ADP", 5, "case"),
            (year, year, "NUM", 2, "obl"),
        ]),
        Sent::new(&[
            (person, person, "PROPN", 2, "nsubj"),
            (verb.0, verb.1, "VERB", 0, "root"),
            ("a", "a", "DET", 5, "det"),
            ("different", "different", "ADJ", 5, "amod"),
            ("company", "company", "NOUN", 2, "obj"),
        ]),
    ]
}

struct Group {
    qid: String,
    question: Sent,
    title: String,
    candidates: Vec<(String, Sent, u8)>,
}

fn make_split(rng: &mut ChaCha8Rng, prefix: &str, n: usize) -> Vec<Group> {
    let mut entities = ENTITIES.to_vec();
    entities.shuffle(rng);
    (0..n)
        .map(|i| {
            let verb = VERBS[rng.gen_range(0..VERBS.len())];
            let ent = entities[i % entities.len()];
            let person = PEOPLE[rng.gen_range(0..PEOPLE.len())];
            let year = rng.gen_range(1890..2010).to_string();
            let answerable = i % 2 == 0;
            let mut pool: Vec<(Sent, u8)> = vec![(distractor(verb, ent), 0)];
            let mut extra = fillers(verb, person, &year);
            extra.shuffle(rng);
            let n_fillers = if answerable { 3 } else { 4 };
            pool.extend(extra.into_iter().take(n_fillers).map(|s| (s, 0)));
            if answerable {
                pool.push((correct(verb, ent, person, &year), 1));
            }
            pool.shuffle(rng);
            let qid = format!("{prefix}Q{i}");
            Group {
                title: ent.to_string(),
                question: question(verb, ent),
                candidates: pool
                    .into_iter()
                    .enumerate()
                    .map(|(k, (s, l))| (format!("{qid}-{k}"), s, l))
                    .collect(),
                qid,
            }
        })
        .collect()
}

fn tsv(groups: &[Group]) -> String {
    let mut out = String::from("QuestionID\tQuestion\tDocumentID\tDocumentTitle\tSentenceID\tSentence\tLabel\n");
    for g in groups {
        for (cid, s, l) in &g.candidates {
            writeln!(out, "{}\t{}\tD{}\t{}\t{cid}\t{}\t{l}", g.qid, g.question.text(), g.qid, g.title, s.text()).unwrap();
        }
    }
    out
}

/// Questions first, then candidates, in corpus order.
fn positional_conllu(groups: &[Group]) -> String {
    let mut out = String::new();
    for g in groups {
        out.push_str(&g.question.conllu(None));
    }
    for g in groups {
        for (_, s, _) in &g.candidates {
            out.push_str(&s.conllu(None));
        }
    }
    out
}

/// Blocks in shuffled order with `sent_id`s, plus the index mapping them back.
fn indexed_conllu(rng: &mut ChaCha8Rng, groups: &[Group]) -> (String, String) {
    let mut items: Vec<(&str, &Sent)> = Vec::new();
    for g in groups {
        items.push((&g.qid, &g.question));
        for (cid, s, _) in &g.candidates {
            items.push((cid, s));
        }
    }
    items.shuffle(rng);
    let mut conllu = String::new();
    let mut index = String::new();
    for (k, (id, s)) in items.iter().enumerate() {
        let sid = format!("s{k:03}");
        conllu.push_str(&s.conllu(Some(&sid)));
        writeln!(index, "{sid}\t{id}").unwrap();
    }
    (conllu, index)
}

fn embeddings(rng: &mut ChaCha8Rng, splits: &[&[Group]]) -> String {
    let mut words: Vec<String> = splits
        .iter()
        .flat_map(|gs| gs.iter())
        .flat_map(|g| std::iter::once(&g.question).chain(g.candidates.iter().map(|c| &c.1)))
        .flat_map(|s| s.rows.iter().map(|r| r.0.to_lowercase()))
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .collect();
    words.sort();
    words.dedup();
    let mut out = String::new();
    for w in words {
        let v: Vec<String> = (0..8).map(|_| format!("{:.4}", rng.gen_range(-1.0..1.0))).collect();
        writeln!(out, "{w} {}", v.join(" ")).unwrap();
    }
    out
}

const CONFIG: &str = "\
[train]
wikiqa = train.tsv
conllu = train.conllu

[dev]
wikiqa = dev.tsv
conllu = dev.conllu

[test]
wikiqa = test.tsv
conllu = test.conllu
index = test.index

[resources]
embeddings = embeddings.txt

[features]
manifest = ged, sim_word, sim_pair, sim_triplet, rel_cov, graph_cov_ans, graph_cov_ques, vocab_cov
baselines = bm25, ngram, semvec

[params]
alpha_word = 0
alpha_pair = 0
alpha_triplet = 0

[output]
dir = out
";

fn write(dir: &Path, name: &str, content: &str) {
    fs::write(dir.join(name), content).unwrap_or_else(|e| panic!("{name}: {e}"));
}

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().expect("usage: gen_minicorpus <out-dir> [seed]"));
    let seed: u64 = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(7);
    fs::create_dir_all(&dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let train = make_split(&mut rng, "T", 12);
    let dev = make_split(&mut rng, "D", 12);
    let test = make_split(&mut rng, "E", 12);
    write(&dir, "train.tsv", &tsv(&train));
    write(&dir, "train.conllu", &positional_conllu(&train));
    write(&dir, "dev.tsv", &tsv(&dev));
    write(&dir, "dev.conllu", &positional_conllu(&dev));
    write(&dir, "test.tsv", &tsv(&test));
    let (conllu, index) = indexed_conllu(&mut rng, &test);
    write(&dir, "test.conllu", &conllu);
    write(&dir, "test.index", &index);
    write(&dir, "embeddings.txt", &embeddings(&mut rng, &[&train, &dev, &test]));
    write(&dir, "mini.ini", CONFIG);
    println!("wrote mini-corpus (seed {seed}) to {}", dir.display());
}
