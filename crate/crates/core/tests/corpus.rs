mod common;

use common::*;
use deptrigger::corpus::{attach_blocks, parse_conllu, parse_wikiqa, validate_tree, write_wikiqa};
use proptest::prelude::*;
use rand::Rng;

/// Random WikiQA rows: `(question_id, question, doc_title, sentence_id, sentence, label)`.
fn random_tsv(r: &mut impl Rng) -> (String, usize) {
    let mut out = String::from("QuestionID\tQuestion\tDocumentID\tDocumentTitle\tSentenceID\tSentence\tLabel\n");
    let mut rows = 0;
    for q in 0..r.gen_range(1..6) {
        let question = words(r, 4);
        for c in 0..r.gen_range(1..5) {
            let label = r.gen_range(0..2);
            out.push_str(&format!("Q{q}\t{question}\tD{q}\tTitle {q}\tQ{q}-{c}\t{}\t{label}\n", words(r, 7)));
            rows += 1;
        }
    }
    (out, rows)
}

fn words(r: &mut impl Rng, max: usize) -> String {
    let n = r.gen_range(1..=max);
    (0..n).map(|_| LEMMAS[r.gen_range(0..LEMMAS.len())]).collect::<Vec<_>>().join(" ")
}

fn conllu_block(r: &mut impl Rng, text: &str) -> String {
    let forms: Vec<&str> = text.split(' ').collect();
    let heads = random_heads(r, forms.len());
    let mut block = String::new();
    for (i, f) in forms.iter().enumerate() {
        let rel = if heads[i + 1] == 0 { "root" } else { "dep" };
        block.push_str(&format!("{}\t{f}\t{f}\tNOUN\t_\t_\t{}\t{rel}\t_\t_\n", i + 1, heads[i + 1]));
    }
    block.push('\n');
    block
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tsv_round_trip(seed in any::<u64>()) {
        let (tsv, rows) = random_tsv(&mut rng(seed));
        let groups = parse_wikiqa(&tsv).unwrap();
        prop_assert_eq!(groups.iter().map(|g| g.candidates.len()).sum::<usize>(), rows);
        let mut buf = Vec::new();
        write_wikiqa(&groups, &mut buf).unwrap();
        let again = parse_wikiqa(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(again, groups);
    }

    #[test]
    fn positional_attach_yields_trees(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (tsv, _) = random_tsv(&mut r);
        let groups = parse_wikiqa(&tsv).unwrap();
        let mut conllu = String::new();
        for g in &groups {
            conllu.push_str(&conllu_block(&mut r, &g.question.text));
        }
        for g in &groups {
            for c in &g.candidates {
                conllu.push_str(&conllu_block(&mut r, &c.sentence.text));
            }
        }
        let parsed = attach_blocks(groups, parse_conllu(&conllu).unwrap(), None).unwrap();
        for g in &parsed {
            prop_assert!(validate_tree(&g.question.tokens).is_ok());
            for c in &g.candidates {
                prop_assert!(c.sentence.is_parsed());
                prop_assert!(validate_tree(&c.sentence.tokens).is_ok());
                prop_assert_eq!(c.sentence.tokens.len(), c.sentence.text.split(' ').count());
            }
        }
    }
}
