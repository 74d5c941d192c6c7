//! WikiQA-style corpus ingestion.
//!
//! Three inputs are read here: the 7-column question/candidate TSV, a CoNLL-U
//! file carrying one dependency parse per sentence (plus an optional index
//! file saying which block belongs to which question or candidate), and an
//! external score file with one real value per question/candidate pair.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("sentence {id}: {violation}")]
    InvalidParse { id: String, violation: TreeViolation },
    #[error("no parse for {} sentence(s): {}", .0.len(), .0.join(", "))]
    MissingParses(Vec<String>),
    #[error("duplicate mapping: {0}")]
    DuplicateMapping(String),
    #[error("positional alignment needs {expected} parse blocks, found {found}")]
    BlockCountMismatch { expected: usize, found: usize },
    #[error("question {question}: duplicate candidate id {candidate}")]
    DuplicateCandidate { question: String, candidate: String },
}

/// Structural defects that make a token list unusable as a dependency tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    NoRoot,
    MultipleRoots(usize),
    SelfLoop(usize),
    HeadOutOfRange { index: usize, head: usize },
    NonSequentialIndex { position: usize, index: usize },
    Cycle(usize),
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::NoRoot => write!(f, "single-root violation: no token has head 0"),
            TreeViolation::MultipleRoots(n) => {
                write!(f, "single-root violation: {n} tokens have head 0")
            }
            TreeViolation::SelfLoop(i) => write!(f, "token {i} is its own head"),
            TreeViolation::HeadOutOfRange { index, head } => {
                write!(f, "token {index} has head {head} outside the sentence")
            }
            TreeViolation::NonSequentialIndex { position, index } => {
                write!(f, "token at position {position} has index {index}")
            }
            TreeViolation::Cycle(i) => write!(f, "token {i} is on a head cycle"),
        }
    }
}

/// One token of a parsed sentence. `lemma` is always lowercase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub head: usize,
    pub deprel: String,
}

impl Token {
    /// Builds a token, lowercasing the lemma and falling back to the
    /// lowercased form when the lemma is empty or `_`.
    pub fn new(
        index: usize,
        form: &str,
        lemma: &str,
        upos: &str,
        head: usize,
        deprel: &str,
    ) -> Self {
        let lemma = if lemma.is_empty() || lemma == "_" {
            form.to_lowercase()
        } else {
            lemma.to_lowercase()
        };
        Token {
            index,
            form: form.to_string(),
            lemma,
            upos: upos.to_string(),
            xpos: "_".to_string(),
            head,
            deprel: deprel.to_string(),
        }
    }

    pub fn with_xpos(mut self, xpos: &str) -> Self {
        self.xpos = xpos.to_string();
        self
    }
}

/// A sentence with its raw text and (once parsed) its tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub sentence_id: String,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn unparsed(sentence_id: &str, text: &str) -> Self {
        Sentence {
            sentence_id: sentence_id.to_string(),
            text: text.to_string(),
            tokens: Vec::new(),
        }
    }

    /// Builds a parsed sentence, rejecting token lists that are not a
    /// single-rooted tree over sequential 1-based indices.
    pub fn parsed(sentence_id: &str, text: &str, tokens: Vec<Token>) -> Result<Self, CorpusError> {
        validate_tree(&tokens).map_err(|violation| CorpusError::InvalidParse {
            id: sentence_id.to_string(),
            violation,
        })?;
        Ok(Sentence {
            sentence_id: sentence_id.to_string(),
            text: text.to_string(),
            tokens,
        })
    }

    pub fn is_parsed(&self) -> bool {
        !self.tokens.is_empty()
    }
}

/// Checks the tree invariants on a token list.
pub fn validate_tree(tokens: &[Token]) -> Result<(), TreeViolation> {
    let n = tokens.len();
    let mut roots = 0;
    for (position, t) in tokens.iter().enumerate() {
        if t.index != position + 1 {
            return Err(TreeViolation::NonSequentialIndex {
                position: position + 1,
                index: t.index,
            });
        }
        if t.head == t.index {
            return Err(TreeViolation::SelfLoop(t.index));
        }
        if t.head > n {
            return Err(TreeViolation::HeadOutOfRange {
                index: t.index,
                head: t.head,
            });
        }
        if t.head == 0 {
            roots += 1;
        }
    }
    match roots {
        0 if n > 0 => return Err(TreeViolation::NoRoot),
        0 | 1 => {}
        r => return Err(TreeViolation::MultipleRoots(r)),
    }
    // With one root and in-range heads, every token must reach the root
    // within n steps.
    for t in tokens {
        let mut current = t.head;
        let mut steps = 0;
        while current != 0 {
            steps += 1;
            if steps > n {
                return Err(TreeViolation::Cycle(t.index));
            }
            current = tokens[current - 1].head;
        }
    }
    Ok(())
}

/// Binary gold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim() {
            "0" => Some(Label::Negative),
            "1" => Some(Label::Positive),
            _ => None,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub candidate_id: String,
    pub document_id: String,
    pub document_title: String,
    pub sentence: Sentence,
    pub label: Label,
}

/// A question with its candidate answers in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionGroup {
    pub question_id: String,
    pub question: Sentence,
    pub candidates: Vec<Candidate>,
}

impl QuestionGroup {
    pub fn is_answerable(&self) -> bool {
        self.candidates.iter().any(|c| c.label.is_positive())
    }

    pub fn pairs(&self) -> impl Iterator<Item = QaPair<'_>> + '_ {
        self.candidates.iter().map(move |c| QaPair {
            question_id: &self.question_id,
            candidate_id: &c.candidate_id,
            question: &self.question,
            answer: &c.sentence,
            gold_label: c.label,
        })
    }
}

/// A borrowed view of one question/answer pair.
#[derive(Debug, Clone, Copy)]
pub struct QaPair<'a> {
    pub question_id: &'a str,
    pub candidate_id: &'a str,
    pub question: &'a Sentence,
    pub answer: &'a Sentence,
    pub gold_label: Label,
}

fn read_to_string(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a WikiQA TSV file. See [`parse_wikiqa`].
pub fn load_wikiqa(path: impl AsRef<Path>) -> Result<Vec<QuestionGroup>, CorpusError> {
    parse_wikiqa(&read_to_string(path.as_ref())?)
}

/// Parses WikiQA TSV content (QuestionID, Question, DocumentID,
/// DocumentTitle, SentenceID, Sentence, Label). A first line whose label
/// column is not numeric is treated as a header. Groups come back in order of
/// first appearance, including groups without any positive candidate.
pub fn parse_wikiqa(content: &str) -> Result<Vec<QuestionGroup>, CorpusError> {
    let mut groups: Vec<QuestionGroup> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();

    for (i, raw) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 7 {
            return Err(CorpusError::Malformed {
                line: line_no,
                message: format!("expected 7 tab-separated columns, found {}", cols.len()),
            });
        }
        let label_col = cols[6].trim();
        let label = match Label::parse(label_col) {
            Some(l) => l,
            None if line_no == 1 && label_col.parse::<f64>().is_err() => continue,
            None => {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    message: format!("label must be 0 or 1, found {label_col:?}"),
                })
            }
        };
        let (qid, question, doc_id, doc_title, sid, sentence) =
            (cols[0], cols[1], cols[2], cols[3], cols[4], cols[5]);
        if !seen.insert((qid.to_string(), sid.to_string())) {
            return Err(CorpusError::DuplicateCandidate {
                question: qid.to_string(),
                candidate: sid.to_string(),
            });
        }
        let slot = *by_id.entry(qid.to_string()).or_insert_with(|| {
            groups.push(QuestionGroup {
                question_id: qid.to_string(),
                question: Sentence::unparsed(qid, question),
                candidates: Vec::new(),
            });
            groups.len() - 1
        });
        groups[slot].candidates.push(Candidate {
            candidate_id: sid.to_string(),
            document_id: doc_id.to_string(),
            document_title: doc_title.to_string(),
            sentence: Sentence::unparsed(sid, sentence),
            label,
        });
    }
    Ok(groups)
}

/// Writes groups back in the 7-column layout with a header row.
pub fn write_wikiqa<W: Write>(groups: &[QuestionGroup], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "QuestionID\tQuestion\tDocumentID\tDocumentTitle\tSentenceID\tSentence\tLabel"
    )?;
    for g in groups {
        for c in &g.candidates {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                g.question_id,
                g.question.text,
                c.document_id,
                c.document_title,
                c.candidate_id,
                c.sentence.text,
                c.label.as_u8()
            )?;
        }
    }
    Ok(())
}

/// One sentence block read from a CoNLL-U file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConlluBlock {
    /// Value of the `# sent_id` comment, if any.
    pub sent_id: Option<String>,
    /// 1-based position of the block in the file.
    pub ordinal: usize,
    /// Line number of the block's first line.
    pub line: usize,
    pub tokens: Vec<Token>,
}

impl ConlluBlock {
    /// Key used by index files: the `sent_id` when present, otherwise the
    /// block's 1-based ordinal.
    pub fn key(&self) -> String {
        self.sent_id
            .clone()
            .unwrap_or_else(|| self.ordinal.to_string())
    }
}

/// Parses CoNLL-U content into blocks. Multi-word token ranges (`3-4`) and
/// empty nodes (`5.1`) are skipped; tree invariants are not checked here.
pub fn parse_conllu(content: &str) -> Result<Vec<ConlluBlock>, CorpusError> {
    let mut blocks = Vec::new();
    let mut current: Option<ConlluBlock> = None;

    let flush = |current: &mut Option<ConlluBlock>, blocks: &mut Vec<ConlluBlock>| {
        if let Some(b) = current.take() {
            if !b.tokens.is_empty() || b.sent_id.is_some() {
                blocks.push(b);
            }
        }
    };

    for (i, raw) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut current, &mut blocks);
            continue;
        }
        let block = current.get_or_insert_with(|| ConlluBlock {
            sent_id: None,
            ordinal: blocks.len() + 1,
            line: line_no,
            tokens: Vec::new(),
        });
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    block.sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(CorpusError::Malformed {
                line: line_no,
                message: format!("CoNLL-U token line needs 10 columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let parse_idx = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| CorpusError::Malformed {
                line: line_no,
                message: format!("{what} {s:?} is not a non-negative integer"),
            })
        };
        let index = parse_idx(cols[0], "ID")?;
        let head = parse_idx(cols[6], "HEAD")?;
        block
            .tokens
            .push(Token::new(index, cols[1], cols[2], cols[3], head, cols[7]).with_xpos(cols[4]));
    }
    flush(&mut current, &mut blocks);
    Ok(blocks)
}

/// Reads a `conllu_sent_id<TAB>wikiqa_id` index file.
pub fn parse_index(content: &str) -> Result<Vec<(String, String)>, CorpusError> {
    let mut rows = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split('\t').collect::<Vec<_>>().as_slice() {
            [block, wikiqa] => rows.push((block.trim().to_string(), wikiqa.trim().to_string())),
            cols => {
                return Err(CorpusError::Malformed {
                    line: i + 1,
                    message: format!("index rows need 2 columns, found {}", cols.len()),
                })
            }
        }
    }
    Ok(rows)
}

/// Attaches parses to every question and candidate sentence.
///
/// With an index file, each row maps a block key (its `sent_id`, or its
/// 1-based ordinal when the block has none) to a QuestionID or SentenceID.
/// Without one, blocks are taken positionally: all questions in group order,
/// then all candidates in file order.
pub fn attach_parses(
    groups: Vec<QuestionGroup>,
    conllu_path: impl AsRef<Path>,
    index_path: Option<&Path>,
) -> Result<Vec<QuestionGroup>, CorpusError> {
    let blocks = parse_conllu(&read_to_string(conllu_path.as_ref())?)?;
    let index = match index_path {
        Some(p) => Some(parse_index(&read_to_string(p)?)?),
        None => None,
    };
    attach_blocks(groups, blocks, index.as_deref())
}

/// In-memory form of [`attach_parses`].
pub fn attach_blocks(
    mut groups: Vec<QuestionGroup>,
    blocks: Vec<ConlluBlock>,
    index: Option<&[(String, String)]>,
) -> Result<Vec<QuestionGroup>, CorpusError> {
    let total: usize = groups.iter().map(|g| 1 + g.candidates.len()).sum();
    match index {
        None => {
            if blocks.len() != total {
                return Err(CorpusError::BlockCountMismatch {
                    expected: total,
                    found: blocks.len(),
                });
            }
            let mut it = blocks.into_iter();
            for g in groups.iter_mut() {
                let b = it.next().expect("count checked");
                fill(&mut g.question, b.tokens)?;
            }
            for g in groups.iter_mut() {
                for c in g.candidates.iter_mut() {
                    let b = it.next().expect("count checked");
                    fill(&mut c.sentence, b.tokens)?;
                }
            }
        }
        Some(rows) => {
            let mut by_key: HashMap<String, ConlluBlock> = HashMap::new();
            for b in blocks {
                let key = b.key();
                if by_key.contains_key(&key) {
                    return Err(CorpusError::DuplicateMapping(format!(
                        "CoNLL-U block id {key} appears twice"
                    )));
                }
                by_key.insert(key, b);
            }
            let mut target: HashMap<&str, &str> = HashMap::new();
            let mut used_blocks: HashSet<&str> = HashSet::new();
            for (block, wikiqa) in rows {
                if target.insert(wikiqa.as_str(), block.as_str()).is_some() {
                    return Err(CorpusError::DuplicateMapping(format!(
                        "{wikiqa} is mapped more than once"
                    )));
                }
                if !used_blocks.insert(block.as_str()) {
                    return Err(CorpusError::DuplicateMapping(format!(
                        "block {block} is mapped more than once"
                    )));
                }
            }
            let mut missing = Vec::new();
            let mut lookup = |s: &mut Sentence| -> Result<(), CorpusError> {
                match target
                    .get(s.sentence_id.as_str())
                    .and_then(|k| by_key.get(*k))
                {
                    Some(b) => fill(s, b.tokens.clone()),
                    None => {
                        missing.push(s.sentence_id.clone());
                        Ok(())
                    }
                }
            };
            for g in groups.iter_mut() {
                lookup(&mut g.question)?;
                for c in g.candidates.iter_mut() {
                    lookup(&mut c.sentence)?;
                }
            }
            if !missing.is_empty() {
                return Err(CorpusError::MissingParses(missing));
            }
        }
    }
    Ok(groups)
}

fn fill(sentence: &mut Sentence, tokens: Vec<Token>) -> Result<(), CorpusError> {
    if tokens.is_empty() {
        return Err(CorpusError::MissingParses(vec![sentence.sentence_id.clone()]));
    }
    *sentence = Sentence::parsed(&sentence.sentence_id, &sentence.text, tokens)?;
    Ok(())
}

/// External per-pair scores keyed by (question_id, candidate_id).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreMap {
    pub scores: HashMap<(String, String), f64>,
    /// Rows whose key had already been seen (the later value wins).
    pub duplicates: usize,
}

impl ScoreMap {
    pub fn get(&self, question_id: &str, candidate_id: &str) -> Option<f64> {
        self.scores
            .get(&(question_id.to_string(), candidate_id.to_string()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<ScoreMap, CorpusError> {
    parse_scores(&read_to_string(path.as_ref())?)
}

/// Parses `question_id<TAB>candidate_id<TAB>score` rows.
pub fn parse_scores(content: &str) -> Result<ScoreMap, CorpusError> {
    let mut map = ScoreMap::default();
    for (i, raw) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(CorpusError::Malformed {
                line: line_no,
                message: format!("score rows need 3 columns, found {}", cols.len()),
            });
        }
        let score: f64 = cols[2]
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| CorpusError::Malformed {
                line: line_no,
                message: format!("score {:?} is not a finite number", cols[2]),
            })?;
        let key = (cols[0].to_string(), cols[1].to_string());
        if map.scores.insert(key, score).is_some() {
            map.duplicates += 1;
        }
    }
    Ok(map)
}
