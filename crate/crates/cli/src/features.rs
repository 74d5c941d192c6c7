//! Feature TSV files: a header `question_id, candidate_id, label, <features>`
//! followed by one row per QA pair in corpus order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use deptrigger::eval::ScoredGroup;
use deptrigger::{FeatureVector, Label};

use crate::error::CliError;

const FIXED: [&str; 3] = ["question_id", "candidate_id", "label"];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub question_id: String,
    pub candidate_id: String,
    pub label: Label,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub path: PathBuf,
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn to_tsv(&self) -> String {
        let mut out = FIXED.join("\t");
        for n in &self.names {
            out.push('\t');
            out.push_str(n);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\t{}", r.question_id, r.candidate_id, r.label.as_u8()));
            for v in &r.values {
                out.push_str(&format!("\t{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::File::create(path)
            .and_then(|mut f| f.write_all(self.to_tsv().as_bytes()))
            .map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let content = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&content, path)
    }

    pub fn parse(content: &str, path: &Path) -> Result<Self, CliError> {
        let bad = |line: usize, message: String| CliError::FeatureFile {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = content.lines().enumerate();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad(1, "empty feature file".into()))?
            .1
            .split('\t')
            .collect();
        if header.len() < FIXED.len() || header[..3] != FIXED {
            return Err(bad(1, format!("header must start with {}", FIXED.join(", "))));
        }
        let names: Vec<String> = header[3..].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != header.len() {
                return Err(bad(line_no, format!("expected {} columns, found {}", header.len(), cols.len())));
            }
            let label = Label::parse(cols[2]).ok_or_else(|| bad(line_no, format!("label {:?} is not 0 or 1", cols[2])))?;
            let values = cols[3..]
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(line_no, format!("{s:?} is not a finite number")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(FeatureRow {
                question_id: cols[0].to_string(),
                candidate_id: cols[1].to_string(),
                label,
                values,
            });
        }
        Ok(FeatureTable {
            path: path.to_path_buf(),
            names,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Result<usize, CliError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError::FeatureFile {
                path: self.path.clone(),
                line: 1,
                message: format!("no column named {name:?}"),
            })
    }

    /// Rows restricted to the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Vec<FeatureVector>, CliError> {
        let idx = names
            .iter()
            .map(|n| self.column(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .rows
            .iter()
            .map(|r| FeatureVector::new(idx.iter().map(|&i| r.values[i]).collect()))
            .collect())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Groups consecutive rows sharing a question id, attaching `scores`
    /// (one per row).
    pub fn scored_groups(&self, scores: &[f64]) -> Vec<ScoredGroup> {
        let mut groups: Vec<ScoredGroup> = Vec::new();
        for (r, &s) in self.rows.iter().zip(scores) {
            let entry = (r.candidate_id.clone(), s, r.label);
            match groups.last_mut() {
                Some(g) if g.question_id == r.question_id => g.candidates.push(entry),
                _ => groups.push(ScoredGroup::new(r.question_id.clone(), vec![entry])),
            }
        }
        groups
    }
}
