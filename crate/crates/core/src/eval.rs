//! Answer-selection and answer-triggering metrics.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no answerable question to tune the threshold on")]
    NoAnswerable,
}

/// One scored candidate list, in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredGroup {
    pub question_id: String,
    pub candidates: Vec<(String, f64, Label)>,
}

impl ScoredGroup {
    pub fn new(question_id: impl Into<String>, candidates: Vec<(String, f64, Label)>) -> Self {
        ScoredGroup {
            question_id: question_id.into(),
            candidates,
        }
    }

    /// Builds a group with generated candidate ids `c0, c1, ...`.
    pub fn from_scores(question_id: impl Into<String>, scored: &[(f64, Label)]) -> Self {
        let candidates = scored
            .iter()
            .enumerate()
            .map(|(i, &(s, l))| (format!("c{i}"), s, l))
            .collect();
        ScoredGroup::new(question_id, candidates)
    }

    pub fn is_answerable(&self) -> bool {
        self.candidates.iter().any(|c| c.2.is_positive())
    }

    /// Labels in rank order: descending score, ties by corpus order.
    fn ranked_labels(&self) -> Vec<Label> {
        let mut order: Vec<usize> = (0..self.candidates.len()).collect();
        order.sort_by(|&a, &b| {
            self.candidates[b]
                .1
                .partial_cmp(&self.candidates[a].1)
                .unwrap_or(Ordering::Equal)
        });
        order.into_iter().map(|i| self.candidates[i].2).collect()
    }

    /// Index of the highest-scoring candidate, earliest on ties.
    pub fn top(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, c) in self.candidates.iter().enumerate() {
            if best.is_none_or(|b| c.1 > self.candidates[b].1) {
                best = Some(i);
            }
        }
        best
    }
}

pub fn average_precision(group: &ScoredGroup) -> Option<f64> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, label) in group.ranked_labels().into_iter().enumerate() {
        if label.is_positive() {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    (hits > 0).then(|| sum / hits as f64)
}

pub fn reciprocal_rank(group: &ScoredGroup) -> Option<f64> {
    group
        .ranked_labels()
        .into_iter()
        .position(Label::is_positive)
        .map(|r| 1.0 / (r + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub questions_total: usize,
    pub questions_answerable: usize,
    pub questions_triggered: usize,
    pub triggers_correct: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub map_value: f64,
    pub mrr_value: f64,
    /// Percentages in [0, 100].
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub threshold: f64,
    pub counts: Counts,
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn triggering_report(groups: &[ScoredGroup], threshold: f64) -> EvalReport {
    let mut counts = Counts {
        questions_total: groups.len(),
        ..Counts::default()
    };
    let (mut ap_sum, mut rr_sum) = (0.0, 0.0);
    for g in groups {
        if let (Some(ap), Some(rr)) = (average_precision(g), reciprocal_rank(g)) {
            counts.questions_answerable += 1;
            ap_sum += ap;
            rr_sum += rr;
        }
        if let Some(top) = g.top() {
            let (_, score, label) = &g.candidates[top];
            if *score > threshold {
                counts.questions_triggered += 1;
                if label.is_positive() {
                    counts.triggers_correct += 1;
                }
            }
        }
    }
    let answerable = counts.questions_answerable;
    let mean = |s: f64| if answerable == 0 { 0.0 } else { s / answerable as f64 };
    let precision = percent(counts.triggers_correct, counts.questions_triggered);
    let recall = percent(counts.triggers_correct, answerable);
    EvalReport {
        map_value: mean(ap_sum),
        mrr_value: mean(rr_sum),
        precision,
        recall,
        f1: f_score(precision, recall),
        threshold,
        counts,
    }
}

/// Candidate thresholds: one below the lowest top score, midpoints between
/// consecutive distinct top scores, one above the highest.
pub fn candidate_thresholds(groups: &[ScoredGroup]) -> Vec<f64> {
    let mut tops: Vec<f64> = groups
        .iter()
        .filter_map(|g| g.top().map(|i| g.candidates[i].1))
        .collect();
    tops.sort_by(f64::total_cmp);
    tops.dedup();
    let (Some(&lo), Some(&hi)) = (tops.first(), tops.last()) else {
        return vec![0.0];
    };
    let mut out = vec![lo - 1.0];
    out.extend(tops.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    out.push(hi + 1.0);
    out
}

/// Threshold maximizing F1 on `groups`, with that F1. Ties go to the smallest
/// threshold, except that when nothing can be triggered correctly the
/// above-max threshold (trigger nothing) is returned.
pub fn tune_threshold(groups: &[ScoredGroup]) -> Result<(f64, f64), EvalError> {
    if !groups.iter().any(ScoredGroup::is_answerable) {
        return Err(EvalError::NoAnswerable);
    }
    let thresholds = candidate_thresholds(groups);
    let mut best = (*thresholds.last().expect("non-empty"), 0.0);
    for &t in &thresholds {
        let f1 = triggering_report(groups, t).f1;
        if f1 > best.1 || (f1 == best.1 && f1 > 0.0 && t < best.0) {
            best = (t, f1);
        }
    }
    Ok(best)
}

impl EvalReport {
    /// Machine-readable `key=value` lines.
    pub fn key_values(&self) -> String {
        let c = &self.counts;
        format!(
            "map={}\nmrr={}\nprecision={}\nrecall={}\nf1={}\nthreshold={}\nquestions_total={}\nquestions_answerable={}\nquestions_triggered={}\ntriggers_correct={}\n",
            self.map_value,
            self.mrr_value,
            self.precision,
            self.recall,
            self.f1,
            self.threshold,
            c.questions_total,
            c.questions_answerable,
            c.questions_triggered,
            c.triggers_correct
        )
    }

    /// Parses the output of [`EvalReport::key_values`].
    pub fn parse_key_values(text: &str) -> Option<EvalReport> {
        let mut map = std::collections::HashMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                map.insert(k.trim(), v.trim());
            }
        }
        let f = |k: &str| map.get(k)?.parse::<f64>().ok();
        let u = |k: &str| map.get(k)?.parse::<usize>().ok();
        Some(EvalReport {
            map_value: f("map")?,
            mrr_value: f("mrr")?,
            precision: f("precision")?,
            recall: f("recall")?,
            f1: f("f1")?,
            threshold: f("threshold")?,
            counts: Counts {
                questions_total: u("questions_total")?,
                questions_answerable: u("questions_answerable")?,
                questions_triggered: u("questions_triggered")?,
                triggers_correct: u("triggers_correct")?,
            },
        })
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.counts;
        writeln!(f, "answer selection: MAP {:.4}  MRR {:.4}", self.map_value, self.mrr_value)?;
        writeln!(
            f,
            "answer triggering (threshold {}): P {:.2}%  R {:.2}%  F1 {:.2}%",
            self.threshold, self.precision, self.recall, self.f1
        )?;
        write!(
            f,
            "questions: {} total, {} answerable, {} triggered, {} correct",
            c.questions_total, c.questions_answerable, c.questions_triggered, c.triggers_correct
        )
    }
}
