use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{EvalError, GoldRecord};
use crate::markup::{detokenize, StyledText};
use crate::pipelines::{MethodKind, StyledTranslation};

/// True when every token carrying `style_id` sits in one unbroken run.
pub fn contiguity(doc: &StyledText, style_id: u32) -> Result<bool, EvalError> {
    let sets = doc.style_token_sets();
    let tokens = sets.get(&style_id).ok_or(EvalError::UnknownStyleId(style_id))?;
    Ok(is_run(tokens))
}

fn is_run(tokens: &BTreeSet<usize>) -> bool {
    match (tokens.first(), tokens.last()) {
        (Some(a), Some(b)) => b - a + 1 == tokens.len(),
        _ => true,
    }
}

fn all_contiguous(doc: &StyledText) -> bool {
    doc.style_token_sets().values().all(is_run)
}

/// Attribute kinds across all styles, e.g. `bold+hyperlink`.
pub fn style_label(doc: &StyledText) -> String {
    let table = doc.style_table();
    let kinds: BTreeSet<&'static str> =
        table.ids().filter_map(|id| table.get(id)).flat_map(|attrs| attrs.iter().map(|a| a.kind())).collect();
    kinds.into_iter().collect::<Vec<_>>().join("+")
}

/// The styled words, with gaps shown as an ellipsis.
pub fn styled_phrase(doc: &StyledText) -> String {
    let mut runs: Vec<Vec<&str>> = Vec::new();
    let mut last = None;
    for i in doc.styled_token_indices() {
        if last.is_none_or(|l| l + 1 != i) {
            runs.push(Vec::new());
        }
        if let Some(run) = runs.last_mut() {
            run.push(doc.tokens()[i].surface.as_str());
        }
        last = Some(i);
    }
    runs.iter().map(|r| detokenize(r)).collect::<Vec<_>>().join(" … ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleScore {
    pub style_id: u32,
    pub correct: bool,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub id: String,
    pub method: MethodKind,
    /// The prediction's tokens match no gold translation; the sentence is
    /// left out of aggregates.
    pub tokenization_mismatch: bool,
    /// Error kind when the method produced no translation for this sentence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub contiguous_source: bool,
    /// Gold styling contiguity on the translation this method produced.
    pub contiguous_target: Option<bool>,
    pub predicted_contiguous: Option<bool>,
    pub correct: bool,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub styles: Vec<StyleScore>,
}

/// `(precision, recall, f1)`; an empty prediction against an empty gold is
/// perfect, and an empty side otherwise scores zero.
fn prf(pred: &BTreeSet<(u32, usize)>, gold: &BTreeSet<(u32, usize)>) -> (f64, f64, f64) {
    if pred.is_empty() && gold.is_empty() {
        return (1.0, 1.0, 1.0);
    }
    let hit = pred.intersection(gold).count() as f64;
    let p = if pred.is_empty() { 0.0 } else { hit / pred.len() as f64 };
    let r = if gold.is_empty() { 0.0 } else { hit / gold.len() as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

fn pairs(sets: &BTreeMap<u32, BTreeSet<usize>>) -> BTreeSet<(u32, usize)> {
    sets.iter().flat_map(|(&s, toks)| toks.iter().map(move |&t| (s, t))).collect()
}

/// Score for a sentence the method failed on: wrong, with nothing to
/// measure contiguity on.
pub fn failed_sentence(method: MethodKind, gold: &GoldRecord, kind: &str) -> SentenceScore {
    SentenceScore {
        id: gold.id.clone(),
        method,
        tokenization_mismatch: false,
        failure: Some(kind.to_string()),
        contiguous_source: all_contiguous(&gold.source),
        contiguous_target: None,
        predicted_contiguous: None,
        correct: false,
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        styles: Vec::new(),
    }
}

/// Compares a prediction with the gold styling of the same translation.
/// Correctness is an exact match of the token set of every style.
pub fn score_sentence(pred: &StyledTranslation, gold: &GoldRecord) -> SentenceScore {
    let contiguous_source = all_contiguous(&gold.source);
    let Some(reference) = gold.gold_for(&pred.target) else {
        return SentenceScore {
            id: gold.id.clone(),
            method: pred.method,
            tokenization_mismatch: true,
            failure: None,
            contiguous_source,
            contiguous_target: None,
            predicted_contiguous: None,
            correct: false,
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            styles: Vec::new(),
        };
    };
    let want = reference.style_token_sets();
    let got = pred.target.style_token_sets();
    let ids: BTreeSet<u32> = want.keys().chain(got.keys()).copied().collect();
    let empty = BTreeSet::new();
    let styles: Vec<StyleScore> = ids
        .into_iter()
        .map(|id| {
            let w = want.get(&id).unwrap_or(&empty);
            let g = got.get(&id).unwrap_or(&empty);
            let one = |s: &BTreeSet<usize>| s.iter().map(|&t| (id, t)).collect::<BTreeSet<_>>();
            let (precision, recall, f1) = prf(&one(g), &one(w));
            StyleScore { style_id: id, correct: w == g, precision, recall, f1 }
        })
        .collect();
    let (precision, recall, f1) = prf(&pairs(&got), &pairs(&want));
    SentenceScore {
        id: gold.id.clone(),
        method: pred.method,
        tokenization_mismatch: false,
        failure: None,
        contiguous_source,
        contiguous_target: Some(all_contiguous(reference)),
        predicted_contiguous: Some(all_contiguous(&pred.target)),
        correct: styles.iter().all(|s| s.correct),
        precision,
        recall,
        f1,
        styles,
    }
}
