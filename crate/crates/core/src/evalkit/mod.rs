//! Scoring against gold annotations: per-sentence correctness and contiguity,
//! alignment error rate, threshold sweeps, and the side-by-side comparison
//! table.

mod aer;
mod corpus;
mod report;
mod score;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::align::AlignmentMap;
use crate::markup::StyledText;
use crate::pipelines::PipelineError;

pub use aer::{aer, AerScore};
pub use corpus::{load_corpus, seal_corpus, CorpusEntry, SealedFixtures};
pub use report::{render_comparison, score_run, MethodReport, ReportFormat};
pub use score::{contiguity, failed_sentence, score_sentence, style_label, styled_phrase, SentenceScore, StyleScore};
pub use sweep::{threshold_sweep, SweepRow};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("style id {0} does not occur in the document")]
    UnknownStyleId(u32),
    #[error("alignment maps differ in shape: {pred_source}x{pred_target} vs {gold_source}x{gold_target}")]
    DimensionMismatch { pred_source: usize, pred_target: usize, gold_source: usize, gold_target: usize },
    #[error("thresholds must be sorted ascending")]
    UnsortedThresholds,
    #[error("alignment pair count rose from {before} to {after} at threshold {threshold}")]
    NonMonotone { threshold: f64, before: usize, after: usize },
    #[error("{records} gold records but {matrices} matrices")]
    InputCount { records: usize, matrices: usize },
    #[error("reports cover different sentences: {0}")]
    FixtureSetMismatch(String),
    #[error("gold record {id}: {message}")]
    BadGold { id: String, message: String },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl EvalError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::UnknownStyleId(_) => "unknown_style_id",
            Self::DimensionMismatch { .. } => "dimension_mismatch",
            Self::UnsortedThresholds => "unsorted_thresholds",
            Self::NonMonotone { .. } => "non_monotone_sweep",
            Self::InputCount { .. } => "input_count",
            Self::FixtureSetMismatch(_) => "fixture_set_mismatch",
            Self::BadGold { .. } => "bad_gold",
            Self::Pipeline(e) => e.kind(),
        }
    }
}

/// A source sentence with its gold styling.
///
/// `gold_target` styles the reference translation. Methods that translate
/// differently are scored against the entry of `alternates` with the same
/// tokens. `gold_map` pairs styled source tokens with `gold_target` tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub id: String,
    pub source: StyledText,
    pub gold_target: StyledText,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternates: Vec<StyledText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_map: Option<AlignmentMap>,
    #[serde(default)]
    pub notes: String,
}

impl GoldRecord {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |message: String| Err(EvalError::BadGold { id: self.id.clone(), message });
        if let Some(map) = &self.gold_map {
            if map.source_len() != self.source.tokens().len() || map.target_len() != self.gold_target.tokens().len() {
                return bad(format!(
                    "gold_map is {}x{} but sentences have {} and {} tokens",
                    map.source_len(),
                    map.target_len(),
                    self.source.tokens().len(),
                    self.gold_target.tokens().len()
                ));
            }
        }
        let ids: Vec<u32> = self.source.style_table().ids().collect();
        for g in std::iter::once(&self.gold_target).chain(&self.alternates) {
            if let Some(extra) = g.style_table().ids().find(|id| !ids.contains(id)) {
                return bad(format!("gold uses style {extra} absent from the source"));
            }
        }
        Ok(())
    }

    /// The gold styling whose tokens match `target`, if any.
    pub fn gold_for(&self, target: &StyledText) -> Option<&StyledText> {
        std::iter::once(&self.gold_target).chain(&self.alternates).find(|g| g.tokens() == target.tokens())
    }
}

/// Reads a gold fixture file (a JSON array of records) and validates each record.
pub fn load_gold(path: &std::path::Path) -> Result<Vec<GoldRecord>, EvalError> {
    let bad = |message: String| EvalError::BadGold { id: path.display().to_string(), message };
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let records: Vec<GoldRecord> = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}
