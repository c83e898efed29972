use serde::{Deserialize, Serialize};

use super::{aer, score_sentence, EvalError, GoldRecord};
use crate::align::{AlignmentMatrix, AttentionParams, EmbeddingLexicon, OovPolicy};
use crate::pipelines::{run_attention_method, ProjectionPolicy, UnalignedStyledWord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub mean_f1: f64,
    /// Mean over records that carry a gold map; `None` when none do.
    pub mean_aer: Option<f64>,
    pub correct: usize,
    pub pairs: usize,
}

/// Runs the attention method over every record at each threshold.
///
/// Raising the threshold can only remove candidates, so the total pair count
/// must not grow; a violation is reported as an error.
pub fn threshold_sweep(
    records: &[GoldRecord],
    matrices: &[AlignmentMatrix],
    lexicon: &EmbeddingLexicon,
    k: usize,
    oov: OovPolicy,
    thresholds: &[f64],
) -> Result<Vec<SweepRow>, EvalError> {
    if records.len() != matrices.len() {
        return Err(EvalError::InputCount { records: records.len(), matrices: matrices.len() });
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(EvalError::UnsortedThresholds);
    }
    let policy = ProjectionPolicy { unaligned_styled_word: UnalignedStyledWord::Drop, ..Default::default() };
    let mut rows: Vec<SweepRow> = Vec::new();
    for &threshold in thresholds {
        let params = AttentionParams { k, threshold, oov };
        let (mut f1, mut aer_sum, mut aer_n, mut correct, mut pairs, mut scored) = (0.0, 0.0, 0usize, 0, 0, 0usize);
        for (rec, matrix) in records.iter().zip(matrices) {
            let out = run_attention_method(&rec.source, matrix, lexicon, &params, &policy)?;
            pairs += out.map.len();
            let s = score_sentence(&out, rec);
            if !s.tokenization_mismatch {
                scored += 1;
                f1 += s.f1;
                correct += usize::from(s.correct);
            }
            if let Some(gold) = &rec.gold_map {
                aer_sum += aer(&out.map, gold)?.aer;
                aer_n += 1;
            }
        }
        if let Some(prev) = rows.last() {
            if pairs > prev.pairs {
                return Err(EvalError::NonMonotone { threshold, before: prev.pairs, after: pairs });
            }
        }
        rows.push(SweepRow {
            threshold,
            mean_f1: if scored == 0 { 0.0 } else { f1 / scored as f64 },
            mean_aer: (aer_n > 0).then(|| aer_sum / aer_n as f64),
            correct,
            pairs,
        });
    }
    Ok(rows)
}
