use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::align::AlignmentMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AerScore {
    pub precision: f64,
    pub recall: f64,
    pub aer: f64,
}

/// Alignment error rate with a sure-only gold set:
/// `1 - 2|A∩S| / (|A| + |S|)`. Two empty maps agree perfectly.
pub fn aer(pred: &AlignmentMap, gold: &AlignmentMap) -> Result<AerScore, EvalError> {
    if !pred.same_shape(gold) {
        return Err(EvalError::DimensionMismatch {
            pred_source: pred.source_len(),
            pred_target: pred.target_len(),
            gold_source: gold.source_len(),
            gold_target: gold.target_len(),
        });
    }
    let (a, s) = (pred.len() as f64, gold.len() as f64);
    if a + s == 0.0 {
        return Ok(AerScore { precision: 1.0, recall: 1.0, aer: 0.0 });
    }
    let hit = pred.pairs().intersection(gold.pairs()).count() as f64;
    Ok(AerScore {
        precision: if a == 0.0 { 0.0 } else { hit / a },
        recall: if s == 0.0 { 0.0 } else { hit / s },
        aer: 1.0 - 2.0 * hit / (a + s),
    })
}
