use serde::{Deserialize, Serialize};

use super::{AlignError, AlignmentMap};

/// Allowed deviation of each row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-3;

/// A row-stochastic source × target score matrix, typically last-layer
/// cross-attention aggregated to words. Row `j` holds the weights of every
/// target word for source word `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct AlignmentMatrix {
    source_tokens: Vec<String>,
    target_tokens: Vec<String>,
    weights: Vec<Vec<f64>>,
}

impl AlignmentMatrix {
    pub fn new(
        source_tokens: Vec<String>,
        target_tokens: Vec<String>,
        weights: Vec<Vec<f64>>,
    ) -> Result<Self, AlignError> {
        let (source_len, target_len) = (source_tokens.len(), target_tokens.len());
        let shape_err = || AlignError::MatrixShape {
            rows: weights.len(),
            cols: weights.first().map_or(0, Vec::len),
            source_len,
            target_len,
        };
        if weights.len() != source_len || weights.iter().any(|r| r.len() != target_len) {
            return Err(shape_err());
        }
        for (row, w) in weights.iter().enumerate() {
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(AlignError::BadWeight { row });
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(AlignError::RowSum { row, sum });
            }
        }
        Ok(Self { source_tokens, target_tokens, weights })
    }

    /// A matrix that puts each source row's mass evenly on its aligned
    /// targets. Rows without links are uniform.
    pub fn from_alignment(
        source_tokens: Vec<String>,
        target_tokens: Vec<String>,
        map: &AlignmentMap,
    ) -> Result<Self, AlignError> {
        let (j_len, i_len) = (source_tokens.len(), target_tokens.len());
        if map.source_len() != j_len || map.target_len() != i_len {
            return Err(AlignError::MatrixShape {
                rows: map.source_len(),
                cols: map.target_len(),
                source_len: j_len,
                target_len: i_len,
            });
        }
        let weights = (0..j_len)
            .map(|j| {
                let linked: Vec<usize> = map.targets_of(j).collect();
                let mut row = vec![0.0; i_len];
                if linked.is_empty() {
                    row.iter_mut().for_each(|w| *w = 1.0 / i_len as f64);
                } else {
                    for i in &linked {
                        row[*i] = 1.0 / linked.len() as f64;
                    }
                }
                row
            })
            .collect();
        Self::new(source_tokens, target_tokens, weights)
    }

    pub fn source_tokens(&self) -> &[String] {
        &self.source_tokens
    }

    pub fn target_tokens(&self) -> &[String] {
        &self.target_tokens
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.weights[j]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn source_len(&self) -> usize {
        self.source_tokens.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_tokens.len()
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    source_tokens: Vec<String>,
    target_tokens: Vec<String>,
    weights: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRepr> for AlignmentMatrix {
    type Error = AlignError;
    fn try_from(r: MatrixRepr) -> Result<Self, Self::Error> {
        AlignmentMatrix::new(r.source_tokens, r.target_tokens, r.weights)
    }
}

impl From<AlignmentMatrix> for MatrixRepr {
    fn from(m: AlignmentMatrix) -> Self {
        MatrixRepr { source_tokens: m.source_tokens, target_tokens: m.target_tokens, weights: m.weights }
    }
}
