use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{top_k_indices, AlignError, AlignmentMap, AlignmentMatrix, EmbeddingLexicon};

/// What to do when a word has no usable vector in the lexicon.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OovPolicy {
    /// Keep the candidate on attention rank alone.
    #[default]
    Permissive,
    /// Drop the candidate; zero vectors become errors.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttentionParams {
    /// Candidates per styled source word.
    pub k: usize,
    /// A candidate survives when its similarity is strictly greater.
    pub threshold: f64,
    pub oov: OovPolicy,
}

impl Default for AttentionParams {
    fn default() -> Self {
        Self { k: 3, threshold: 0.5, oov: OovPolicy::Permissive }
    }
}

/// Aligns styled source words through the attention matrix.
///
/// For each styled source index `j`, the `k` highest-weighted targets in row
/// `j` are candidates; `(j, i)` enters the map when the cosine similarity of
/// the two words exceeds `params.threshold`. Every surviving candidate is
/// kept, so one source word may align to several targets.
pub fn attention_align(
    matrix: &AlignmentMatrix,
    styled_source: &BTreeSet<usize>,
    lexicon: &EmbeddingLexicon,
    params: &AttentionParams,
) -> Result<AlignmentMap, AlignError> {
    if !(-1.0..=1.0).contains(&params.threshold) {
        return Err(AlignError::InvalidThreshold(params.threshold));
    }
    let (j_len, i_len) = (matrix.source_len(), matrix.target_len());
    if let Some(&bad) = styled_source.iter().find(|&&j| j >= j_len) {
        return Err(AlignError::IndexOutOfRange { index: bad, len: j_len });
    }
    let mut map = AlignmentMap::new(j_len, i_len);
    for &j in styled_source {
        let src = &matrix.source_tokens()[j];
        for i in top_k_indices(matrix.row(j), params.k) {
            let tgt = &matrix.target_tokens()[i];
            let keep = match (lexicon.similarity(src, tgt), params.oov) {
                (Ok(Some(sim)), _) => sim > params.threshold,
                (Ok(None), OovPolicy::Permissive) | (Err(AlignError::ZeroVector), OovPolicy::Permissive) => true,
                (Ok(None), OovPolicy::Strict) => false,
                (Err(e), _) => return Err(e),
            };
            if keep {
                map.insert(j, i)?;
            }
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_string).collect()
    }

    fn three_by_three() -> (AlignmentMatrix, EmbeddingLexicon) {
        let m = AlignmentMatrix::new(
            toks("a b c"),
            toks("x y z"),
            vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.7, 0.1], vec![0.1, 0.2, 0.7]],
        )
        .unwrap();
        let e = |d: usize| (0..3).map(|k| if k == d { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        let lex = EmbeddingLexicon::from_entries(
            3,
            [("a", 0), ("x", 0), ("b", 1), ("y", 1), ("c", 2), ("z", 2)].map(|(w, d)| (w.to_string(), e(d))),
        )
        .unwrap();
        (m, lex)
    }

    #[test]
    fn derived_three_by_three() {
        // candidates by hand: row 0 top-3 = [0,1,2], sims (1,0,0); row 2 top-3 = [2,1,0], sims (1,0,0)
        let (m, lex) = three_by_three();
        let map = attention_align(&m, &[0, 2].into(), &lex, &AttentionParams::default()).unwrap();
        assert_eq!(map.pairs().iter().copied().collect::<Vec<_>>(), vec![(0, 0), (2, 2)]);
    }

    #[test]
    fn threshold_one_is_empty() {
        let (m, lex) = three_by_three();
        let p = AttentionParams { threshold: 1.0, ..Default::default() };
        assert!(attention_align(&m, &[0, 1, 2].into(), &lex, &p).unwrap().is_empty());
    }

    #[test]
    fn diagonal_identity() {
        let words = toks("The coffee was cold as ice .");
        let n = words.len();
        let weights = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let m = AlignmentMatrix::new(words.clone(), words.clone(), weights).unwrap();
        let lex = EmbeddingLexicon::from_entries(
            n,
            words.iter().enumerate().map(|(d, w)| (w.clone(), (0..n).map(|k| f64::from(u8::from(k == d))).collect())),
        )
        .unwrap();
        let map = attention_align(&m, &[1, 3].into(), &lex, &AttentionParams::default()).unwrap();
        assert_eq!(map.pairs().iter().copied().collect::<Vec<_>>(), vec![(1, 1), (3, 3)]);
    }

    #[test]
    fn oov_policies() {
        let m = AlignmentMatrix::new(toks("a q"), toks("x y"), vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let lex =
            EmbeddingLexicon::from_entries(1, [("a".to_string(), vec![1.0]), ("x".to_string(), vec![1.0])]).unwrap();
        let styled = [1].into();
        let permissive = attention_align(&m, &styled, &lex, &AttentionParams { k: 1, ..Default::default() }).unwrap();
        assert!(permissive.contains(1, 1));
        let strict = AttentionParams { k: 1, oov: OovPolicy::Strict, ..Default::default() };
        assert!(attention_align(&m, &styled, &lex, &strict).unwrap().is_empty());
    }

    #[test]
    fn zero_vector_policy() {
        let m = AlignmentMatrix::new(toks("a"), toks("x"), vec![vec![1.0]]).unwrap();
        let lex =
            EmbeddingLexicon::from_entries(1, [("a".to_string(), vec![1.0]), ("x".to_string(), vec![0.0])]).unwrap();
        let styled = [0].into();
        assert!(attention_align(&m, &styled, &lex, &AttentionParams::default()).unwrap().contains(0, 0));
        let strict = AttentionParams { oov: OovPolicy::Strict, ..Default::default() };
        assert_eq!(attention_align(&m, &styled, &lex, &strict), Err(AlignError::ZeroVector));
    }

    #[test]
    fn bad_inputs() {
        let (m, lex) = three_by_three();
        assert_eq!(
            attention_align(&m, &[3].into(), &lex, &AttentionParams::default()),
            Err(AlignError::IndexOutOfRange { index: 3, len: 3 })
        );
        let p = AttentionParams { threshold: 1.5, ..Default::default() };
        assert_eq!(attention_align(&m, &[0].into(), &lex, &p), Err(AlignError::InvalidThreshold(1.5)));
    }
}
