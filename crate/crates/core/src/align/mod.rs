//! Alignment mathematics: the alignment set, cosine similarity over an
//! embedding lexicon, attention-matrix alignment, and an IBM Model 1 EM
//! baseline.

mod attention;
mod cosine;
mod export;
mod ibm1;
mod lexicon;
mod map;
mod matrix;

pub use attention::{attention_align, AttentionParams, OovPolicy};
pub use cosine::{cosine_similarity, top_k_indices};
pub use export::{parse_matrices, AttentionExport, ExportFailure, ExportMetadata};
pub use ibm1::{ibm1_align, ibm1_train, Ibm1Model, Ibm1Trainer};
pub use lexicon::{load_lexicon, EmbeddingLexicon};
pub use map::AlignmentMap;
pub use matrix::{AlignmentMatrix, ROW_SUM_TOLERANCE};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AlignError {
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("vectors are empty")]
    EmptyVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("pair ({j}, {i}) outside {source_len}x{target_len}")]
    PairOutOfRange { j: usize, i: usize, source_len: usize, target_len: usize },
    #[error("source index {index} outside sentence of {len} tokens")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("threshold {0} outside [-1, 1]")]
    InvalidThreshold(f64),
    #[error("matrix shape {rows}x{cols} does not match {source_len} source and {target_len} target tokens")]
    MatrixShape { rows: usize, cols: usize, source_len: usize, target_len: usize },
    #[error("row {row} has a non-finite or negative weight")]
    BadWeight { row: usize },
    #[error("row {row} sums to {sum}, outside 1 ± {ROW_SUM_TOLERANCE}")]
    RowSum { row: usize, sum: f64 },
    #[error("corpus has no usable sentence pairs")]
    EmptyCorpus,
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("lexicon line {line}: {message}")]
    LexiconFormat { line: usize, message: String },
    #[error("lexicon line {line}: expected {expected} components, got {got}")]
    LexiconDimension { line: usize, expected: usize, got: usize },
    #[error("lexicon has no non-zero vectors")]
    EmptyLexicon,
    #[error("word {0:?} missing from lexicon")]
    OutOfVocabulary(String),
    #[error("bad attention matrix file: {0}")]
    Interchange(String),
    #[error("read error: {0}")]
    Io(String),
}
