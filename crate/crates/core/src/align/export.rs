use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AlignError, AlignmentMatrix};

/// Provenance written by the attention exporter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportMetadata {
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// A sentence the exporter could not process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportFailure {
    pub index: usize,
    pub message: String,
}

/// A batch of word-level attention matrices plus how they were made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionExport {
    pub metadata: ExportMetadata,
    pub records: Vec<AlignmentMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<ExportFailure>,
}

fn subword_marker(token: &str) -> bool {
    token.is_empty() || token.chars().any(char::is_whitespace) || token.starts_with('\u{2581}') || token.ends_with("@@")
}

impl AttentionExport {
    /// Checks that every token is a word rather than a subword piece.
    pub fn validate(&self) -> Result<(), AlignError> {
        for (n, m) in self.records.iter().enumerate() {
            if let Some(t) = m.source_tokens().iter().chain(m.target_tokens()).find(|t| subword_marker(t)) {
                return Err(AlignError::Interchange(format!("record {n}: {t:?} is not a word-level token")));
            }
        }
        Ok(())
    }

    /// The matrices in sentence order. Fails when any sentence is missing,
    /// since positions would no longer line up with the documents.
    pub fn into_matrices(self) -> Result<Vec<AlignmentMatrix>, AlignError> {
        self.validate()?;
        if let Some(f) = self.failures.first() {
            return Err(AlignError::Interchange(format!(
                "{} sentence(s) failed to export; first is {}: {}",
                self.failures.len(),
                f.index,
                f.message
            )));
        }
        Ok(self.records)
    }
}

/// Reads matrices from a bare array, a single matrix, or an exporter file
/// with `metadata` and `records`.
pub fn parse_matrices(json: &str) -> Result<(Vec<AlignmentMatrix>, Option<ExportMetadata>), AlignError> {
    let bad = |e: serde_json::Error| AlignError::Interchange(e.to_string());
    let value: serde_json::Value = serde_json::from_str(json).map_err(bad)?;
    match value {
        serde_json::Value::Array(_) => Ok((serde_json::from_value(value).map_err(bad)?, None)),
        serde_json::Value::Object(ref o) if o.contains_key("records") => {
            let export: AttentionExport = serde_json::from_value(value).map_err(bad)?;
            let metadata = export.metadata.clone();
            Ok((export.into_matrices()?, Some(metadata)))
        }
        other => Ok((vec![serde_json::from_value(other).map_err(bad)?], None)),
    }
}
