use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{sha256_hex, BackendError, Completer, CompletionRequest, TranslationRequest, Translator};

/// A request as recorded in a replay fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplayRequest {
    Translate(TranslationRequest),
    Complete(CompletionRequest),
}

impl ReplayRequest {
    /// Hex SHA-256 of the request's JSON form. Field order is fixed by the
    /// struct definitions, so the digest is stable across runs.
    pub fn digest(&self) -> String {
        // serializing these plain structs cannot fail
        let json = serde_json::to_string(self).unwrap_or_default();
        sha256_hex(json.as_bytes())
    }
}

/// One fixture entry. `request` is optional; when present the loader checks
/// that it still hashes to `request_digest`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub request_digest: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request: Option<ReplayRequest>,
}

impl ReplayRecord {
    pub fn new(request: ReplayRequest, response: impl Into<String>) -> Self {
        Self { request_digest: request.digest(), response: response.into(), request: Some(request) }
    }
}

/// Answers translation and completion requests from recorded responses.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    responses: HashMap<String, String>,
}

impl ReplayBackend {
    pub fn from_records(records: impl IntoIterator<Item = ReplayRecord>) -> Result<Self, BackendError> {
        let mut responses = HashMap::new();
        for rec in records {
            if let Some(req) = &rec.request {
                let actual = req.digest();
                if actual != rec.request_digest {
                    return Err(BackendError::Config(format!(
                        "stale replay fixture: recorded digest {} but request hashes to {actual}",
                        rec.request_digest
                    )));
                }
            }
            responses.entry(rec.request_digest).or_insert(rec.response);
        }
        Ok(Self { responses })
    }

    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("cannot read replay fixture {}: {e}", path.display())))?;
        let records: Vec<ReplayRecord> = serde_json::from_str(&text)
            .map_err(|e| BackendError::Config(format!("bad replay fixture {}: {e}", path.display())))?;
        Self::from_records(records)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    fn lookup(&self, req: ReplayRequest) -> Result<String, BackendError> {
        let digest = req.digest();
        self.responses.get(&digest).cloned().ok_or_else(|| BackendError::Remote {
            status: 404,
            body: format!("no replay fixture for request digest {digest}"),
        })
    }
}

impl Translator for ReplayBackend {
    fn translate(&self, req: &TranslationRequest) -> Result<String, BackendError> {
        req.validate()?;
        self.lookup(ReplayRequest::Translate(req.clone()))
    }
}

impl Completer for ReplayBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        req.validate()?;
        let out = self.lookup(ReplayRequest::Complete(req.clone()))?;
        if out.trim().is_empty() {
            return Err(BackendError::EmptyCompletion);
        }
        Ok(out)
    }
}
