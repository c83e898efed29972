//! Translation and completion services behind two small traits, plus the
//! offline mocks the test suite runs on.
//!
//! Live clients speak HTTP ([`HttpTranslator`], [`HttpCompleter`]). The
//! [`ReplayBackend`] answers from recorded fixtures keyed by a request digest
//! and the [`DictionaryTranslator`] substitutes words and applies reordering
//! rules, so every pipeline can run without network access.

mod config;
mod dictionary;
mod http;
mod replay;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{load_backend_configs, BackendConfig, BackendKind, BackendRegistry};
pub use dictionary::{DictionarySpec, DictionaryTranslator, ReorderRule, RulePosition};
pub use http::{HttpCompleter, HttpTranslator};
pub use replay::{ReplayBackend, ReplayRecord, ReplayRequest};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("remote error {status}: {body}")]
    Remote { status: u16, body: String },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("completion was empty")]
    EmptyCompletion,
    #[error("words missing from the mock dictionary: {}", .0.join(", "))]
    OutOfVocabulary(Vec<String>),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Transport { .. } => "transport",
            Self::Remote { .. } => "remote",
            Self::Auth(_) => "auth",
            Self::EmptyCompletion => "empty_completion",
            Self::OutOfVocabulary(_) => "out_of_vocabulary",
            Self::InvalidRequest(_) => "invalid_request",
            Self::Config(_) => "config",
        }
    }
}

/// Text to translate. `body` may carry `<Sn>` tags when `preserve_markup` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRequest {
    pub body: String,
    pub source_lang: String,
    pub target_lang: String,
    pub preserve_markup: bool,
}

impl TranslationRequest {
    pub fn new(
        body: impl Into<String>,
        source_lang: impl Into<String>,
        target_lang: impl Into<String>,
        preserve_markup: bool,
    ) -> Result<Self, BackendError> {
        let req = Self {
            body: body.into(),
            source_lang: source_lang.into(),
            target_lang: target_lang.into(),
            preserve_markup,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.body.trim().is_empty() {
            return Err(BackendError::InvalidRequest("empty body".into()));
        }
        if self.source_lang.is_empty() || self.target_lang.is_empty() {
            return Err(BackendError::InvalidRequest("language codes must be non-empty".into()));
        }
        if self.source_lang == self.target_lang {
            return Err(BackendError::InvalidRequest("source and target language are the same".into()));
        }
        Ok(())
    }
}

/// A chat-style completion: one system prompt and one user turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub max_output_tokens: u32,
}

impl CompletionRequest {
    pub fn new(
        system_prompt: impl Into<String>,
        user_prompt: impl Into<String>,
        max_output_tokens: u32,
    ) -> Result<Self, BackendError> {
        let req = Self { system_prompt: system_prompt.into(), user_prompt: user_prompt.into(), max_output_tokens };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.system_prompt.trim().is_empty() || self.user_prompt.trim().is_empty() {
            return Err(BackendError::InvalidRequest("prompts must be non-empty".into()));
        }
        if self.max_output_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_output_tokens must be positive".into()));
        }
        Ok(())
    }
}

pub trait Translator: Send + Sync {
    fn translate(&self, req: &TranslationRequest) -> Result<String, BackendError>;
}

pub trait Completer: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError>;
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_validation() {
        assert!(TranslationRequest::new("the house", "en", "de", false).is_ok());
        assert!(TranslationRequest::new("  ", "en", "de", false).is_err());
        assert!(TranslationRequest::new("x", "en", "en", false).is_err());
        assert!(TranslationRequest::new("x", "", "de", false).is_err());
        assert!(CompletionRequest::new("sys", "user", 0).is_err());
        assert!(CompletionRequest::new("", "user", 10).is_err());
    }
}
