//! The four end-to-end methods and the span projection they share.
//!
//! Attention and hybrid produce an [`AlignmentMap`] and hand it to
//! [`project_styles`]. NMT tags and LLM delimiters get styles back
//! positionally from markup in the response, so their map is left empty.

mod hybrid;
mod jobs;
mod methods;
mod project;
mod prompts;

use serde::{Deserialize, Serialize};

use crate::align::{AlignError, AlignmentMap};
use crate::backends::BackendError;
use crate::markup::{MarkupError, ParseAnomaly, StyledText};

pub use hybrid::{locate_word, parse_maps, render_unigrams};
pub use jobs::{
    load_job, run_job, AttentionInputs, Job, JobDocument, JobError, MethodRun, SentenceFailure, SentenceResult,
    SentenceTiming,
};
pub use methods::{
    hybrid_map_request, hybrid_translation_request, llm_delimiters_request, nmt_tags_request, run_attention_method,
    run_hybrid_method, run_llm_delimiters_method, run_nmt_tags_method, LangPair, MethodOptions,
};
pub use project::project_styles;
pub use prompts::PromptSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Attention,
    NmtTags,
    LlmDelimiters,
    Hybrid,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [Self::Attention, Self::NmtTags, Self::LlmDelimiters, Self::Hybrid];

    pub fn label(self) -> &'static str {
        match self {
            Self::Attention => "Attention",
            Self::NmtTags => "NMT",
            Self::LlmDelimiters => "LLM",
            Self::Hybrid => "Hybrid",
        }
    }
}

impl std::str::FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").to_lowercase().as_str() {
            "attention" => Ok(Self::Attention),
            "nmt_tags" | "nmt" => Ok(Self::NmtTags),
            "llm_delimiters" | "llm" => Ok(Self::LlmDelimiters),
            "hybrid" => Ok(Self::Hybrid),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

/// Which occurrence of a repeated target word receives the style.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccurrenceTiebreak {
    /// The occurrence whose relative sentence position is closest to the
    /// source word's.
    #[default]
    RelativePosition,
    LastOccurrence,
    FirstOccurrence,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnalignedStyledWord {
    Drop,
    #[default]
    WarnDrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionPolicy {
    #[serde(default)]
    pub occurrence_tiebreak: OccurrenceTiebreak,
    #[serde(default)]
    pub unaligned_styled_word: UnalignedStyledWord,
    /// Merge runs of the same style regardless of which source span they
    /// came from. When off, each source span projects to its own runs.
    #[serde(default = "yes")]
    pub merge_adjacent: bool,
}

fn yes() -> bool {
    true
}

impl Default for ProjectionPolicy {
    fn default() -> Self {
        Self {
            occurrence_tiebreak: OccurrenceTiebreak::default(),
            unaligned_styled_word: UnalignedStyledWord::default(),
            merge_adjacent: true,
        }
    }
}

/// Non-fatal findings recorded alongside a translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// A styled source token had no aligned target token; its style was dropped.
    UnalignedStyledWord { source_index: usize, word: String },
    /// The LLM returned a word that does not occur in the target sentence.
    HallucinatedWord { unigram: String, word: String },
    /// The maps list and unigram list differ in length; pairing stopped at the shorter.
    LengthMismatch { unigrams: usize, maps: usize },
    /// The response was translated with numbered delimiters because the
    /// source has more than one style.
    NumberedDelimiters { styles: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyledTranslation {
    pub target: StyledText,
    pub map: AlignmentMap,
    #[serde(default)]
    pub anomalies: Vec<ParseAnomaly>,
    #[serde(default)]
    pub warnings: Vec<Warning>,
    pub method: MethodKind,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Markup(#[from] MarkupError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(
        "map dimensions {map_source}x{map_target} do not match {source_len} source and {target_len} target tokens"
    )]
    DimensionMismatch { map_source: usize, map_target: usize, source_len: usize, target_len: usize },
    #[error("matrix tokens do not match the source document")]
    SourceTokenMismatch,
    #[error("matrix target tokens do not round-trip through text: {0:?}")]
    TargetTokenMismatch(String),
    #[error("no parseable maps list in response: {0:?}")]
    MapParse(String),
}

impl PipelineError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Backend(e) => e.kind(),
            Self::Markup(_) => "markup",
            Self::Align(_) => "align",
            Self::DimensionMismatch { .. } => "dimension_mismatch",
            Self::SourceTokenMismatch | Self::TargetTokenMismatch(_) => "tokenization_mismatch",
            Self::MapParse(_) => "map_parse_error",
        }
    }
}
