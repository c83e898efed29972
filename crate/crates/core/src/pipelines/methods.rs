use serde::{Deserialize, Serialize};

use super::hybrid::{locate_word, parse_maps, render_unigrams};
use super::prompts::{fill, PromptSet};
use super::{MethodKind, PipelineError, ProjectionPolicy, StyledTranslation, Warning};
use crate::align::{attention_align, AlignmentMap, AlignmentMatrix, AttentionParams, EmbeddingLexicon};
use crate::backends::{Completer, CompletionRequest, TranslationRequest, Translator};
use crate::markup::{detokenize, parse_tagged, render_tagged, tokenize, MarkupFormat, StyledText};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LangPair {
    pub source: String,
    pub target: String,
}

impl Default for LangPair {
    fn default() -> Self {
        Self { source: "en".into(), target: "de".into() }
    }
}

/// Settings shared by the backend-driven methods.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOptions {
    pub langs: LangPair,
    pub prompts: PromptSet,
    pub max_output_tokens: u32,
    pub policy: ProjectionPolicy,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            langs: LangPair::default(),
            prompts: PromptSet::default(),
            max_output_tokens: 512,
            policy: ProjectionPolicy::default(),
        }
    }
}

/// Aligns with the attention matrix, then projects.
///
/// The matrix's target tokens are the translation; they must survive a
/// detokenize/tokenize round trip so spans can be expressed on text.
pub fn run_attention_method(
    source: &StyledText,
    matrix: &AlignmentMatrix,
    lexicon: &EmbeddingLexicon,
    params: &AttentionParams,
    policy: &ProjectionPolicy,
) -> Result<StyledTranslation, PipelineError> {
    if source.surfaces() != matrix.source_tokens() {
        return Err(PipelineError::SourceTokenMismatch);
    }
    let text = detokenize(matrix.target_tokens());
    if tokenize(&text).iter().map(|t| t.surface.as_str()).ne(matrix.target_tokens().iter().map(String::as_str)) {
        return Err(PipelineError::TargetTokenMismatch(text));
    }
    let map = attention_align(matrix, &source.styled_token_indices(), lexicon, params)?;
    let (target, warnings) = super::project_styles(source, &StyledText::plain(text), &map, policy)?;
    Ok(StyledTranslation { target, map, anomalies: Vec::new(), warnings, method: MethodKind::Attention })
}

pub fn nmt_tags_request(source: &StyledText, langs: &LangPair) -> Result<TranslationRequest, PipelineError> {
    let body = render_tagged(source, MarkupFormat::NumberedTags)?;
    Ok(TranslationRequest::new(body, &langs.source, &langs.target, !source.spans().is_empty())?)
}

/// Translates with numbered tags and reads the styles back from the response.
/// Malformed tags become anomalies, never errors.
pub fn run_nmt_tags_method(
    source: &StyledText,
    backend: &dyn Translator,
    opts: &MethodOptions,
) -> Result<StyledTranslation, PipelineError> {
    let response = backend.translate(&nmt_tags_request(source, &opts.langs)?)?;
    let parsed = parse_tagged(response.trim(), MarkupFormat::NumberedTags, &source.style_table());
    let map = AlignmentMap::new(source.tokens().len(), parsed.doc.tokens().len());
    Ok(StyledTranslation {
        target: parsed.doc,
        map,
        anomalies: parsed.anomalies,
        warnings: Vec::new(),
        method: MethodKind::NmtTags,
    })
}

/// The completion request for the delimiter method and the format it uses.
/// Plain `##start##`/`##end##` carry one style; with several styles the
/// numbered variant is used instead.
pub fn llm_delimiters_request(
    source: &StyledText,
    opts: &MethodOptions,
) -> Result<(CompletionRequest, MarkupFormat), PipelineError> {
    let (format, system) = if source.style_table().len() > 1 {
        (MarkupFormat::NumberedDelimiters, &opts.prompts.llm_numbered_system)
    } else {
        (MarkupFormat::Delimiters, &opts.prompts.llm_system)
    };
    let body = render_tagged(source, format)?;
    let user = fill(&opts.prompts.llm_user, &[("source", &body)]);
    Ok((CompletionRequest::new(system.clone(), user, opts.max_output_tokens)?, format))
}

pub fn run_llm_delimiters_method(
    source: &StyledText,
    backend: &dyn Completer,
    opts: &MethodOptions,
) -> Result<StyledTranslation, PipelineError> {
    let (req, format) = llm_delimiters_request(source, opts)?;
    let response = backend.complete(&req)?;
    let parsed = parse_tagged(response.trim(), format, &source.style_table());
    let mut warnings = Vec::new();
    if format == MarkupFormat::NumberedDelimiters {
        warnings.push(Warning::NumberedDelimiters { styles: source.style_table().len() });
    }
    let map = AlignmentMap::new(source.tokens().len(), parsed.doc.tokens().len());
    Ok(StyledTranslation {
        target: parsed.doc,
        map,
        anomalies: parsed.anomalies,
        warnings,
        method: MethodKind::LlmDelimiters,
    })
}

pub fn hybrid_translation_request(source: &StyledText, langs: &LangPair) -> Result<TranslationRequest, PipelineError> {
    Ok(TranslationRequest::new(source.text(), &langs.source, &langs.target, false)?)
}

/// Styled source words in source order, duplicates kept.
fn unigrams(source: &StyledText) -> Vec<(usize, &str)> {
    source.styled_token_indices().into_iter().map(|j| (j, source.tokens()[j].surface.as_str())).collect()
}

pub fn hybrid_map_request(
    source: &StyledText,
    target_text: &str,
    opts: &MethodOptions,
) -> Result<CompletionRequest, PipelineError> {
    let words: Vec<&str> = unigrams(source).into_iter().map(|(_, w)| w).collect();
    let user = fill(
        &opts.prompts.hybrid_user,
        &[("source", source.text()), ("target", target_text), ("unigrams", &render_unigrams(&words))],
    );
    Ok(CompletionRequest::new(opts.prompts.hybrid_system.clone(), user, opts.max_output_tokens)?)
}

/// Plain NMT translation, then LLM unigram maps located in the translation,
/// then projection. A source with no styled words skips the LLM call.
pub fn run_hybrid_method(
    source: &StyledText,
    nmt: &dyn Translator,
    llm: &dyn Completer,
    opts: &MethodOptions,
) -> Result<StyledTranslation, PipelineError> {
    let translated = nmt.translate(&hybrid_translation_request(source, &opts.langs)?)?;
    let target = StyledText::plain(translated.trim());
    let mut map = AlignmentMap::new(source.tokens().len(), target.tokens().len());
    let words = unigrams(source);
    if words.is_empty() {
        return Ok(StyledTranslation {
            target,
            map,
            anomalies: Vec::new(),
            warnings: Vec::new(),
            method: MethodKind::Hybrid,
        });
    }

    let response = llm.complete(&hybrid_map_request(source, target.text(), opts)?)?;
    let maps = parse_maps(&response)?;
    let mut warnings = Vec::new();
    if maps.len() != words.len() {
        warnings.push(Warning::LengthMismatch { unigrams: words.len(), maps: maps.len() });
    }
    let surfaces = target.surfaces();
    for (&(j, unigram), word) in words.iter().zip(&maps) {
        match locate_word(word, &surfaces, j, source.tokens().len(), opts.policy.occurrence_tiebreak) {
            Some(i) => {
                map.insert(j, i)?;
            }
            None => warnings.push(Warning::HallucinatedWord { unigram: unigram.to_string(), word: word.clone() }),
        }
    }
    let (styled, more) = super::project_styles(source, &target, &map, &opts.policy)?;
    warnings.extend(more);
    Ok(StyledTranslation { target: styled, map, anomalies: Vec::new(), warnings, method: MethodKind::Hybrid })
}
