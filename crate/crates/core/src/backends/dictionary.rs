use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BackendError, TranslationRequest, Translator};
use crate::markup::{
    detokenize, is_punct, parse_markers, render_tagged, tokenize, MarkupFormat, StyleAttr, StyleSpan, StyledText,
};

/// Where a reordering rule moves its word group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RulePosition {
    /// Just before the next clause punctuation after the group, or the end.
    ClauseEnd,
    /// Just after the previous clause punctuation before the group, or the start.
    ClauseStart,
    /// An absolute token position, clamped to the sentence length.
    Index(usize),
}

/// Moves the first occurrence of `group` (source words, case-insensitive).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReorderRule {
    pub group: Vec<String>,
    pub to: RulePosition,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub lexicon: BTreeMap<String, String>,
    #[serde(default)]
    pub rules: Vec<ReorderRule>,
}

/// Word-for-word translation followed by reordering rules. Markup attached
/// to a word travels with it.
#[derive(Debug, Clone)]
pub struct DictionaryTranslator {
    lexicon: BTreeMap<String, String>,
    folded: BTreeMap<String, String>,
    rules: Vec<ReorderRule>,
}

struct Slot {
    source: String,
    surface: String,
    styles: BTreeSet<u32>,
}

fn is_clause_break(s: &str) -> bool {
    matches!(s, "." | "," | ";" | ":" | "!" | "?")
}

impl DictionaryTranslator {
    pub fn new(spec: DictionarySpec) -> Self {
        let folded = spec.lexicon.iter().map(|(k, v)| (k.to_lowercase(), v.clone())).collect();
        Self { lexicon: spec.lexicon, folded, rules: spec.rules }
    }

    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("cannot read dictionary {}: {e}", path.display())))?;
        let spec: DictionarySpec = serde_json::from_str(&text)
            .map_err(|e| BackendError::Config(format!("bad dictionary {}: {e}", path.display())))?;
        Ok(Self::new(spec))
    }

    fn lookup(&self, word: &str) -> Option<&String> {
        self.lexicon.get(word).or_else(|| self.folded.get(&word.to_lowercase()))
    }

    fn apply_rule(rule: &ReorderRule, slots: &mut Vec<Slot>) {
        let n = rule.group.len();
        if n == 0 || n > slots.len() {
            return;
        }
        let matches_at = |at: usize| {
            rule.group.iter().enumerate().all(|(k, w)| slots[at + k].source.to_lowercase() == w.to_lowercase())
        };
        let Some(at) = (0..=slots.len() - n).find(|&at| matches_at(at)) else {
            return;
        };
        let moved: Vec<Slot> = slots.drain(at..at + n).collect();
        let dest = match rule.to {
            RulePosition::ClauseEnd => {
                (at..slots.len()).find(|&k| is_clause_break(&slots[k].surface)).unwrap_or(slots.len())
            }
            RulePosition::ClauseStart => {
                (0..at).rev().find(|&k| is_clause_break(&slots[k].surface)).map_or(0, |k| k + 1)
            }
            RulePosition::Index(p) => p.min(slots.len()),
        };
        slots.splice(dest..dest, moved);
    }
}

impl Translator for DictionaryTranslator {
    fn translate(&self, req: &TranslationRequest) -> Result<String, BackendError> {
        req.validate()?;
        let marked = parse_markers(&req.body, MarkupFormat::NumberedTags);
        let mut token_styles = vec![BTreeSet::new(); marked.tokens.len()];
        for span in &marked.spans {
            if let Some(id) = span.style_id {
                for t in span.tokens.clone() {
                    token_styles[t].insert(id);
                }
            }
        }

        let mut slots = Vec::new();
        let mut missing = Vec::new();
        for (tok, styles) in marked.tokens.iter().zip(token_styles) {
            let surface = &tok.surface;
            let translated = if surface.chars().all(is_punct) {
                surface.clone()
            } else if let Some(t) = self.lookup(surface) {
                t.clone()
            } else {
                if !missing.contains(surface) {
                    missing.push(surface.clone());
                }
                continue;
            };
            for piece in tokenize(&translated) {
                slots.push(Slot { source: surface.clone(), surface: piece.surface, styles: styles.clone() });
            }
        }
        if !missing.is_empty() {
            return Err(BackendError::OutOfVocabulary(missing));
        }
        for rule in &self.rules {
            Self::apply_rule(rule, &mut slots);
        }

        let text = detokenize(&slots.iter().map(|s| s.surface.as_str()).collect::<Vec<_>>());
        if !req.preserve_markup {
            return Ok(text);
        }
        // attributes are irrelevant to numbered-tag rendering; a placeholder keeps the document valid
        let mut spans = Vec::new();
        let ids: BTreeSet<u32> = slots.iter().flat_map(|s| s.styles.iter().copied()).collect();
        for id in ids {
            let mut k = 0;
            while k < slots.len() {
                if slots[k].styles.contains(&id) {
                    let start = k;
                    while k < slots.len() && slots[k].styles.contains(&id) {
                        k += 1;
                    }
                    spans.push(StyleSpan::new(id, [StyleAttr::Bold], start..k));
                } else {
                    k += 1;
                }
            }
        }
        let doc = StyledText::new(text, spans).map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
        render_tagged(&doc, MarkupFormat::NumberedTags).map_err(|e| BackendError::InvalidRequest(e.to_string()))
    }
}
