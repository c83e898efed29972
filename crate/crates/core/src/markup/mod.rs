//! Styled text and its two wire formats.
//!
//! [`StyledText`] is the document model every method consumes and produces:
//! plain text, its word tokens, and style spans over token ranges. Styles are
//! exchanged with translation services as numbered tags (`<S1>…</S1>`) or as
//! LLM delimiters (`##start##…##end##`); [`parse_tagged`] and [`render_tagged`]
//! convert between the model and those strings.

mod parse;
mod render;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use parse::{parse_markers, parse_tagged, AnomalyKind, MarkedSpan, MarkedText, ParseAnomaly, Parsed};
pub use render::render_tagged;
pub use tokenize::{detokenize, tokenize, Token};

pub(crate) use tokenize::{is_closing_punct, is_punct};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MarkupError {
    #[error("span {index} has an empty or inverted token range {start}..{end}")]
    EmptySpan { index: usize, start: usize, end: usize },
    #[error("span {index} ends at token {end} but the document has {len} tokens")]
    SpanOutOfRange { index: usize, end: usize, len: usize },
    #[error("span {index} has no style attributes")]
    NoAttrs { index: usize },
    #[error("style id {style_id} is used with two different attribute sets")]
    InconsistentStyle { style_id: u32 },
    #[error("style id must be at least 1")]
    ZeroStyleId,
    #[error("invalid style attribute: {0}")]
    InvalidAttr(String),
    #[error("delimiter format cannot express overlapping styles {a} and {b}")]
    Overlap { a: u32, b: u32 },
    #[error("plain delimiter format carries one style but the document has {count}; use numbered delimiters")]
    MultipleStyles { count: usize },
}

/// One typographic attribute. Hyperlinks, colors and fonts carry a payload.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "AttrRepr", into = "AttrRepr")]
pub enum StyleAttr {
    Bold,
    Italic,
    Underline,
    Highlight,
    Hyperlink(String),
    Color(String),
    Font(String),
}

impl StyleAttr {
    pub fn kind(&self) -> &'static str {
        match self {
            StyleAttr::Bold => "bold",
            StyleAttr::Italic => "italic",
            StyleAttr::Underline => "underline",
            StyleAttr::Highlight => "highlight",
            StyleAttr::Hyperlink(_) => "hyperlink",
            StyleAttr::Color(_) => "color",
            StyleAttr::Font(_) => "font",
        }
    }

    pub fn payload(&self) -> Option<&str> {
        match self {
            StyleAttr::Hyperlink(p) | StyleAttr::Color(p) | StyleAttr::Font(p) => Some(p),
            _ => None,
        }
    }

    pub fn from_parts(kind: &str, payload: Option<String>) -> Result<Self, MarkupError> {
        let need = |p: Option<String>| match p {
            Some(p) if !p.is_empty() => Ok(p),
            _ => Err(MarkupError::InvalidAttr(format!("{kind} requires a non-empty payload"))),
        };
        let bare = |attr: StyleAttr, p: &Option<String>| match p {
            None => Ok(attr),
            Some(_) => Err(MarkupError::InvalidAttr(format!("{kind} takes no payload"))),
        };
        match kind {
            "bold" => bare(StyleAttr::Bold, &payload),
            "italic" => bare(StyleAttr::Italic, &payload),
            "underline" => bare(StyleAttr::Underline, &payload),
            "highlight" => bare(StyleAttr::Highlight, &payload),
            "hyperlink" => need(payload).map(StyleAttr::Hyperlink),
            "color" => need(payload).map(StyleAttr::Color),
            "font" => need(payload).map(StyleAttr::Font),
            other => Err(MarkupError::InvalidAttr(format!("unknown kind {other:?}"))),
        }
    }
}

impl fmt::Display for StyleAttr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.payload() {
            Some(p) => write!(f, "{}({p})", self.kind()),
            None => f.write_str(self.kind()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AttrRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payload: Option<String>,
}

impl TryFrom<AttrRepr> for StyleAttr {
    type Error = MarkupError;
    fn try_from(r: AttrRepr) -> Result<Self, Self::Error> {
        StyleAttr::from_parts(&r.kind, r.payload)
    }
}

impl From<StyleAttr> for AttrRepr {
    fn from(a: StyleAttr) -> Self {
        AttrRepr { kind: a.kind().to_string(), payload: a.payload().map(str::to_string) }
    }
}

/// A run of tokens carrying one style. Composite styles (bold + hyperlink)
/// are a single span with several attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleSpan {
    pub style_id: u32,
    pub attrs: BTreeSet<StyleAttr>,
    pub token_range: Range<usize>,
}

impl StyleSpan {
    pub fn new(style_id: u32, attrs: impl IntoIterator<Item = StyleAttr>, token_range: Range<usize>) -> Self {
        Self { style_id, attrs: attrs.into_iter().collect(), token_range }
    }
}

/// Style id to attribute set, as used by one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StyleTable(BTreeMap<u32, BTreeSet<StyleAttr>>);

impl StyleTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, style_id: u32, attrs: impl IntoIterator<Item = StyleAttr>) -> &mut Self {
        self.0.insert(style_id, attrs.into_iter().collect());
        self
    }

    pub fn get(&self, style_id: u32) -> Option<&BTreeSet<StyleAttr>> {
        self.0.get(&style_id)
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The only style, when there is exactly one.
    pub fn sole(&self) -> Option<(u32, &BTreeSet<StyleAttr>)> {
        match self.0.len() {
            1 => self.0.iter().next().map(|(id, a)| (*id, a)),
            _ => None,
        }
    }
}

/// Plain text, its tokens, and the style spans laid over them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StyledTextRepr", into = "StyledTextRepr")]
pub struct StyledText {
    text: String,
    tokens: Vec<Token>,
    spans: Vec<StyleSpan>,
}

impl StyledText {
    /// Text with no styles.
    pub fn plain(text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Self { text, tokens, spans: Vec::new() }
    }

    /// Tokenizes `text` and attaches `spans`, checking every document invariant.
    pub fn new(text: impl Into<String>, spans: Vec<StyleSpan>) -> Result<Self, MarkupError> {
        let mut doc = Self::plain(text);
        doc.set_spans(spans)?;
        Ok(doc)
    }

    pub(crate) fn from_parts_unchecked(text: String, tokens: Vec<Token>, spans: Vec<StyleSpan>) -> Self {
        Self { text, tokens, spans }
    }

    /// Replaces the spans, keeping text and tokens.
    pub fn with_spans(&self, spans: Vec<StyleSpan>) -> Result<Self, MarkupError> {
        let mut doc = Self { text: self.text.clone(), tokens: self.tokens.clone(), spans: Vec::new() };
        doc.set_spans(spans)?;
        Ok(doc)
    }

    fn set_spans(&mut self, spans: Vec<StyleSpan>) -> Result<(), MarkupError> {
        let mut seen: BTreeMap<u32, &BTreeSet<StyleAttr>> = BTreeMap::new();
        for (index, span) in spans.iter().enumerate() {
            let Range { start, end } = span.token_range;
            if span.style_id == 0 {
                return Err(MarkupError::ZeroStyleId);
            }
            if start >= end {
                return Err(MarkupError::EmptySpan { index, start, end });
            }
            if end > self.tokens.len() {
                return Err(MarkupError::SpanOutOfRange { index, end, len: self.tokens.len() });
            }
            if span.attrs.is_empty() {
                return Err(MarkupError::NoAttrs { index });
            }
            match seen.get(&span.style_id) {
                Some(prev) if **prev != span.attrs => {
                    return Err(MarkupError::InconsistentStyle { style_id: span.style_id })
                }
                _ => {
                    seen.insert(span.style_id, &span.attrs);
                }
            }
        }
        self.spans = spans;
        Ok(())
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    pub fn spans(&self) -> &[StyleSpan] {
        &self.spans
    }

    pub fn style_table(&self) -> StyleTable {
        let mut table = StyleTable::new();
        for s in &self.spans {
            table.insert(s.style_id, s.attrs.iter().cloned());
        }
        table
    }

    /// Token indices covered by each style id.
    pub fn style_token_sets(&self) -> BTreeMap<u32, BTreeSet<usize>> {
        let mut sets: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
        for s in &self.spans {
            sets.entry(s.style_id).or_default().extend(s.token_range.clone());
        }
        sets
    }

    /// Every token index carrying at least one style, ascending.
    pub fn styled_token_indices(&self) -> BTreeSet<usize> {
        self.spans.iter().flat_map(|s| s.token_range.clone()).collect()
    }

    /// Style ids per token.
    pub fn token_styles(&self) -> Vec<BTreeSet<u32>> {
        let mut per = vec![BTreeSet::new(); self.tokens.len()];
        for s in &self.spans {
            for t in s.token_range.clone() {
                per[t].insert(s.style_id);
            }
        }
        per
    }

    /// Same text, tokens, and per-style token sets. Span boundaries may differ.
    pub fn equivalent(&self, other: &StyledText) -> bool {
        self.text == other.text
            && self.tokens == other.tokens
            && self.style_token_sets() == other.style_token_sets()
            && self.style_table() == other.style_table()
    }
}

#[derive(Serialize, Deserialize)]
struct SpanRepr {
    style_id: u32,
    attrs: Vec<StyleAttr>,
    token_range: [usize; 2],
}

#[derive(Serialize, Deserialize)]
struct StyledTextRepr {
    text: String,
    #[serde(default)]
    spans: Vec<SpanRepr>,
}

impl TryFrom<StyledTextRepr> for StyledText {
    type Error = MarkupError;
    fn try_from(r: StyledTextRepr) -> Result<Self, Self::Error> {
        let spans = r
            .spans
            .into_iter()
            .map(|s| StyleSpan::new(s.style_id, s.attrs, s.token_range[0]..s.token_range[1]))
            .collect();
        StyledText::new(r.text, spans)
    }
}

impl From<StyledText> for StyledTextRepr {
    fn from(d: StyledText) -> Self {
        StyledTextRepr {
            text: d.text,
            spans: d
                .spans
                .into_iter()
                .map(|s| SpanRepr {
                    style_id: s.style_id,
                    attrs: s.attrs.into_iter().collect(),
                    token_range: [s.token_range.start, s.token_range.end],
                })
                .collect(),
        }
    }
}

/// Which markup flavour a string uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkupFormat {
    /// `<S1>…</S1>`
    NumberedTags,
    /// `##start##…##end##`, a single anonymous style.
    Delimiters,
    /// `##start1##…##end1##`; an extension for several styles in one sentence.
    NumberedDelimiters,
}
