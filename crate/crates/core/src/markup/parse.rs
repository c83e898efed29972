use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{is_closing_punct, tokenize, MarkupFormat, StyleSpan, StyleTable, StyledText, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    UnclosedTag,
    OrphanClose,
    UnknownStyleId,
    EmptySpan,
    /// Balanced but crossing markup such as `<S1>a<S2>b</S1>c</S2>`.
    Misnested,
}

/// A markup defect found while parsing an untrusted response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseAnomaly {
    pub kind: AnomalyKind,
    /// Byte offset of the offending marker in the raw input.
    pub location: usize,
    pub detail: String,
}

/// A marker-delimited region before style ids are resolved to attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSpan {
    /// `None` for plain `##start##` delimiters.
    pub style_id: Option<u32>,
    pub tokens: Range<usize>,
    pub open_offset: usize,
}

/// Markup-free text plus the regions the markers delimited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedText {
    pub text: String,
    pub tokens: Vec<Token>,
    pub spans: Vec<MarkedSpan>,
    pub anomalies: Vec<ParseAnomaly>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub doc: StyledText,
    pub anomalies: Vec<ParseAnomaly>,
}

#[derive(Debug, Clone, Copy)]
struct Marker {
    open: bool,
    id: Option<u32>,
    raw_offset: usize,
}

enum Seg<'a> {
    Text(&'a str),
    Marker(Marker),
}

fn digits(s: &str) -> (Option<u32>, usize) {
    let n = s.bytes().take_while(u8::is_ascii_digit).count();
    (s[..n].parse().ok(), n)
}

/// Recognizes a marker at the start of `rest`, returning it and its byte length.
fn marker_at(rest: &str, format: MarkupFormat) -> Option<(bool, Option<u32>, usize)> {
    match format {
        MarkupFormat::NumberedTags => {
            let (open, body) =
                if let Some(b) = rest.strip_prefix("</S") { (false, b) } else { (true, rest.strip_prefix("<S")?) };
            let (id, n) = digits(body);
            let id = id?;
            body[n..].starts_with('>').then(|| (open, Some(id), rest.len() - body.len() + n + 1))
        }
        MarkupFormat::Delimiters | MarkupFormat::NumberedDelimiters => {
            if let Some(b) = rest.strip_prefix("##start##") {
                return Some((true, None, rest.len() - b.len()));
            }
            if let Some(b) = rest.strip_prefix("##end##") {
                return Some((false, None, rest.len() - b.len()));
            }
            if format == MarkupFormat::Delimiters {
                return None;
            }
            let (open, body) = if let Some(b) = rest.strip_prefix("##start") {
                (true, b)
            } else {
                (false, rest.strip_prefix("##end")?)
            };
            let (id, n) = digits(body);
            let id = id?;
            body[n..].starts_with("##").then(|| (open, Some(id), rest.len() - body.len() + n + 2))
        }
    }
}

fn segment(input: &str, format: MarkupFormat) -> Vec<Seg<'_>> {
    let trigger = match format {
        MarkupFormat::NumberedTags => '<',
        _ => '#',
    };
    let mut segs = Vec::new();
    let mut text_start = 0;
    let mut i = 0;
    while i < input.len() {
        let rest = &input[i..];
        if rest.starts_with(trigger) {
            if let Some((open, id, len)) = marker_at(rest, format) {
                if text_start < i {
                    segs.push(Seg::Text(&input[text_start..i]));
                }
                segs.push(Seg::Marker(Marker { open, id, raw_offset: i }));
                i += len;
                text_start = i;
                continue;
            }
        }
        i += rest.chars().next().map_or(1, char::len_utf8);
    }
    if text_start < input.len() {
        segs.push(Seg::Text(&input[text_start..]));
    }
    segs
}

/// Strips markers and tidies whitespace the markers left behind.
///
/// A marker group with whitespace on both sides keeps only the left
/// whitespace; a closing group followed by closing punctuation or the end of
/// input drops the whitespace before it. `Stellen ##start## im` becomes
/// `Stellen im` and `fiel ##end##.` becomes `fiel.`.
fn strip_markers(segs: Vec<Seg<'_>>) -> (String, Vec<(Marker, usize)>) {
    let mut out = String::new();
    let mut markers: Vec<(Marker, usize)> = Vec::new();
    let mut group_closes = false;
    let mut in_group = false;

    let trim_trailing = |out: &mut String, markers: &mut Vec<(Marker, usize)>| {
        let new_len = out.trim_end().len();
        out.truncate(new_len);
        for (_, pos) in markers.iter_mut() {
            *pos = (*pos).min(new_len);
        }
    };

    for seg in segs {
        match seg {
            Seg::Marker(m) => {
                markers.push((m, out.len()));
                in_group = true;
                group_closes = !m.open;
            }
            Seg::Text(mut t) => {
                if in_group {
                    let prev_ws = out.chars().last().is_none_or(char::is_whitespace);
                    let next = t.chars().next();
                    if prev_ws && next.is_some_and(char::is_whitespace) {
                        t = t.trim_start();
                    } else if prev_ws && group_closes && !out.is_empty() && next.is_some_and(is_closing_punct) {
                        trim_trailing(&mut out, &mut markers);
                    }
                    in_group = false;
                }
                out.push_str(t);
            }
        }
    }
    if in_group && group_closes && out.chars().last().is_some_and(char::is_whitespace) {
        trim_trailing(&mut out, &mut markers);
    }
    (out, markers)
}

fn tokens_in(tokens: &[Token], from: usize, to: usize) -> Range<usize> {
    let start = tokens.iter().position(|t| t.end > from).unwrap_or(tokens.len());
    let end = tokens.iter().rposition(|t| t.start < to).map_or(0, |p| p + 1);
    if start < end {
        start..end
    } else {
        start..start
    }
}

fn marker_name(format: MarkupFormat, open: bool, id: Option<u32>) -> String {
    match (format, id) {
        (MarkupFormat::NumberedTags, Some(id)) if open => format!("<S{id}>"),
        (MarkupFormat::NumberedTags, Some(id)) => format!("</S{id}>"),
        (_, Some(id)) if open => format!("##start{id}##"),
        (_, Some(id)) => format!("##end{id}##"),
        (_, None) if open => "##start##".to_string(),
        (_, None) => "##end##".to_string(),
    }
}

/// Parses markup into text, tokens, and marked regions without resolving
/// style ids. Never fails; defects become anomalies and recovery applies:
/// an unclosed marker extends to the end of the text, an orphan close is
/// ignored.
pub fn parse_markers(input: &str, format: MarkupFormat) -> MarkedText {
    let (text, markers) = strip_markers(segment(input, format));
    let tokens = tokenize(&text);
    let mut anomalies = Vec::new();
    let mut regions: Vec<(Marker, usize, usize)> = Vec::new();
    let mut stack: Vec<(Marker, usize)> = Vec::new();

    for (m, pos) in markers {
        if m.open {
            if m.id.is_none() {
                // plain delimiters cannot nest; a second start closes the first
                if let Some((prev, prev_pos)) = stack.pop() {
                    anomalies.push(ParseAnomaly {
                        kind: AnomalyKind::UnclosedTag,
                        location: prev.raw_offset,
                        detail: "##start## reopened before ##end##".to_string(),
                    });
                    regions.push((prev, prev_pos, pos));
                }
            }
            stack.push((m, pos));
            continue;
        }
        match stack.iter().rposition(|(o, _)| o.id == m.id) {
            None => anomalies.push(ParseAnomaly {
                kind: AnomalyKind::OrphanClose,
                location: m.raw_offset,
                detail: format!("{} without a matching open", marker_name(format, false, m.id)),
            }),
            Some(idx) => {
                if idx + 1 != stack.len() {
                    anomalies.push(ParseAnomaly {
                        kind: AnomalyKind::Misnested,
                        location: m.raw_offset,
                        detail: format!("{} closes across an inner open marker", marker_name(format, false, m.id)),
                    });
                }
                let (o, open_pos) = stack.remove(idx);
                regions.push((o, open_pos, pos));
            }
        }
    }
    for (o, open_pos) in stack {
        anomalies.push(ParseAnomaly {
            kind: AnomalyKind::UnclosedTag,
            location: o.raw_offset,
            detail: format!("{} never closed; extended to end of text", marker_name(format, true, o.id)),
        });
        regions.push((o, open_pos, text.len()));
    }

    regions.sort_by_key(|(o, _, _)| o.raw_offset);
    let mut spans = Vec::new();
    for (o, from, to) in regions {
        let range = tokens_in(&tokens, from, to);
        if range.is_empty() {
            anomalies.push(ParseAnomaly {
                kind: AnomalyKind::EmptySpan,
                location: o.raw_offset,
                detail: format!("{} encloses no words", marker_name(format, true, o.id)),
            });
            continue;
        }
        spans.push(MarkedSpan { style_id: o.id, tokens: range, open_offset: o.raw_offset });
    }
    anomalies.sort_by_key(|a| a.location);
    MarkedText { text, tokens, spans, anomalies }
}

/// Parses a tagged or delimited string into a [`StyledText`], taking style
/// attributes from `styles`.
///
/// Plain `##start##` regions take the table's only style; with zero or
/// several styles in the table they are reported as unknown. Ids missing
/// from the table are reported and dropped.
pub fn parse_tagged(input: &str, format: MarkupFormat, styles: &StyleTable) -> Parsed {
    let MarkedText { text, tokens, spans: marked, mut anomalies } = parse_markers(input, format);
    let mut spans = Vec::new();
    for m in marked {
        let resolved = match m.style_id {
            Some(id) => styles.get(id).map(|a| (id, a)),
            None => styles.sole(),
        };
        match resolved {
            Some((id, attrs)) => spans.push(StyleSpan::new(id, attrs.iter().cloned(), m.tokens)),
            None => anomalies.push(ParseAnomaly {
                kind: AnomalyKind::UnknownStyleId,
                location: m.open_offset,
                detail: match m.style_id {
                    Some(id) => format!("style id {id} is not in the source style table"),
                    None => format!("anonymous delimiter with {} candidate styles", styles.len()),
                },
            }),
        }
    }
    anomalies.sort_by_key(|a| a.location);
    let ids: BTreeSet<u32> = spans.iter().map(|s| s.style_id).collect();
    debug_assert!(ids.iter().all(|id| styles.get(*id).is_some()));
    Parsed { doc: StyledText::from_parts_unchecked(text, tokens, spans), anomalies }
}
