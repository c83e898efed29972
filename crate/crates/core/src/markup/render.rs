use std::collections::BTreeSet;

use super::{MarkupError, MarkupFormat, StyledText};

fn open_marker(format: MarkupFormat, id: u32) -> String {
    match format {
        MarkupFormat::NumberedTags => format!("<S{id}>"),
        MarkupFormat::Delimiters => "##start##".to_string(),
        MarkupFormat::NumberedDelimiters => format!("##start{id}##"),
    }
}

fn close_marker(format: MarkupFormat, id: u32) -> String {
    match format {
        MarkupFormat::NumberedTags => format!("</S{id}>"),
        MarkupFormat::Delimiters => "##end##".to_string(),
        MarkupFormat::NumberedDelimiters => format!("##end{id}##"),
    }
}

fn check_delimiters(doc: &StyledText, format: MarkupFormat) -> Result<(), MarkupError> {
    if format == MarkupFormat::NumberedTags {
        return Ok(());
    }
    for styles in doc.token_styles() {
        let mut it = styles.iter();
        if let (Some(&a), Some(&b)) = (it.next(), it.next()) {
            return Err(MarkupError::Overlap { a, b });
        }
    }
    let count = doc.style_table().len();
    if format == MarkupFormat::Delimiters && count > 1 {
        return Err(MarkupError::MultipleStyles { count });
    }
    Ok(())
}

/// Wraps styled tokens in markup. Markers hug the tokens they enclose
/// (`soared <S1>nearly fivefold</S1> so`) and are always well nested; crossing
/// spans are split so the output parses without anomalies.
///
/// Delimiter formats reject overlapping styles, and the plain delimiter
/// format rejects documents with more than one style id.
pub fn render_tagged(doc: &StyledText, format: MarkupFormat) -> Result<String, MarkupError> {
    check_delimiters(doc, format)?;
    let text = doc.text();
    let tokens = doc.tokens();
    let active = doc.token_styles();
    let run_end =
        |id: u32, from: usize| (from..tokens.len()).find(|&t| !active[t].contains(&id)).unwrap_or(tokens.len());

    let mut out = String::with_capacity(text.len() + 16 * doc.spans().len());
    let mut stack: Vec<u32> = Vec::new();
    let mut cursor = 0;

    for (t, tok) in tokens.iter().enumerate() {
        let want = &active[t];
        if let Some(p) = stack.iter().position(|id| !want.contains(id)) {
            for id in stack.drain(p..).rev() {
                out.push_str(&close_marker(format, id));
            }
        }
        out.push_str(&text[cursor..tok.start]);
        let open: BTreeSet<u32> = stack.iter().copied().collect();
        let mut to_open: Vec<u32> = want.difference(&open).copied().collect();
        to_open.sort_by_key(|&id| (std::cmp::Reverse(run_end(id, t)), id));
        for id in to_open {
            out.push_str(&open_marker(format, id));
            stack.push(id);
        }
        out.push_str(&tok.surface);
        cursor = tok.end;
    }
    for id in stack.drain(..).rev() {
        out.push_str(&close_marker(format, id));
    }
    out.push_str(&text[cursor..]);
    Ok(out)
}
