use std::collections::BTreeSet;

use super::{PipelineError, ProjectionPolicy, UnalignedStyledWord, Warning};
use crate::align::AlignmentMap;
use crate::markup::{StyleSpan, StyleTable, StyledText};

fn runs(indices: &BTreeSet<usize>) -> Vec<std::ops::Range<usize>> {
    let mut out: Vec<std::ops::Range<usize>> = Vec::new();
    for &i in indices {
        match out.last_mut() {
            Some(r) if r.end == i => r.end = i + 1,
            _ => out.push(i..i + 1),
        }
    }
    out
}

/// Carries the source styles onto `target` through `map`.
///
/// Target token `i` receives style `s` when some source token with style `s`
/// is aligned to it. Styled target tokens are grouped into maximal runs, so
/// one source span can land as several target spans. Any spans already on
/// `target` are ignored.
pub fn project_styles(
    source: &StyledText,
    target: &StyledText,
    map: &AlignmentMap,
    policy: &ProjectionPolicy,
) -> Result<(StyledText, Vec<Warning>), PipelineError> {
    if map.source_len() != source.tokens().len() || map.target_len() != target.tokens().len() {
        return Err(PipelineError::DimensionMismatch {
            map_source: map.source_len(),
            map_target: map.target_len(),
            source_len: source.tokens().len(),
            target_len: target.tokens().len(),
        });
    }
    let table: StyleTable = source.style_table();
    let mut spans = Vec::new();
    let mut emit = |style_id: u32, image: BTreeSet<usize>| {
        // the id came from the source's own table
        let attrs = table.get(style_id).cloned().unwrap_or_default();
        for r in runs(&image) {
            spans.push(StyleSpan::new(style_id, attrs.iter().cloned(), r));
        }
    };
    if policy.merge_adjacent {
        for (style_id, tokens) in source.style_token_sets() {
            emit(style_id, map.image(&tokens));
        }
    } else {
        for span in source.spans() {
            emit(span.style_id, map.image(&span.token_range.clone().collect()));
        }
    }
    spans.sort_by_key(|s| (s.token_range.start, s.token_range.end, s.style_id));

    let mut warnings = Vec::new();
    if policy.unaligned_styled_word == UnalignedStyledWord::WarnDrop {
        for j in source.styled_token_indices() {
            if map.targets_of(j).next().is_none() {
                warnings
                    .push(Warning::UnalignedStyledWord { source_index: j, word: source.tokens()[j].surface.clone() });
            }
        }
    }
    Ok((target.with_spans(spans)?, warnings))
}
