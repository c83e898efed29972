use super::{OccurrenceTiebreak, PipelineError};
use crate::markup::is_punct;

/// Renders the unigram set as `{'fell', 'below'}`; words containing an
/// apostrophe are double-quoted.
pub fn render_unigrams<S: AsRef<str>>(words: &[S]) -> String {
    let items: Vec<String> = words
        .iter()
        .map(|w| {
            let w = w.as_ref();
            if w.contains('\'') {
                format!("\"{w}\"")
            } else {
                format!("'{w}'")
            }
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

fn closers(open: char) -> Option<&'static [char]> {
    Some(match open {
        '\'' => &['\'', '’'],
        '"' => &['"', '”'],
        '`' => &['\'', '’', '`'],
        '‘' => &['’', '\''],
        '“' => &['”', '"'],
        _ => return None,
    })
}

fn find_maps_label(response: &str) -> Option<usize> {
    let lower = response.to_ascii_lowercase();
    let mut from = 0;
    while let Some(pos) = lower[from..].find("maps") {
        let after = from + pos + 4;
        let rest = &response[after..];
        let trimmed = rest.trim_start_matches([' ', '\t']);
        if let Some(tail) = trimmed.strip_prefix(':') {
            return Some(response.len() - tail.len());
        }
        from = after;
    }
    None
}

/// Extracts the word list following `maps:` in a hybrid response.
///
/// Accepts brace or bracket lists and bare comma lists, with single, double,
/// backtick or typographic quotes. A quote only closes an item when it is
/// followed by a separator, so `'committee's'` survives.
pub fn parse_maps(response: &str) -> Result<Vec<String>, PipelineError> {
    let start = find_maps_label(response).ok_or_else(|| PipelineError::MapParse(response.to_string()))?;
    let rest = response[start..].trim_start();
    let (body, terminator) = match rest.chars().next() {
        Some('{') => (&rest[1..], Some('}')),
        Some('[') => (&rest[1..], Some(']')),
        _ => (rest.lines().next().unwrap_or(""), None),
    };
    let chars: Vec<char> = body.chars().collect();
    let is_sep = |c: char| c == ',' || Some(c) == terminator;
    let next_solid = |mut k: usize| {
        while k < chars.len() && chars[k].is_whitespace() {
            k += 1;
        }
        k
    };

    let mut items = Vec::new();
    let mut k = 0;
    loop {
        k = next_solid(k);
        if k >= chars.len() || Some(chars[k]) == terminator {
            break;
        }
        if let Some(close) = closers(chars[k]) {
            let begin = k + 1;
            let mut end = None;
            let mut m = begin;
            while m < chars.len() {
                if close.contains(&chars[m]) {
                    let n = next_solid(m + 1);
                    if n >= chars.len() || is_sep(chars[n]) {
                        end = Some((m, n));
                        break;
                    }
                }
                m += 1;
            }
            match end {
                Some((m, n)) => {
                    items.push(chars[begin..m].iter().collect::<String>());
                    k = n;
                }
                None => {
                    // unterminated quote: the rest up to a separator is the item
                    let stop = (begin..chars.len()).find(|&m| is_sep(chars[m])).unwrap_or(chars.len());
                    items.push(chars[begin..stop].iter().collect::<String>().trim().to_string());
                    k = stop;
                }
            }
        } else {
            let stop = (k..chars.len()).find(|&m| is_sep(chars[m])).unwrap_or(chars.len());
            let item: String = chars[k..stop].iter().collect();
            if !item.trim().is_empty() {
                items.push(item.trim().to_string());
            }
            k = stop;
        }
        if k < chars.len() && chars[k] == ',' {
            k += 1;
        }
    }
    Ok(items)
}

fn normalize(word: &str) -> String {
    let trimmed = word.trim_matches(is_punct);
    if trimmed.is_empty() { word } else { trimmed }.to_lowercase()
}

fn relative(index: usize, len: usize) -> f64 {
    if len <= 1 {
        0.0
    } else {
        index as f64 / (len - 1) as f64
    }
}

/// Finds `word` among `target` tokens: exact surface first, then casefolded
/// with surrounding punctuation stripped. Among several occurrences the
/// tiebreak decides; `source_index` of `source_len` gives the relative
/// position the `RelativePosition` rule compares against (ties go left).
pub fn locate_word<S: AsRef<str>>(
    word: &str,
    target: &[S],
    source_index: usize,
    source_len: usize,
    tiebreak: OccurrenceTiebreak,
) -> Option<usize> {
    let mut hits: Vec<usize> = (0..target.len()).filter(|&i| target[i].as_ref() == word).collect();
    if hits.is_empty() {
        let want = normalize(word);
        hits = (0..target.len()).filter(|&i| normalize(target[i].as_ref()) == want).collect();
    }
    match tiebreak {
        OccurrenceTiebreak::FirstOccurrence => hits.first().copied(),
        OccurrenceTiebreak::LastOccurrence => hits.last().copied(),
        OccurrenceTiebreak::RelativePosition => {
            let at = relative(source_index, source_len);
            let mut best: Option<(usize, f64)> = None;
            for i in hits {
                let d = (relative(i, target.len()) - at).abs();
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            best.map(|(i, _)| i)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unigram_rendering() {
        assert_eq!(render_unigrams(&["fell", "below", "10"]), "{'fell', 'below', '10'}");
        assert_eq!(render_unigrams(&["the", "committee's"]), "{'the', \"committee's\"}");
        assert_eq!(render_unigrams::<&str>(&[]), "{}");
    }

    #[test]
    fn parses_response_shapes() {
        let want = words(&["fiel", "unter", "10", "Millionen", "im", "Februar"]);
        for resp in [
            "maps: {'fiel', 'unter', '10', 'Millionen', 'im', 'Februar'}",
            "maps: {`fiel', `unter', `10', `Millionen', `im', `Februar'}",
            "Maps: [\"fiel\", \"unter\", \"10\", \"Millionen\", \"im\", \"Februar\"]",
            "Sure! Here you go.\nmaps: fiel, unter, 10, Millionen, im, Februar\nThanks",
            "maps : {‘fiel’, ‘unter’, ‘10’, ‘Millionen’, ‘im’, ‘Februar’}",
        ] {
            assert_eq!(parse_maps(resp).unwrap(), want, "{resp}");
        }
    }

    #[test]
    fn apostrophes_inside_quotes() {
        assert_eq!(parse_maps("maps: {'des', 'Ausschusses', 'it's'}").unwrap(), words(&["des", "Ausschusses", "it's"]));
        assert_eq!(parse_maps("maps: {\"Ausschuss'\"}").unwrap(), words(&["Ausschuss'"]));
    }

    #[test]
    fn missing_label_is_an_error() {
        assert!(matches!(parse_maps("{'fiel'}"), Err(PipelineError::MapParse(_))));
        assert!(matches!(parse_maps(""), Err(PipelineError::MapParse(_))));
        assert_eq!(parse_maps("maps: {}").unwrap(), Vec::<String>::new());
        assert_eq!(parse_maps("bitmaps are fun. maps: {'a'}").unwrap(), words(&["a"]));
    }

    #[test]
    fn unterminated_quote_and_list() {
        assert_eq!(parse_maps("maps: {'fiel', 'unter").unwrap(), words(&["fiel", "unter"]));
    }

    #[test]
    fn locate_prefers_exact_then_folded() {
        let target = ["Im", "Februar", "fiel", "im", "Jahr."];
        assert_eq!(locate_word("im", &target, 0, 1, OccurrenceTiebreak::FirstOccurrence), Some(3));
        assert_eq!(locate_word("jahr", &target, 0, 1, OccurrenceTiebreak::FirstOccurrence), Some(4));
        assert_eq!(locate_word("Zug", &target, 0, 1, OccurrenceTiebreak::FirstOccurrence), None);
    }

    #[test]
    fn repeated_word_tiebreaks() {
        // "10" at target 1 (rel 0.25) and 3 (rel 0.75); source word at 2 of 6 (rel 0.4)
        let target = ["a", "10", "b", "10", "c"];
        assert_eq!(locate_word("10", &target, 2, 6, OccurrenceTiebreak::RelativePosition), Some(1));
        assert_eq!(locate_word("10", &target, 2, 6, OccurrenceTiebreak::LastOccurrence), Some(3));
        assert_eq!(locate_word("10", &target, 2, 6, OccurrenceTiebreak::FirstOccurrence), Some(1));
        // rel 0.8 is nearer the second
        assert_eq!(locate_word("10", &target, 4, 6, OccurrenceTiebreak::RelativePosition), Some(3));
        // exactly halfway goes left
        assert_eq!(locate_word("10", &target, 1, 3, OccurrenceTiebreak::RelativePosition), Some(1));
    }
}
