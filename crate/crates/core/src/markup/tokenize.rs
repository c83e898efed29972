/// A word-level token with byte offsets into the text it was cut from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, start: usize, end: usize) -> Self {
        Self { surface: surface.into(), start, end }
    }
}

/// Punctuation here means any character that is neither alphanumeric nor whitespace.
pub(crate) fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Splits `text` on Unicode whitespace and detaches leading and trailing
/// punctuation as one token per character. Word-internal punctuation
/// (`committee's`, `three-day`, `10,000`) stays inside the word.
///
/// Offsets are byte offsets, so `&text[t.start..t.end] == t.surface` for every token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = word_start.take() {
                split_word(text, s, i, &mut tokens);
            }
        } else if word_start.is_none() {
            word_start = Some(i);
        }
    }
    if let Some(s) = word_start {
        split_word(text, s, text.len(), &mut tokens);
    }
    tokens
}

fn split_word(text: &str, start: usize, end: usize, out: &mut Vec<Token>) {
    let word = &text[start..end];
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let push_char = |out: &mut Vec<Token>, (off, c): (usize, char)| {
        let s = start + off;
        out.push(Token::new(c.to_string(), s, s + c.len_utf8()));
    };

    let Some(first) = chars.iter().position(|&(_, c)| !is_punct(c)) else {
        for &pc in &chars {
            push_char(out, pc);
        }
        return;
    };
    // at least one non-punctuation char exists, so rposition succeeds
    let last = chars.iter().rposition(|&(_, c)| !is_punct(c)).unwrap_or(first);

    for &pc in &chars[..first] {
        push_char(out, pc);
    }
    let core_start = start + chars[first].0;
    let core_end = start + chars[last].0 + chars[last].1.len_utf8();
    out.push(Token::new(&text[core_start..core_end], core_start, core_end));
    for &pc in &chars[last + 1..] {
        push_char(out, pc);
    }
}

/// Joins tokens back into running text: a single space between tokens, none
/// before closing punctuation or after opening brackets.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut prev: Option<&str> = None;
    for tok in tokens {
        let tok = tok.as_ref();
        if let Some(p) = prev {
            let glue_left = tok.chars().count() == 1 && tok.chars().all(is_closing_punct);
            let glue_right = p.chars().count() == 1 && p.chars().all(is_opening_punct);
            if !glue_left && !glue_right {
                out.push(' ');
            }
        }
        out.push_str(tok);
        prev = Some(tok);
    }
    out
}

pub(crate) fn is_closing_punct(c: char) -> bool {
    matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | ')' | ']' | '}' | '…' | '»' | '“')
}

fn is_opening_punct(c: char) -> bool {
    matches!(c, '(' | '[' | '{' | '„' | '«')
}
