use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use super::{cosine_similarity, AlignError};

/// Word vectors of one fixed dimension, read from the textual word-vector
/// format: a `count dimension` header, then one `word v1 … vd` line per word.
#[derive(Debug, Clone)]
pub struct EmbeddingLexicon {
    dimension: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
    folded: HashMap<String, usize>,
    casefold_lookup: bool,
    warnings: Vec<String>,
}

impl EmbeddingLexicon {
    /// Builds a lexicon from in-memory entries. Duplicate words keep the first vector.
    pub fn from_entries(
        dimension: usize,
        entries: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self, AlignError> {
        if dimension == 0 {
            return Err(AlignError::LexiconFormat { line: 0, message: "dimension must be positive".into() });
        }
        let mut lex = Self::empty(dimension);
        for (n, (word, v)) in entries.into_iter().enumerate() {
            if v.len() != dimension {
                return Err(AlignError::LexiconDimension { line: n + 1, expected: dimension, got: v.len() });
            }
            lex.push(word, v);
        }
        lex.finish()
    }

    fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            words: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
            folded: HashMap::new(),
            casefold_lookup: true,
            warnings: Vec::new(),
        }
    }

    fn push(&mut self, word: String, v: Vec<f64>) -> bool {
        if self.index.contains_key(&word) {
            return false;
        }
        let id = self.words.len();
        self.folded.entry(word.to_lowercase()).or_insert(id);
        self.index.insert(word.clone(), id);
        self.words.push(word);
        self.vectors.push(v);
        true
    }

    fn finish(self) -> Result<Self, AlignError> {
        if !self.vectors.iter().any(|v| v.iter().any(|x| *x != 0.0)) {
            return Err(AlignError::EmptyLexicon);
        }
        Ok(self)
    }

    /// Exact-case lookups only when `false`. Casefolding is on by default.
    pub fn with_casefold(mut self, on: bool) -> Self {
        self.casefold_lookup = on;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn casefold_lookup(&self) -> bool {
        self.casefold_lookup
    }

    /// Non-fatal findings from loading, such as a header count that
    /// disagrees with the body.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        let id = self
            .index
            .get(word)
            .or_else(|| self.casefold_lookup.then(|| self.folded.get(&word.to_lowercase())).flatten())?;
        Some(&self.vectors[*id])
    }

    /// Cosine similarity of two words, or `None` when either is missing.
    pub fn similarity(&self, a: &str, b: &str) -> Result<Option<f64>, AlignError> {
        match (self.get(a), self.get(b)) {
            (Some(va), Some(vb)) => cosine_similarity(va, vb).map(Some),
            _ => Ok(None),
        }
    }

    /// Serializes back to the word-vector text format, in insertion order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.words.len(), self.dimension);
        for (w, v) in self.words.iter().zip(&self.vectors) {
            out.push_str(w);
            for x in v {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Parses the word-vector text format. A header count that disagrees with
/// the number of body lines is tolerated and recorded as a warning.
pub fn load_lexicon<R: BufRead>(reader: R) -> Result<EmbeddingLexicon, AlignError> {
    let mut lines = reader.lines().enumerate();
    let (count, dimension) = loop {
        let Some((n, line)) = lines.next() else {
            return Err(AlignError::LexiconFormat { line: 1, message: "missing header".into() });
        };
        let line = line.map_err(|e| AlignError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [c, d] => c.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
            _ => None,
        };
        match parsed {
            Some((c, d)) if d > 0 => break (c, d),
            _ => {
                return Err(AlignError::LexiconFormat {
                    line: n + 1,
                    message: format!("expected header `count dimension`, found {line:?}"),
                })
            }
        }
    };

    let mut lex = EmbeddingLexicon::empty(dimension);
    let mut body = 0usize;
    for (n, line) in lines {
        let line = line.map_err(|e| AlignError::Io(e.to_string()))?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if values.len() != dimension {
            return Err(AlignError::LexiconDimension { line: n + 1, expected: dimension, got: values.len() });
        }
        let v = values
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| AlignError::LexiconFormat { line: n + 1, message: "non-numeric component".into() })?;
        body += 1;
        if !lex.push(word.to_string(), v) {
            lex.warnings.push(format!("line {}: duplicate word {word:?} ignored", n + 1));
        }
    }
    if body != count {
        lex.warnings.push(format!("header declares {count} vectors but the body has {body}"));
    }
    lex.finish()
}
