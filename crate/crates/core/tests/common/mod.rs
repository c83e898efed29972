//! Generators and brute-force references shared by the property, oracle and
//! acceptance targets.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use stylemt::align::{AlignmentMatrix, EmbeddingLexicon};
use stylemt::markup::{parse_tagged, render_tagged, tokenize, MarkupFormat, StyleAttr, StyleSpan, StyledText};

pub fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample10")
}

const WORDS: &[&str] = &["Haus", "das", "im", "Februar", "10", "3,000", "don't", "Müller", "ß", "é", "three-day", "x"];
const PUNCT: &[&str] = &["", "", "", ",", ".", "(", ")", "\"", "!", ":", "’"];

fn attrs(id: u32) -> Vec<StyleAttr> {
    match id {
        1 => vec![StyleAttr::Bold],
        2 => vec![StyleAttr::Italic, StyleAttr::Underline],
        _ => vec![StyleAttr::Hyperlink("https://example.org/a?b=1".into())],
    }
}

pub fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec((0..WORDS.len(), 0..PUNCT.len(), 0..PUNCT.len()), 1..12).prop_map(|ws| {
        ws.into_iter()
            .map(|(w, pre, post)| {
                let pre = if PUNCT[pre] == "(" || PUNCT[pre] == "\"" { PUNCT[pre] } else { "" };
                format!("{pre}{}{}", WORDS[w], PUNCT[post])
            })
            .collect()
    })
}

/// Documents with up to `max_styles` styles. `exclusive` keeps every token
/// under at most one style, as the delimiter formats require.
pub fn styled_doc(max_styles: u32, exclusive: bool) -> impl Strategy<Value = StyledText> {
    (words(), prop::collection::vec((1..=max_styles, any::<prop::sample::Index>(), 1usize..4), 0..4)).prop_map(
        move |(ws, raw)| {
            let text = ws.join(" ");
            let n = tokenize(&text).len();
            let mut taken = vec![false; n];
            let mut spans = Vec::new();
            for (id, at, len) in raw {
                let start = at.index(n);
                let end = (start + len).min(n);
                if exclusive && taken[start..end].iter().any(|&t| t) {
                    continue;
                }
                taken[start..end].iter_mut().for_each(|t| *t = true);
                spans.push(StyleSpan::new(id, attrs(id), start..end));
            }
            StyledText::new(text, spans).expect("generated spans are in range")
        },
    )
}

/// Render then parse; the document must come back with the same text and
/// per-style token sets, no anomalies and no marker literals.
pub fn markup_round_trip(d: &StyledText, format: MarkupFormat) -> Result<(), String> {
    let wire = render_tagged(d, format).map_err(|e| e.to_string())?;
    let parsed = parse_tagged(&wire, format, &d.style_table());
    if !parsed.anomalies.is_empty() {
        return Err(format!("{wire:?}: {:?}", parsed.anomalies));
    }
    if parsed.doc.text() != d.text() || !parsed.doc.equivalent(d) {
        return Err(format!("{wire:?} parsed to {:?}", parsed.doc));
    }
    if let Some(lit) = ["<S", "</S", "##start", "##end"].iter().find(|l| parsed.doc.text().contains(*l)) {
        return Err(format!("{lit} left in {:?}", parsed.doc.text()));
    }
    Ok(())
}

pub const VOCAB: &[&str] = &["a", "b", "c", "d", "e", "f"];

/// A random attention problem: words drawn from VOCAB, vectors for the first
/// `known` vocabulary words, positive row-normalized weights.
#[derive(Debug, Clone)]
pub struct AttentionCase {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub vectors: Vec<Vec<f64>>,
    pub known: usize,
    pub styled: BTreeSet<usize>,
    pub threshold: f64,
}

pub fn attention_case() -> impl Strategy<Value = AttentionCase> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(j, i)| {
        (
            prop::collection::vec(prop::sample::select(VOCAB), j),
            prop::collection::vec(prop::sample::select(VOCAB), i),
            prop::collection::vec(prop::collection::vec(1u32..20, i), j),
            prop::collection::vec(prop::collection::vec(-3i32..4, 3), VOCAB.len()),
            0..=VOCAB.len(),
            prop::collection::btree_set(0..j, 0..=j),
            -10i32..=10,
        )
            .prop_map(|(s, t, raw, vecs, known, styled, thr)| AttentionCase {
                source: s.into_iter().map(String::from).collect(),
                target: t.into_iter().map(String::from).collect(),
                weights: raw
                    .into_iter()
                    .map(|row| {
                        let sum: u32 = row.iter().sum();
                        row.into_iter().map(|w| w as f64 / sum as f64).collect()
                    })
                    .collect(),
                vectors: vecs.into_iter().map(|v| v.into_iter().map(f64::from).collect()).collect(),
                known,
                styled,
                threshold: thr as f64 / 10.0,
            })
    })
}

impl AttentionCase {
    pub fn matrix(&self) -> AlignmentMatrix {
        AlignmentMatrix::new(self.source.clone(), self.target.clone(), self.weights.clone()).unwrap()
    }

    /// The known words plus an unused anchor word, since a lexicon without
    /// any non-zero vector is rejected.
    pub fn lexicon(&self) -> EmbeddingLexicon {
        let words = VOCAB.iter().zip(&self.vectors).take(self.known).map(|(w, v)| (w.to_string(), v.clone()));
        EmbeddingLexicon::from_entries(3, words.chain([("anchor".to_string(), vec![1.0, 0.0, 0.0])])).unwrap()
    }

    fn vector(&self, w: &str) -> Option<&[f64]> {
        VOCAB.iter().position(|v| *v == w).filter(|&k| k < self.known).map(|k| self.vectors[k].as_slice())
    }

    /// Enumerates every styled row by hand: rank targets by weight (lower
    /// index first on ties), keep three, filter on similarity. Words without
    /// a usable vector pass.
    pub fn brute_force(&self, k: usize) -> BTreeSet<(usize, usize)> {
        let mut want = BTreeSet::new();
        for &j in &self.styled {
            let row = &self.weights[j];
            let mut order: Vec<usize> = (0..self.target.len()).collect();
            order.sort_by(|&x, &y| row[y].partial_cmp(&row[x]).unwrap().then(x.cmp(&y)));
            for &i in order.iter().take(k) {
                let keep = match (self.vector(&self.source[j]), self.vector(&self.target[i])) {
                    (Some(a), Some(b)) => brute_cos(a, b).is_none_or(|c| c > self.threshold),
                    _ => true,
                };
                if keep {
                    want.insert((j, i));
                }
            }
        }
        want
    }
}

pub fn brute_cos(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    // the true value lies in [-1, 1]; roundoff can overshoot on parallel vectors
    (na > 0.0 && nb > 0.0).then(|| (dot / (na * nb)).clamp(-1.0, 1.0))
}
