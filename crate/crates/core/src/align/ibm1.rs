use std::collections::HashMap;

use super::{AlignError, AlignmentMap};

/// Lexical translation table `t(target | source)` estimated by IBM Model 1 EM.
///
/// There is no NULL source word and no distortion model. On a corpus of a
/// few sentences the estimates stay close to co-occurrence counts, which is
/// why this baseline is weak at the sentence counts of a single design.
#[derive(Debug, Clone)]
pub struct Ibm1Model {
    source_vocab: HashMap<String, usize>,
    target_vocab: HashMap<String, usize>,
    /// Per source word: target id → probability, co-occurring targets only.
    table: Vec<HashMap<usize, f64>>,
    iterations: usize,
    log_likelihoods: Vec<f64>,
}

impl Ibm1Model {
    /// `t(target | source)`; zero for unseen words or pairs that never co-occur.
    pub fn prob(&self, target: &str, source: &str) -> f64 {
        let (Some(&s), Some(&t)) = (self.source_vocab.get(source), self.target_vocab.get(target)) else {
            return 0.0;
        };
        self.table[s].get(&t).copied().unwrap_or(0.0)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Corpus log-likelihood at uniform initialization, then after each iteration.
    pub fn log_likelihoods(&self) -> &[f64] {
        &self.log_likelihoods
    }

    /// Largest `|Σ_t t(t|s) − 1|` over source words.
    pub fn max_row_deviation(&self) -> f64 {
        self.table.iter().map(|row| (row.values().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn knows_source(&self, word: &str) -> bool {
        self.source_vocab.contains_key(word)
    }
}

struct Pair {
    source: Vec<usize>,
    target: Vec<usize>,
}

/// Runs EM one iteration at a time so callers can observe each step.
pub struct Ibm1Trainer {
    pairs: Vec<Pair>,
    model: Ibm1Model,
}

impl Ibm1Trainer {
    /// Pairs with an empty side are skipped.
    pub fn new<S: AsRef<str>>(corpus: &[(Vec<S>, Vec<S>)]) -> Result<Self, AlignError> {
        let mut source_vocab = HashMap::new();
        let mut target_vocab = HashMap::new();
        let intern = |vocab: &mut HashMap<String, usize>, w: &str| {
            let next = vocab.len();
            *vocab.entry(w.to_string()).or_insert(next)
        };
        let mut pairs = Vec::new();
        for (src, tgt) in corpus {
            if src.is_empty() || tgt.is_empty() {
                continue;
            }
            pairs.push(Pair {
                source: src.iter().map(|w| intern(&mut source_vocab, w.as_ref())).collect(),
                target: tgt.iter().map(|w| intern(&mut target_vocab, w.as_ref())).collect(),
            });
        }
        if pairs.is_empty() {
            return Err(AlignError::EmptyCorpus);
        }
        let uniform = 1.0 / target_vocab.len() as f64;
        let mut table = vec![HashMap::new(); source_vocab.len()];
        for p in &pairs {
            for &s in &p.source {
                for &t in &p.target {
                    table[s].insert(t, uniform);
                }
            }
        }
        let mut model = Ibm1Model { source_vocab, target_vocab, table, iterations: 0, log_likelihoods: Vec::new() };
        let ll = log_likelihood(&pairs, &model.table);
        model.log_likelihoods.push(ll);
        Ok(Self { pairs, model })
    }

    /// One E-step and M-step.
    pub fn step(&mut self) {
        let table = &self.model.table;
        let mut counts: Vec<HashMap<usize, f64>> = vec![HashMap::new(); table.len()];
        let mut totals = vec![0.0; table.len()];
        for p in &self.pairs {
            for &t in &p.target {
                let z: f64 = p.source.iter().map(|&s| table[s][&t]).sum();
                if z == 0.0 {
                    continue;
                }
                for &s in &p.source {
                    let delta = table[s][&t] / z;
                    *counts[s].entry(t).or_insert(0.0) += delta;
                    totals[s] += delta;
                }
            }
        }
        let mut next = vec![HashMap::new(); table.len()];
        for (s, row) in counts.into_iter().enumerate() {
            for (t, c) in row {
                next[s].insert(t, c / totals[s]);
            }
        }
        self.model.table = next;
        self.model.iterations += 1;
        let ll = log_likelihood(&self.pairs, &self.model.table);
        self.model.log_likelihoods.push(ll);
    }

    pub fn model(&self) -> &Ibm1Model {
        &self.model
    }

    pub fn into_model(self) -> Ibm1Model {
        self.model
    }
}

fn log_likelihood(pairs: &[Pair], table: &[HashMap<usize, f64>]) -> f64 {
    pairs
        .iter()
        .map(|p| {
            let norm = p.source.len() as f64;
            p.target
                .iter()
                .map(|&t| {
                    let sum: f64 = p.source.iter().map(|&s| table[s].get(&t).copied().unwrap_or(0.0)).sum();
                    (sum / norm).ln()
                })
                .sum::<f64>()
        })
        .sum()
}

/// Trains IBM Model 1 from uniform initialization for `iterations` EM steps.
pub fn ibm1_train<S: AsRef<str>>(corpus: &[(Vec<S>, Vec<S>)], iterations: usize) -> Result<Ibm1Model, AlignError> {
    if iterations == 0 {
        return Err(AlignError::NoIterations);
    }
    let mut trainer = Ibm1Trainer::new(corpus)?;
    for _ in 0..iterations {
        trainer.step();
    }
    Ok(trainer.into_model())
}

/// Links each source word to its most probable target word; ties go to the
/// lowest target index and words with no positive probability stay unaligned.
pub fn ibm1_align<S: AsRef<str>>(model: &Ibm1Model, source: &[S], target: &[S]) -> AlignmentMap {
    let mut map = AlignmentMap::new(source.len(), target.len());
    for (j, s) in source.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (i, t) in target.iter().enumerate() {
            let p = model.prob(t.as_ref(), s.as_ref());
            if p > 0.0 && best.is_none_or(|(_, bp)| p > bp) {
                best = Some((i, p));
            }
        }
        if let Some((i, _)) = best {
            // indices come from the slices, so the pair is in range
            let _ = map.insert(j, i);
        }
    }
    map
}
