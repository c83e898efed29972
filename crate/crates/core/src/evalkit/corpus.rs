use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EvalError, GoldRecord};
use crate::align::{AlignmentMap, AlignmentMatrix, AttentionParams, EmbeddingLexicon};
use crate::backends::{BackendConfig, BackendKind, ReplayRecord, ReplayRequest};
use crate::markup::{parse_tagged, MarkupFormat, StyleAttr, StyleTable, StyledText};
use crate::pipelines::{
    hybrid_map_request, hybrid_translation_request, llm_delimiters_request, nmt_tags_request, AttentionInputs, Job,
    JobDocument, MethodKind, MethodOptions,
};

/// One hand-written corpus sentence with gold styling and canned backend
/// responses. Markup uses numbered tags; `styles` gives each tag's attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub source: String,
    pub styles: BTreeMap<u32, Vec<StyleAttr>>,
    /// Styled reference translation, used by the attention and hybrid methods.
    pub gold: String,
    /// Styled gold for other translations of the same sentence.
    #[serde(default)]
    pub alternates: Vec<String>,
    /// Styled source word and the `gold` word it aligns to.
    pub alignment: Vec<(String, String)>,
    pub nmt_tags: String,
    pub llm_delimiters: String,
    /// Plain NMT output fed to the hybrid method; defaults to the `gold` text.
    #[serde(default)]
    pub nmt_plain: Option<String>,
    pub hybrid_maps: String,
    #[serde(default)]
    pub notes: String,
}

/// Everything the offline runs need, derived from a corpus.
#[derive(Debug, Clone)]
pub struct SealedFixtures {
    pub gold: Vec<GoldRecord>,
    pub replay_nmt: Vec<ReplayRecord>,
    pub replay_llm: Vec<ReplayRecord>,
    pub matrices: Vec<AlignmentMatrix>,
    pub lexicon: EmbeddingLexicon,
    pub jobs: Vec<(MethodKind, Job)>,
    pub backends: Vec<BackendConfig>,
}

fn bad(id: &str, message: impl Into<String>) -> EvalError {
    EvalError::BadGold { id: id.to_string(), message: message.into() }
}

fn parse_strict(id: &str, what: &str, text: &str, table: &StyleTable) -> Result<StyledText, EvalError> {
    let parsed = parse_tagged(text, MarkupFormat::NumberedTags, table);
    if let Some(a) = parsed.anomalies.first() {
        return Err(bad(id, format!("{what}: {:?} at byte {}", a.kind, a.location)));
    }
    Ok(parsed.doc)
}

/// Resolves word pairs to token indices. Each word is the first styled
/// occurrence not claimed by an earlier pair, or the first styled occurrence
/// when all are claimed.
fn resolve_alignment(
    id: &str,
    source: &StyledText,
    gold: &StyledText,
    pairs: &[(String, String)],
) -> Result<AlignmentMap, EvalError> {
    let styled_src = source.styled_token_indices();
    let styled_tgt = gold.styled_token_indices();
    let pick = |doc: &StyledText, styled: &BTreeSet<usize>, used: &BTreeSet<usize>, word: &str| {
        let hits: Vec<usize> = styled.iter().copied().filter(|&k| doc.tokens()[k].surface == word).collect();
        hits.iter().copied().find(|k| !used.contains(k)).or(hits.first().copied())
    };
    let (mut used_src, mut used_tgt) = (BTreeSet::new(), BTreeSet::new());
    let mut map = AlignmentMap::new(source.tokens().len(), gold.tokens().len());
    for (sw, tw) in pairs {
        let j = pick(source, &styled_src, &used_src, sw)
            .ok_or_else(|| bad(id, format!("alignment word {sw:?} is not a styled source word")))?;
        let i = pick(gold, &styled_tgt, &used_tgt, tw)
            .ok_or_else(|| bad(id, format!("alignment word {tw:?} is not a styled gold word")))?;
        used_src.insert(j);
        used_tgt.insert(i);
        map.insert(j, i).map_err(|e| bad(id, e.to_string()))?;
    }
    let image = map.image(&styled_src);
    if image != styled_tgt {
        return Err(bad(id, format!("aligned image {image:?} differs from gold styling {styled_tgt:?}")));
    }
    Ok(map)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// One-hot vectors per connected component of aligned word pairs
/// (lowercased). Words never aligned get a component of their own.
fn build_lexicon(words: &BTreeSet<String>, links: &[(String, String)]) -> Result<EmbeddingLexicon, EvalError> {
    let index: BTreeMap<&str, usize> = words.iter().enumerate().map(|(k, w)| (w.as_str(), k)).collect();
    let mut parent: Vec<usize> = (0..words.len()).collect();
    for (a, b) in links {
        if let (Some(&x), Some(&y)) = (index.get(a.as_str()), index.get(b.as_str())) {
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            parent[rx.max(ry)] = rx.min(ry);
        }
    }
    let mut component = BTreeMap::new();
    let roots: Vec<usize> = (0..words.len()).map(|k| find(&mut parent, k)).collect();
    for &r in &roots {
        let next = component.len();
        component.entry(r).or_insert(next);
    }
    let dim = component.len().max(1);
    let entries = words.iter().zip(&roots).map(|(w, r)| {
        let mut v = vec![0.0; dim];
        v[component[r]] = 1.0;
        (w.clone(), v)
    });
    EmbeddingLexicon::from_entries(dim, entries).map_err(|e| bad("lexicon", e.to_string()))
}

/// Derives gold records, replay fixtures, gold one-hot matrices, a lexicon,
/// backend configs and one job per method from the corpus.
pub fn seal_corpus(entries: &[CorpusEntry], opts: &MethodOptions) -> Result<SealedFixtures, EvalError> {
    let mut gold = Vec::new();
    let mut replay_nmt = Vec::new();
    let mut replay_llm = Vec::new();
    let mut matrices = Vec::new();
    let mut words = BTreeSet::new();
    let mut links = Vec::new();
    let mut documents = Vec::new();
    let mut ids = BTreeSet::new();

    for e in entries {
        let id = e.id.as_str();
        if !ids.insert(id) {
            return Err(bad(id, "duplicate id"));
        }
        let mut table = StyleTable::new();
        for (&sid, attrs) in &e.styles {
            table.insert(sid, attrs.iter().cloned());
        }
        let source = parse_strict(id, "source", &e.source, &table)?;
        let gold_target = parse_strict(id, "gold", &e.gold, &table)?;
        let alternates =
            e.alternates.iter().map(|a| parse_strict(id, "alternate", a, &table)).collect::<Result<Vec<_>, _>>()?;
        let gold_map = resolve_alignment(id, &source, &gold_target, &e.alignment)?;

        let src_tokens: Vec<String> = source.surfaces().iter().map(|s| s.to_string()).collect();
        let tgt_tokens: Vec<String> = gold_target.surfaces().iter().map(|s| s.to_string()).collect();
        matrices.push(
            AlignmentMatrix::from_alignment(src_tokens.clone(), tgt_tokens.clone(), &gold_map)
                .map_err(|err| bad(id, err.to_string()))?,
        );
        for doc in std::iter::once(&source).chain(std::iter::once(&gold_target)).chain(&alternates) {
            words.extend(doc.surfaces().iter().map(|s| s.to_lowercase()));
        }
        links.extend(
            gold_map.pairs().iter().map(|&(j, i)| (src_tokens[j].to_lowercase(), tgt_tokens[i].to_lowercase())),
        );

        let plain = e.nmt_plain.clone().unwrap_or_else(|| gold_target.text().to_string());
        let pipeline = |err: crate::pipelines::PipelineError| bad(id, err.to_string());
        replay_nmt.push(ReplayRecord::new(
            ReplayRequest::Translate(nmt_tags_request(&source, &opts.langs).map_err(pipeline)?),
            e.nmt_tags.clone(),
        ));
        replay_nmt.push(ReplayRecord::new(
            ReplayRequest::Translate(hybrid_translation_request(&source, &opts.langs).map_err(pipeline)?),
            plain.clone(),
        ));
        let (llm_req, _) = llm_delimiters_request(&source, opts).map_err(pipeline)?;
        replay_llm.push(ReplayRecord::new(ReplayRequest::Complete(llm_req), e.llm_delimiters.clone()));
        let target_text = StyledText::plain(plain.trim());
        replay_llm.push(ReplayRecord::new(
            ReplayRequest::Complete(hybrid_map_request(&source, target_text.text(), opts).map_err(pipeline)?),
            e.hybrid_maps.clone(),
        ));

        documents.push(JobDocument { id: Some(e.id.clone()), doc: source.clone() });
        let record = GoldRecord {
            id: e.id.clone(),
            source,
            gold_target,
            alternates,
            gold_map: Some(gold_map),
            notes: e.notes.clone(),
        };
        record.validate()?;
        gold.push(record);
    }

    let lexicon = build_lexicon(&words, &links)?;
    let job = |method: MethodKind| Job {
        method,
        policy: opts.policy,
        langs: opts.langs.clone(),
        max_output_tokens: opts.max_output_tokens,
        translator: matches!(method, MethodKind::NmtTags | MethodKind::Hybrid).then(|| "nmt".to_string()),
        completer: matches!(method, MethodKind::LlmDelimiters | MethodKind::Hybrid).then(|| "llm".to_string()),
        attention: (method == MethodKind::Attention).then(|| AttentionInputs {
            matrices: PathBuf::from("matrices.json"),
            lexicon: PathBuf::from("lexicon.vec"),
            params: AttentionParams::default(),
        }),
        prompts_dir: None,
        documents: documents.clone(),
    };
    let jobs = MethodKind::ALL.iter().map(|&m| (m, job(m))).collect();
    let backends = vec![
        BackendConfig::new("nmt", BackendKind::MockReplay, "replay_nmt.json"),
        BackendConfig::new("llm", BackendKind::MockReplay, "replay_llm.json"),
    ];
    Ok(SealedFixtures { gold, replay_nmt, replay_llm, matrices, lexicon, jobs, backends })
}

fn pretty<T: Serialize>(value: &T) -> String {
    // plain data structures with string keys always serialize
    let mut s = serde_json::to_string_pretty(value).unwrap_or_default();
    s.push('\n');
    s
}

impl SealedFixtures {
    /// File names and contents, in a fixed order.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("gold.json".to_string(), pretty(&self.gold)),
            ("replay_nmt.json".to_string(), pretty(&self.replay_nmt)),
            ("replay_llm.json".to_string(), pretty(&self.replay_llm)),
            ("matrices.json".to_string(), pretty(&self.matrices)),
            ("lexicon.vec".to_string(), self.lexicon.to_text()),
            ("backends.json".to_string(), pretty(&self.backends)),
        ];
        for (method, job) in &self.jobs {
            let name = serde_json::to_value(method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            out.push((format!("job_{name}.json"), pretty(job)));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, contents) in self.files() {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

/// Reads a corpus file: a JSON array of entries.
pub fn load_corpus(path: &Path) -> Result<Vec<CorpusEntry>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(&path.display().to_string(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| bad(&path.display().to_string(), e.to_string()))
}
