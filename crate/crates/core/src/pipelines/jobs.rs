use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::methods::{
    run_attention_method, run_hybrid_method, run_llm_delimiters_method, run_nmt_tags_method, LangPair, MethodOptions,
};
use super::{MethodKind, PipelineError, ProjectionPolicy, PromptSet, StyledTranslation};
use crate::align::{load_lexicon, parse_matrices, AlignmentMatrix, AttentionParams, EmbeddingLexicon};
use crate::backends::{BackendRegistry, Completer, Translator};
use crate::markup::StyledText;

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("job configuration: {0}")]
    Config(String),
}

/// Inputs for the attention method: one matrix per document, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionInputs {
    pub matrices: PathBuf,
    pub lexicon: PathBuf,
    #[serde(flatten)]
    pub params: AttentionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub doc: StyledText,
}

fn default_max_tokens() -> u32 {
    512
}

/// A batch of sentences for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub method: MethodKind,
    #[serde(default)]
    pub policy: ProjectionPolicy,
    #[serde(default)]
    pub langs: LangPair,
    #[serde(default = "default_max_tokens")]
    pub max_output_tokens: u32,
    /// Backend names from the registry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attention: Option<AttentionInputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompts_dir: Option<PathBuf>,
    pub documents: Vec<JobDocument>,
}

/// Reads a job file; relative paths inside it resolve against its directory.
pub fn load_job(path: &Path) -> Result<Job, JobError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| JobError::Config(format!("cannot read job {}: {e}", path.display())))?;
    let mut job: Job =
        serde_json::from_str(&text).map_err(|e| JobError::Config(format!("bad job {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let rebase = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    if let Some(a) = &mut job.attention {
        rebase(&mut a.matrices);
        rebase(&mut a.lexicon);
    }
    if let Some(p) = &mut job.prompts_dir {
        rebase(p);
    }
    Ok(job)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceFailure {
    pub kind: String,
    pub message: String,
}

/// One row of a result file. Timing lives elsewhere so result files stay
/// byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceResult {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<StyledTranslation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<SentenceFailure>,
}

/// Results of one method over a document batch: the result-file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    pub method: MethodKind,
    pub results: Vec<SentenceResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceTiming {
    pub index: usize,
    pub elapsed_ms: f64,
}

enum Prepared {
    Attention { matrices: Vec<AlignmentMatrix>, lexicon: EmbeddingLexicon, params: AttentionParams },
    Nmt(std::sync::Arc<dyn Translator>),
    Llm(std::sync::Arc<dyn Completer>),
    Hybrid(std::sync::Arc<dyn Translator>, std::sync::Arc<dyn Completer>),
}

fn config_err(e: impl std::fmt::Display) -> JobError {
    JobError::Config(e.to_string())
}

fn prepare(job: &Job, registry: &BackendRegistry) -> Result<Prepared, JobError> {
    let translator = || {
        let name = job.translator.as_deref().ok_or_else(|| config_err("job needs a \"translator\" backend"))?;
        registry.translator(name).map_err(config_err)
    };
    let completer = || {
        let name = job.completer.as_deref().ok_or_else(|| config_err("job needs a \"completer\" backend"))?;
        registry.completer(name).map_err(config_err)
    };
    Ok(match job.method {
        MethodKind::Attention => {
            let a = job.attention.as_ref().ok_or_else(|| config_err("attention job needs an \"attention\" block"))?;
            let text = std::fs::read_to_string(&a.matrices)
                .map_err(|e| config_err(format!("cannot read {}: {e}", a.matrices.display())))?;
            let (matrices, _) =
                parse_matrices(&text).map_err(|e| config_err(format!("bad matrices {}: {e}", a.matrices.display())))?;
            if matrices.len() != job.documents.len() {
                return Err(config_err(format!("{} matrices for {} documents", matrices.len(), job.documents.len())));
            }
            let file = std::fs::File::open(&a.lexicon)
                .map_err(|e| config_err(format!("cannot read {}: {e}", a.lexicon.display())))?;
            let lexicon = load_lexicon(BufReader::new(file)).map_err(config_err)?;
            Prepared::Attention { matrices, lexicon, params: a.params }
        }
        MethodKind::NmtTags => Prepared::Nmt(translator()?),
        MethodKind::LlmDelimiters => Prepared::Llm(completer()?),
        MethodKind::Hybrid => Prepared::Hybrid(translator()?, completer()?),
    })
}

fn run_one(
    prepared: &Prepared,
    opts: &MethodOptions,
    index: usize,
    doc: &StyledText,
) -> Result<StyledTranslation, PipelineError> {
    match prepared {
        Prepared::Attention { matrices, lexicon, params } => {
            run_attention_method(doc, &matrices[index], lexicon, params, &opts.policy)
        }
        Prepared::Nmt(t) => run_nmt_tags_method(doc, t.as_ref(), opts),
        Prepared::Llm(c) => run_llm_delimiters_method(doc, c.as_ref(), opts),
        Prepared::Hybrid(t, c) => run_hybrid_method(doc, t.as_ref(), c.as_ref(), opts),
    }
}

/// Runs every document with up to `workers` sentences in flight. Results come
/// back in document order whatever the scheduling.
pub fn run_job(
    job: &Job,
    registry: &BackendRegistry,
    workers: usize,
) -> Result<(Vec<SentenceResult>, Vec<SentenceTiming>), JobError> {
    let prepared = prepare(job, registry)?;
    let prompts = match &job.prompts_dir {
        Some(dir) => PromptSet::from_dir(dir).map_err(config_err)?,
        None => PromptSet::default(),
    };
    let opts = MethodOptions {
        langs: job.langs.clone(),
        prompts,
        max_output_tokens: job.max_output_tokens,
        policy: job.policy,
    };

    let n = job.documents.len();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<(SentenceResult, SentenceTiming)>>> = Mutex::new(vec![None; n]);
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, n.max(1)) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= n {
                    break;
                }
                let entry = &job.documents[index];
                let started = Instant::now();
                let outcome = run_one(&prepared, &opts, index, &entry.doc);
                let timing = SentenceTiming { index, elapsed_ms: started.elapsed().as_secs_f64() * 1000.0 };
                let (translation, error) = match outcome {
                    Ok(t) => (Some(t), None),
                    Err(e) => (None, Some(SentenceFailure { kind: e.kind().into(), message: e.to_string() })),
                };
                let result = SentenceResult { index, id: entry.id.clone(), translation, error };
                slots.lock().unwrap_or_else(|p| p.into_inner())[index] = Some((result, timing));
            });
        }
    });
    let (results, timings) = slots.into_inner().unwrap_or_else(|p| p.into_inner()).into_iter().flatten().unzip();
    Ok((results, timings))
}
