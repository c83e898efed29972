use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use stylemt::align::{attention_align, load_lexicon, parse_matrices, AlignmentMatrix, EmbeddingLexicon};
use stylemt::backends::{load_backend_configs, BackendRegistry};
use stylemt::evalkit::{load_gold, render_comparison, score_run, threshold_sweep, MethodReport, ReportFormat};
use stylemt::markup::StyledText;
use stylemt::pipelines::{run_job, AttentionInputs, Job, JobDocument, MethodKind, MethodRun, SentenceTiming};

use crate::error::CliError;
use crate::run_config::RunConfig;
use crate::{AlignArgs, CompareArgs, EvaluateArgs, Format, SweepArgs, TranslateArgs};

/// What `translate-styled` writes: one block per method, each covering every document.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunFile {
    pub runs: Vec<MethodRun>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ResultInput {
    Many(RunFile),
    One(MethodRun),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DocumentInput {
    Gold { id: String, source: StyledText },
    Doc(JobDocument),
}

#[derive(Serialize)]
struct RunMeta {
    run_id: String,
    started_unix_ms: u128,
    elapsed_ms: f64,
    jobs: usize,
    timings: BTreeMap<MethodKind, Vec<SentenceTiming>>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::config("missing_path", format!("cannot read {}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::config("schema", format!("{} is not a valid {what}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, contents)
            .map_err(|e| CliError::config("io", format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    // result types hold only strings, numbers and string-keyed maps
    let mut s = serde_json::to_string_pretty(value).unwrap_or_default();
    s.push('\n');
    s
}

fn load_documents(path: &Path) -> Result<Vec<JobDocument>, CliError> {
    let inputs: Vec<DocumentInput> = parse(path, "document list")?;
    Ok(inputs
        .into_iter()
        .map(|d| match d {
            DocumentInput::Gold { id, source } => JobDocument { id: Some(id), doc: source },
            DocumentInput::Doc(doc) => doc,
        })
        .collect())
}

fn load_lexicon_file(path: &Path) -> Result<EmbeddingLexicon, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::config("missing_path", format!("cannot read lexicon {}: {e}", path.display())))?;
    Ok(load_lexicon(BufReader::new(file))?)
}

fn flags_config(a: TranslateArgs) -> RunConfig {
    RunConfig {
        methods: a.method,
        input: a.input,
        backends: a.backends,
        translator: a.translator,
        completer: a.completer,
        matrices: a.matrices,
        lexicon: a.lexicon,
        k: a.attention.k,
        threshold: a.attention.threshold,
        oov: a.attention.oov,
        occurrence_tiebreak: a.tiebreak,
        unaligned_styled_word: a.unaligned,
        merge_adjacent: a.merge_adjacent,
        source_lang: a.source_lang,
        target_lang: a.target_lang,
        max_output_tokens: a.max_output_tokens,
        prompts_dir: a.prompts,
        out: a.out,
        meta: a.meta,
        jobs: a.jobs,
    }
}

fn job_for(method: MethodKind, cfg: &RunConfig, documents: &[JobDocument]) -> Job {
    let uses_translator = matches!(method, MethodKind::NmtTags | MethodKind::Hybrid);
    let uses_completer = matches!(method, MethodKind::LlmDelimiters | MethodKind::Hybrid);
    Job {
        method,
        policy: cfg.policy(),
        langs: cfg.langs(),
        max_output_tokens: cfg.max_output_tokens.unwrap_or(512),
        translator: uses_translator.then(|| cfg.translator.clone().unwrap_or_else(|| "nmt".into())),
        completer: uses_completer.then(|| cfg.completer.clone().unwrap_or_else(|| "llm".into())),
        attention: (method == MethodKind::Attention).then(|| AttentionInputs {
            matrices: cfg.matrices.clone().unwrap_or_default(),
            lexicon: cfg.lexicon.clone().unwrap_or_default(),
            params: cfg.attention_params(),
        }),
        prompts_dir: cfg.prompts_dir.clone(),
        documents: documents.to_vec(),
    }
}

pub fn translate_styled(a: TranslateArgs) -> Result<(), CliError> {
    let base = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.overlay(flags_config(a));
    cfg.validate()?;
    let input = cfg.input.clone().unwrap_or_default();
    let documents = load_documents(&input)?;
    let registry = match &cfg.backends {
        Some(p) if cfg.methods.iter().any(|m| *m != MethodKind::Attention) => {
            BackendRegistry::from_configs(&load_backend_configs(p)?)?
        }
        _ => BackendRegistry::default(),
    };
    let workers = cfg.jobs.unwrap_or(4);

    let started = Instant::now();
    let started_unix_ms = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let mut methods = Vec::new();
    for m in &cfg.methods {
        if !methods.contains(m) {
            methods.push(*m);
        }
    }
    let mut runs = Vec::new();
    let mut timings = BTreeMap::new();
    let mut failures = Vec::new();
    for method in methods {
        let job = job_for(method, &cfg, &documents);
        let (results, t) = run_job(&job, &registry, workers)?;
        for r in &results {
            let name = r.id.clone().unwrap_or_else(|| format!("#{}", r.index));
            match (&r.translation, &r.error) {
                (Some(t), _) => println!(
                    "{name}\t{}\tok\tspans={} warnings={} anomalies={}",
                    method.label(),
                    t.target.spans().len(),
                    t.warnings.len(),
                    t.anomalies.len()
                ),
                (None, Some(e)) => {
                    println!("{name}\t{}\terror\t{}", method.label(), e.kind);
                    failures.push(format!("{name} {} {}: {}", method.label(), e.kind, e.message));
                }
                (None, None) => {}
            }
        }
        timings.insert(method, t);
        runs.push(MethodRun { method, results });
    }

    let out = cfg.out.clone().unwrap_or_default();
    write_output(Some(&out), &pretty(&RunFile { runs }))?;
    if let Some(meta) = &cfg.meta {
        let meta_doc = RunMeta {
            run_id: format!("{started_unix_ms:x}-{}", std::process::id()),
            started_unix_ms,
            elapsed_ms: started.elapsed().as_secs_f64() * 1000.0,
            jobs: workers,
            timings,
        };
        write_output(Some(meta), &pretty(&meta_doc))?;
    }
    if let Some(first) = failures.first() {
        return Err(CliError::backend(
            "sentence_failed",
            format!("{} sentence run(s) failed; first: {first}", failures.len()),
        ));
    }
    Ok(())
}

fn load_matrices(path: &Path) -> Result<Vec<AlignmentMatrix>, CliError> {
    parse_matrices(&read(path)?)
        .map(|(m, _)| m)
        .map_err(|e| CliError::config("schema", format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path, index: usize) -> Result<AlignmentMatrix, CliError> {
    let matrices = load_matrices(path)?;
    let n = matrices.len();
    matrices
        .into_iter()
        .nth(index)
        .ok_or_else(|| CliError::config("config", format!("--index {index} but {} holds {n} matrices", path.display())))
}

pub fn align(a: AlignArgs) -> Result<(), CliError> {
    let matrix = load_matrix(&a.matrix, a.index)?;
    let lexicon = load_lexicon_file(&a.lexicon)?;
    let styled = match a.styled {
        Some(list) => list.into_iter().collect(),
        None => (0..matrix.source_len()).collect(),
    };
    let d = stylemt::align::AttentionParams::default();
    let params = stylemt::align::AttentionParams {
        k: a.attention.k.unwrap_or(d.k),
        threshold: a.attention.threshold.unwrap_or(d.threshold),
        oov: a.attention.oov.unwrap_or(d.oov),
    };
    let map = attention_align(&matrix, &styled, &lexicon, &params)?;
    write_output(a.out.as_deref(), &pretty(&map))
}

fn load_runs(paths: &[PathBuf]) -> Result<Vec<MethodRun>, CliError> {
    let mut runs = Vec::new();
    for p in paths {
        match parse::<ResultInput>(p, "result file")? {
            ResultInput::Many(f) => runs.extend(f.runs),
            ResultInput::One(r) => runs.push(r),
        }
    }
    Ok(runs)
}

fn reports(
    gold: &Path,
    results: &[PathBuf],
) -> Result<(Vec<stylemt::evalkit::GoldRecord>, Vec<MethodReport>), CliError> {
    let records = load_gold(gold)?;
    let reports = load_runs(results)?.iter().map(|r| score_run(&records, r)).collect::<Result<Vec<_>, _>>()?;
    Ok((records, reports))
}

fn opt(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "y",
        Some(false) => "n",
        None => "?",
    }
}

pub fn evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let (_, reports) = reports(&a.gold, &a.results)?;
    let out = match a.format {
        Format::Json => pretty(&reports),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| CliError::config("io", e.to_string());
            w.write_record(["method", "id", "correct", "precision", "recall", "f1", "contiguous", "status"])
                .map_err(csv_err)?;
            for r in &reports {
                for s in &r.scores {
                    let status = match (&s.failure, s.tokenization_mismatch) {
                        (Some(kind), _) => kind.clone(),
                        (None, true) => "tokenization_mismatch".into(),
                        (None, false) => "scored".into(),
                    };
                    w.write_record([
                        r.method.label().to_string(),
                        s.id.clone(),
                        s.correct.to_string(),
                        format!("{:.4}", s.precision),
                        format!("{:.4}", s.recall),
                        format!("{:.4}", s.f1),
                        opt(s.contiguous_target).to_string(),
                        status,
                    ])
                    .map_err(csv_err)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| CliError::config("io", e.to_string()))?;
            String::from_utf8_lossy(&bytes).into_owned()
        }
        Format::Text => {
            let mut s = String::new();
            for r in &reports {
                s.push_str(&format!("{}\n", r.method.label()));
                for sc in &r.scores {
                    let mark = if sc.tokenization_mismatch {
                        "?"
                    } else if sc.correct {
                        "✓"
                    } else {
                        "X"
                    };
                    s.push_str(&format!(
                        "  {:<8} {mark}  P={:.3} R={:.3} F1={:.3}  cont={}{}\n",
                        sc.id,
                        sc.precision,
                        sc.recall,
                        sc.f1,
                        opt(sc.contiguous_target),
                        sc.failure.as_ref().map(|k| format!("  failed: {k}")).unwrap_or_default()
                    ));
                }
                s.push_str(&format!(
                    "  correct {}/{}  scored {}  mean F1 {:.3}\n",
                    r.correct(),
                    r.scores.len(),
                    r.scored(),
                    r.mean_f1()
                ));
            }
            s
        }
    };
    write_output(a.out.as_deref(), &out)
}

pub fn compare(a: CompareArgs) -> Result<(), CliError> {
    let format = match a.format {
        Format::Text => ReportFormat::Text,
        Format::Csv => ReportFormat::Csv,
        Format::Json => return Err(CliError::config("config", "compare renders text or csv")),
    };
    let (records, reports) = reports(&a.gold, &a.results)?;
    write_output(a.out.as_deref(), &render_comparison(&records, &reports, format)?)
}

/// `START:END:STEP` with both ends included.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config("config", format!("--sweep expects START:END:STEP, got {spec:?}"));
    let parts: Vec<f64> =
        spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, end, step] = parts[..] else { return Err(bad()) };
    if step.is_nan() || step <= 0.0 || end < start || !start.is_finite() || !end.is_finite() {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    // round away accumulated binary error so 0.1 * 3 prints as 0.3
    Ok((0..count).map(|n| ((start + n as f64 * step) * 1e9).round() / 1e9).collect())
}

pub fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let thresholds = match (&a.sweep, &a.thresholds) {
        (Some(spec), _) => parse_range(spec)?,
        (None, Some(list)) => list.clone(),
        (None, None) => return Err(CliError::config("config", "pass --sweep START:END:STEP or --thresholds")),
    };
    let records = load_gold(&a.gold)?;
    let matrices = load_matrices(&a.matrices)?;
    let lexicon = load_lexicon_file(&a.lexicon)?;
    let rows = threshold_sweep(&records, &matrices, &lexicon, a.k, a.oov, &thresholds)?;
    let aer = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    let out = match a.format {
        Format::Json => pretty(&rows),
        Format::Csv => {
            let mut s = String::from("threshold,mean_f1,mean_aer,correct,pairs\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{:.4},{},{},{}\n",
                    r.threshold,
                    r.mean_f1,
                    aer(r.mean_aer),
                    r.correct,
                    r.pairs
                ));
            }
            s
        }
        Format::Text => {
            let mut s =
                format!("{:<10} {:>8} {:>8} {:>8} {:>6}\n", "threshold", "mean F1", "mean AER", "correct", "pairs");
            for r in &rows {
                s.push_str(&format!(
                    "{:<10} {:>8.4} {:>8} {:>8} {:>6}\n",
                    r.threshold,
                    r.mean_f1,
                    aer(r.mean_aer),
                    format!("{}/{}", r.correct, records.len()),
                    r.pairs
                ));
            }
            s
        }
    };
    write_output(a.out.as_deref(), &out)
}
