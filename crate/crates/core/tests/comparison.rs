use std::path::{Path, PathBuf};

use stylemt::backends::{load_backend_configs, BackendRegistry};
use stylemt::evalkit::{
    load_corpus, load_gold, render_comparison, score_sentence, seal_corpus, MethodReport, ReportFormat,
};
use stylemt::pipelines::{load_job, run_job, MethodKind, MethodOptions};

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample10")
}

fn reports() -> Vec<MethodReport> {
    let gold = load_gold(&dir().join("gold.json")).unwrap();
    let registry = BackendRegistry::from_configs(&load_backend_configs(&dir().join("backends.json")).unwrap()).unwrap();
    MethodKind::ALL
        .iter()
        .map(|&method| {
            let name = serde_json::to_value(method).unwrap();
            let job = load_job(&dir().join(format!("job_{}.json", name.as_str().unwrap()))).unwrap();
            let (results, _) = run_job(&job, &registry, 3).unwrap();
            let scores = results
                .iter()
                .zip(&gold)
                .map(|(r, g)| {
                    let t = r.translation.as_ref().unwrap_or_else(|| panic!("{method:?} {}: {:?}", g.id, r.error));
                    score_sentence(t, g)
                })
                .collect();
            MethodReport { method, scores }
        })
        .collect()
}

fn pattern(report: &MethodReport, f: impl Fn(&stylemt::evalkit::SentenceScore) -> bool) -> String {
    report.scores.iter().map(|s| if f(s) { 'y' } else { 'n' }).collect()
}

#[test]
fn committed_fixtures_match_corpus() {
    let corpus = load_corpus(&dir().join("corpus.json")).unwrap();
    let sealed = seal_corpus(&corpus, &MethodOptions::default()).unwrap();
    for (name, contents) in sealed.files() {
        let on_disk = std::fs::read_to_string(dir().join(&name)).unwrap();
        assert!(on_disk == contents, "{name} is stale; rerun the seal_fixtures example");
    }
}

#[test]
fn correctness_matrix() {
    let reports = reports();
    let ok: Vec<String> = reports.iter().map(|r| pattern(r, |s| s.correct)).collect();
    // rows 1..10
    assert_eq!(ok[0], "yyyyyyyyyy", "attention");
    assert_eq!(ok[1], "nynnyyyyyy", "nmt");
    assert_eq!(ok[2], "yyynyyyyyy", "llm");
    assert_eq!(ok[3], "yyynyyyyyy", "hybrid");
    for r in &reports {
        assert!(r.scores.iter().all(|s| !s.tokenization_mismatch), "{:?}", r.method);
    }
}

#[test]
fn contiguity_matrix() {
    let reports = reports();
    assert_eq!(pattern(&reports[0], |s| s.contiguous_source), "yyyyyyynyy");
    let cont: Vec<String> = reports.iter().map(|r| pattern(r, |s| s.contiguous_target == Some(true))).collect();
    assert_eq!(cont[0], "nynnyyynyy", "attention");
    assert_eq!(cont[1], "nynnyyynyy", "nmt");
    assert_eq!(cont[2], "yyynyyynyy", "llm");
    assert_eq!(cont[3], "nynnyyynyy", "hybrid");
}

#[test]
fn comparison_table_marks() {
    let gold = load_gold(&dir().join("gold.json")).unwrap();
    let text = render_comparison(&gold, &reports(), ReportFormat::Text).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2 + 10 + 2);
    let marks = |line: &str| line.chars().filter(|c| *c == '✓' || *c == 'X').collect::<String>();
    assert_eq!(marks(lines[2]), "✓X✓✓");
    assert_eq!(marks(lines[5]), "✓XXX");
    assert_eq!(marks(lines[3]), "✓✓✓✓");
    assert_eq!(lines[12].split_whitespace().collect::<Vec<_>>(), ["OK", "10/10", "7/10", "9/10", "9/10"]);
    assert_eq!(
        lines[2].split_whitespace().take(8).collect::<Vec<_>>(),
        ["r01", "bold+italic", "fell", "below", "10", "million", "in", "February"]
    );
}

#[test]
fn results_are_deterministic_across_worker_counts() {
    let registry = BackendRegistry::from_configs(&load_backend_configs(&dir().join("backends.json")).unwrap()).unwrap();
    let job = load_job(&dir().join("job_hybrid.json")).unwrap();
    let one = serde_json::to_string(&run_job(&job, &registry, 1).unwrap().0).unwrap();
    let many = serde_json::to_string(&run_job(&job, &registry, 8).unwrap().0).unwrap();
    assert_eq!(one, many);
}
