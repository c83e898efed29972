use std::collections::BTreeSet;

use stylemt::align::{AlignmentMatrix, AttentionParams, EmbeddingLexicon};
use stylemt::backends::{ReplayBackend, ReplayRecord, ReplayRequest};
use stylemt::markup::{parse_tagged, AnomalyKind, MarkupFormat, StyleAttr, StyleSpan, StyleTable, StyledText};
use stylemt::pipelines::{
    hybrid_map_request, hybrid_translation_request, llm_delimiters_request, nmt_tags_request, run_attention_method,
    run_hybrid_method, run_llm_delimiters_method, run_nmt_tags_method, MethodOptions, OccurrenceTiebreak,
    PipelineError, ProjectionPolicy, Warning,
};

const LABOR: &str = "A Labor Department report this week also showed the number of available positions <S1>fell below 10 million in February</S1> for the first time in nearly two years.";
const LABOR_DE: &str = "Ein Bericht des Arbeitsministeriums in dieser Woche zeigte auch, dass die Anzahl der verfügbaren Stellen im Februar erstmals seit fast zwei Jahren unter 10 Millionen fiel.";

fn italic() -> StyleTable {
    let mut t = StyleTable::new();
    t.insert(1, [StyleAttr::Italic]);
    t
}

fn source(tagged: &str) -> StyledText {
    let parsed = parse_tagged(tagged, MarkupFormat::NumberedTags, &italic());
    assert!(parsed.anomalies.is_empty());
    parsed.doc
}

fn styled_words(doc: &StyledText) -> Vec<Vec<&str>> {
    doc.spans().iter().map(|s| doc.surfaces()[s.token_range.clone()].to_vec()).collect()
}

#[test]
fn nmt_tags_round_trip() {
    let src = source("Job cuts have also soared <S1>nearly fivefold</S1> so far this year from a year ago.");
    let opts = MethodOptions::default();
    let req = nmt_tags_request(&src, &opts.langs).unwrap();
    assert_eq!(req.body, "Job cuts have also soared <S1>nearly fivefold</S1> so far this year from a year ago.");
    assert!(req.preserve_markup);
    let backend = ReplayBackend::from_records([ReplayRecord::new(
        ReplayRequest::Translate(req),
        "Auch der Stellenabbau hat sich in diesem Jahr im Vergleich zum Vorjahr <S1>fast verfünffacht</S1>.",
    )])
    .unwrap();
    let out = run_nmt_tags_method(&src, &backend, &opts).unwrap();
    assert_eq!(styled_words(&out.target), vec![vec!["fast", "verfünffacht"]]);
    assert_eq!(out.target.spans()[0].attrs, BTreeSet::from([StyleAttr::Italic]));
    assert!(out.map.is_empty() && out.anomalies.is_empty());
}

#[test]
fn nmt_plain_source_stays_plain() {
    let src = StyledText::plain("The house.");
    let opts = MethodOptions::default();
    let req = nmt_tags_request(&src, &opts.langs).unwrap();
    assert!(!req.preserve_markup);
    let backend = ReplayBackend::from_records([ReplayRecord::new(ReplayRequest::Translate(req), "Das Haus.")]).unwrap();
    let out = run_nmt_tags_method(&src, &backend, &opts).unwrap();
    assert_eq!(out.target.text(), "Das Haus.");
    assert!(out.target.spans().is_empty());
}

fn llm_run(src: &StyledText, response: &str) -> stylemt::pipelines::StyledTranslation {
    let opts = MethodOptions::default();
    let (req, format) = llm_delimiters_request(src, &opts).unwrap();
    assert_eq!(format, MarkupFormat::Delimiters);
    let backend = ReplayBackend::from_records([ReplayRecord::new(ReplayRequest::Complete(req), response)]).unwrap();
    run_llm_delimiters_method(src, &backend, &opts).unwrap()
}

#[test]
fn llm_delimiters_split_phrase() {
    let src = source(LABOR);
    let opts = MethodOptions::default();
    let (req, _) = llm_delimiters_request(&src, &opts).unwrap();
    assert!(req.system_prompt.starts_with("You are efficient in language translation."));
    assert!(req.system_prompt.contains("##start## -> marks the start of a special style around this text."));
    assert_eq!(
        req.user_prompt,
        "A Labor Department report this week also showed the number of available positions ##start##fell below 10 million in February##end## for the first time in nearly two years."
    );

    let out = llm_run(
        &src,
        "Ein Bericht des Arbeitsministeriums in dieser Woche zeigte auch, dass die Anzahl der verfügbaren Stellen ##start## im Februar ##end## erstmals seit fast zwei Jahren ##start##  unter 10 Millionen fiel ##end##. ",
    );
    assert_eq!(out.target.text(), LABOR_DE);
    assert_eq!(styled_words(&out.target), vec![vec!["im", "Februar"], vec!["unter", "10", "Millionen", "fiel"]]);
    assert!(out.anomalies.is_empty());
}

#[test]
fn llm_response_defects_recover() {
    let src = source("Experts gave <S1>varying</S1> estimates.");
    let none = llm_run(&src, "Experten gaben unterschiedliche Schätzungen ab.");
    assert!(none.target.spans().is_empty());

    let orphan = llm_run(&src, "Experten gaben ##end## unterschiedliche Schätzungen ab.");
    assert!(orphan.target.spans().is_empty());
    assert_eq!(orphan.anomalies[0].kind, AnomalyKind::OrphanClose);
    assert_eq!(orphan.target.text(), "Experten gaben unterschiedliche Schätzungen ab.");

    let unclosed = llm_run(&src, "Experten gaben ##start##unterschiedliche Schätzungen ab.");
    assert_eq!(unclosed.anomalies[0].kind, AnomalyKind::UnclosedTag);
    assert_eq!(styled_words(&unclosed.target), vec![vec!["unterschiedliche", "Schätzungen", "ab", "."]]);
}

#[test]
fn llm_rejects_overlapping_source() {
    let src = StyledText::new(
        "a b c",
        vec![StyleSpan::new(1, [StyleAttr::Bold], 0..2), StyleSpan::new(2, [StyleAttr::Italic], 1..3)],
    )
    .unwrap();
    assert!(matches!(llm_delimiters_request(&src, &MethodOptions::default()), Err(PipelineError::Markup(_))));
}

#[test]
fn llm_uses_numbered_delimiters_for_several_styles() {
    let src = StyledText::new(
        "a b c d",
        vec![StyleSpan::new(1, [StyleAttr::Bold], 0..1), StyleSpan::new(2, [StyleAttr::Italic], 2..3)],
    )
    .unwrap();
    let opts = MethodOptions::default();
    let (req, format) = llm_delimiters_request(&src, &opts).unwrap();
    assert_eq!(format, MarkupFormat::NumberedDelimiters);
    assert_eq!(req.user_prompt, "##start1##a##end1## b ##start2##c##end2## d");
    let backend = ReplayBackend::from_records([ReplayRecord::new(
        ReplayRequest::Complete(req),
        "w ##start2##x##end2## ##start1##y##end1## z",
    )])
    .unwrap();
    let out = run_llm_delimiters_method(&src, &backend, &opts).unwrap();
    assert_eq!(
        out.target.style_token_sets().into_iter().collect::<Vec<_>>(),
        vec![(1, BTreeSet::from([2])), (2, BTreeSet::from([1])),]
    );
    assert_eq!(out.warnings, vec![Warning::NumberedDelimiters { styles: 2 }]);
}

fn hybrid_backends(src: &StyledText, target: &str, maps: &str, opts: &MethodOptions) -> (ReplayBackend, ReplayBackend) {
    let nmt = ReplayBackend::from_records([ReplayRecord::new(
        ReplayRequest::Translate(hybrid_translation_request(src, &opts.langs).unwrap()),
        target,
    )])
    .unwrap();
    let llm = ReplayBackend::from_records([ReplayRecord::new(
        ReplayRequest::Complete(hybrid_map_request(src, target, opts).unwrap()),
        maps,
    )])
    .unwrap();
    (nmt, llm)
}

#[test]
fn hybrid_unigram_maps() {
    let src = source(LABOR);
    let opts = MethodOptions::default();
    let req = hybrid_map_request(&src, LABOR_DE, &opts).unwrap();
    assert_eq!(
        req.system_prompt,
        "You are an expert in multiple languages.\nYou have to provide unigram mappings of the input words.\nThe input also contains source and target sentence in English and German respectively. The unigram mappings to be provided by you should be words from target sentence."
    );
    assert_eq!(
        req.user_prompt,
        format!(
            "Source: {}\nTarget: {LABOR_DE}\nUnigram: {{'fell', 'below', '10', 'million', 'in', 'February'}}",
            src.text()
        )
    );

    let (nmt, llm) =
        hybrid_backends(&src, LABOR_DE, "maps: {`fiel', `unter', `10', `Millionen', `im', `Februar'}", &opts);
    let out = run_hybrid_method(&src, &nmt, &llm, &opts).unwrap();
    let pairs: Vec<(&str, &str)> =
        out.map.pairs().iter().map(|&(j, i)| (src.surfaces()[j], out.target.surfaces()[i])).collect();
    assert_eq!(
        pairs,
        vec![
            ("fell", "fiel"),
            ("below", "unter"),
            ("10", "10"),
            ("million", "Millionen"),
            ("in", "im"),
            ("February", "Februar")
        ]
    );
    assert_eq!(styled_words(&out.target), vec![vec!["im", "Februar"], vec!["unter", "10", "Millionen", "fiel"]]);
    assert!(out.warnings.is_empty());
}

#[test]
fn hybrid_hallucination_and_length_mismatch() {
    let src = source("The <S1>train was late</S1> again.");
    let target = "Der Zug hatte wieder Verspätung.";
    let opts = MethodOptions::default();
    let (nmt, llm) = hybrid_backends(&src, target, "maps: {'Bahn', 'hatte'}", &opts);
    let out = run_hybrid_method(&src, &nmt, &llm, &opts).unwrap();
    assert!(out.warnings.contains(&Warning::LengthMismatch { unigrams: 3, maps: 2 }));
    assert!(out.warnings.contains(&Warning::HallucinatedWord { unigram: "train".into(), word: "Bahn".into() }));
    assert_eq!(styled_words(&out.target), vec![vec!["hatte"]]);
}

#[test]
fn hybrid_missing_maps_is_an_error() {
    let src = source("The <S1>train</S1> again.");
    let opts = MethodOptions::default();
    let (nmt, llm) = hybrid_backends(&src, "Der Zug wieder.", "I cannot help with that.", &opts);
    assert!(matches!(run_hybrid_method(&src, &nmt, &llm, &opts), Err(PipelineError::MapParse(_))));
}

#[test]
fn hybrid_repeated_word_tiebreak() {
    // source "10" at index 2 of 6 (relative 0.4); target "10" at 1 (0.25) and 3 (0.75)
    let src = source("a b <S1>10</S1> c d e");
    let target = "x 10 y 10 z";
    let mut opts = MethodOptions::default();
    let (nmt, llm) = hybrid_backends(&src, target, "maps: {'10'}", &opts);
    let near = run_hybrid_method(&src, &nmt, &llm, &opts).unwrap();
    assert_eq!(near.target.styled_token_indices(), BTreeSet::from([1]));

    opts.policy = ProjectionPolicy { occurrence_tiebreak: OccurrenceTiebreak::LastOccurrence, ..Default::default() };
    let last = run_hybrid_method(&src, &nmt, &llm, &opts).unwrap();
    assert_eq!(last.target.styled_token_indices(), BTreeSet::from([3]));
}

#[test]
fn hybrid_without_styles_skips_llm() {
    let src = StyledText::plain("The house.");
    let opts = MethodOptions::default();
    let nmt = ReplayBackend::from_records([ReplayRecord::new(
        ReplayRequest::Translate(hybrid_translation_request(&src, &opts.langs).unwrap()),
        "Das Haus.",
    )])
    .unwrap();
    let empty_llm = ReplayBackend::default();
    let out = run_hybrid_method(&src, &nmt, &empty_llm, &opts).unwrap();
    assert_eq!(out.target.text(), "Das Haus.");
    assert!(out.target.spans().is_empty());
}

fn diagonal(words: &[&str]) -> (AlignmentMatrix, EmbeddingLexicon) {
    let n = words.len();
    let tokens: Vec<String> = words.iter().map(|w| w.to_string()).collect();
    let weights = (0..n).map(|j| (0..n).map(|i| if i == j { 0.7 } else { 0.3 / (n - 1) as f64 }).collect()).collect();
    let matrix = AlignmentMatrix::new(tokens.clone(), tokens.clone(), weights).unwrap();
    let lex = EmbeddingLexicon::from_entries(
        n,
        tokens.into_iter().enumerate().map(|(k, w)| {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            (w, v)
        }),
    )
    .unwrap();
    (matrix, lex)
}

#[test]
fn attention_diagonal_keeps_positions() {
    let words = ["w0", "w1", "w2", "w3", "w4"];
    let src = StyledText::new(
        words.join(" "),
        vec![StyleSpan::new(1, [StyleAttr::Bold], 1..2), StyleSpan::new(1, [StyleAttr::Bold], 3..4)],
    )
    .unwrap();
    let (matrix, lex) = diagonal(&words);
    let out =
        run_attention_method(&src, &matrix, &lex, &AttentionParams::default(), &ProjectionPolicy::default()).unwrap();
    assert_eq!(out.target.styled_token_indices(), BTreeSet::from([1, 3]));

    let strict = AttentionParams { threshold: 1.0, ..Default::default() };
    let none = run_attention_method(&src, &matrix, &lex, &strict, &ProjectionPolicy::default()).unwrap();
    assert!(none.target.spans().is_empty());
    assert_eq!(none.warnings.len(), 2);
}

#[test]
fn attention_checks_tokens() {
    let (matrix, lex) = diagonal(&["a", "b"]);
    let src = StyledText::new("a c", vec![StyleSpan::new(1, [StyleAttr::Bold], 0..1)]).unwrap();
    assert_eq!(
        run_attention_method(&src, &matrix, &lex, &AttentionParams::default(), &ProjectionPolicy::default()),
        Err(PipelineError::SourceTokenMismatch)
    );
}
