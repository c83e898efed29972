use serde::{Deserialize, Serialize};

use super::{failed_sentence, score_sentence, style_label, styled_phrase, EvalError, GoldRecord, SentenceScore};
use crate::pipelines::{MethodKind, MethodRun};

/// Every sentence score of one method over a fixture set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: MethodKind,
    pub scores: Vec<SentenceScore>,
}

impl MethodReport {
    /// Sentences that could be scored (no tokenization mismatch).
    pub fn scored(&self) -> usize {
        self.scores.iter().filter(|s| !s.tokenization_mismatch).count()
    }

    pub fn correct(&self) -> usize {
        self.scores.iter().filter(|s| s.correct).count()
    }

    pub fn mean_f1(&self) -> f64 {
        let scored: Vec<f64> = self.scores.iter().filter(|s| !s.tokenization_mismatch).map(|s| s.f1).collect();
        if scored.is_empty() {
            0.0
        } else {
            scored.iter().sum::<f64>() / scored.len() as f64
        }
    }
}

/// Scores a result file against gold records. The run must cover exactly
/// the records, in order.
pub fn score_run(records: &[GoldRecord], run: &MethodRun) -> Result<MethodReport, EvalError> {
    let ids: Vec<Option<&str>> = run.results.iter().map(|r| r.id.as_deref()).collect();
    let want: Vec<Option<&str>> = records.iter().map(|g| Some(g.id.as_str())).collect();
    if ids != want {
        return Err(EvalError::FixtureSetMismatch(format!(
            "{} results cover {:?}, gold has {:?}",
            run.method.label(),
            ids.iter().map(|i| i.unwrap_or("?")).collect::<Vec<_>>(),
            want.iter().flatten().collect::<Vec<_>>()
        )));
    }
    let scores = run
        .results
        .iter()
        .zip(records)
        .map(|(r, g)| match (&r.translation, &r.error) {
            (Some(t), _) => score_sentence(t, g),
            (None, Some(e)) => failed_sentence(run.method, g, &e.kind),
            (None, None) => failed_sentence(run.method, g, "missing"),
        })
        .collect();
    Ok(MethodReport { method: run.method, scores })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Csv,
}

fn yn(b: bool) -> &'static str {
    if b {
        "y"
    } else {
        "n"
    }
}

fn cells(s: &SentenceScore) -> [String; 2] {
    if s.tokenization_mismatch {
        return ["?".into(), "?".into()];
    }
    if s.failure.is_some() {
        return ["!".into(), "X".into()];
    }
    let cont = s.contiguous_target.map_or("?", yn);
    [cont.into(), if s.correct { "✓" } else { "X" }.into()]
}

fn width(s: &str) -> usize {
    s.chars().count()
}

/// One row per sentence with `Cont.`/`OK` per method, then totals.
/// Every report must score exactly the records, in order.
pub fn render_comparison(
    records: &[GoldRecord],
    reports: &[MethodReport],
    format: ReportFormat,
) -> Result<String, EvalError> {
    for r in reports {
        let ids: Vec<&str> = r.scores.iter().map(|s| s.id.as_str()).collect();
        let want: Vec<&str> = records.iter().map(|g| g.id.as_str()).collect();
        if ids != want {
            return Err(EvalError::FixtureSetMismatch(format!(
                "{} report covers {:?}, fixtures are {:?}",
                r.method.label(),
                ids,
                want
            )));
        }
    }

    let mut header: Vec<String> = ["#", "Text Style", "Phrase", "Eng. Cont."].map(String::from).to_vec();
    for r in reports {
        header.push(format!("{} Cont.", r.method.label()));
        header.push(format!("{} OK", r.method.label()));
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    if !reports.is_empty() {
        for (k, rec) in records.iter().enumerate() {
            let mut row = vec![rec.id.clone(), style_label(&rec.source), styled_phrase(&rec.source)];
            row.push(yn(reports[0].scores[k].contiguous_source).into());
            for r in reports {
                row.extend(cells(&r.scores[k]));
            }
            rows.push(row);
        }
        let mut ok = vec!["OK".to_string(), String::new(), String::new(), String::new()];
        let mut f1 = vec!["mean F1".to_string(), String::new(), String::new(), String::new()];
        for r in reports {
            ok.push(String::new());
            ok.push(format!("{}/{}", r.correct(), r.scores.len()));
            f1.push(String::new());
            f1.push(format!("{:.3}", r.mean_f1()));
        }
        rows.push(ok);
        rows.push(f1);
    }

    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| EvalError::FixtureSetMismatch(format!("csv: {e}"));
            w.write_record(&header).map_err(io)?;
            for row in &rows {
                w.write_record(row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| EvalError::FixtureSetMismatch(format!("csv: {e}")))?;
            Ok(String::from_utf8_lossy(&bytes).into_owned())
        }
        ReportFormat::Text => {
            let mut widths: Vec<usize> = header.iter().map(|h| width(h)).collect();
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(width(cell));
                }
            }
            let line = |cells: &[String]| {
                let padded: Vec<String> =
                    cells.iter().zip(&widths).map(|(c, &w)| format!("{c}{}", " ".repeat(w - width(c)))).collect();
                padded.join("  ").trim_end().to_string()
            };
            let mut out = line(&header);
            out.push('\n');
            out.push_str(&"-".repeat(width(&out) - 1));
            out.push('\n');
            for row in &rows {
                out.push_str(&line(row));
                out.push('\n');
            }
            Ok(out)
        }
    }
}
