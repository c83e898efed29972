use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stylemt::align::{AttentionParams, OovPolicy};
use stylemt::pipelines::{LangPair, MethodKind, OccurrenceTiebreak, ProjectionPolicy, UnalignedStyledWord};

use crate::error::CliError;

/// Settings for `translate-styled`. Every field is optional so a config
/// file and flags can each supply part of it; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub methods: Vec<MethodKind>,
    pub input: Option<PathBuf>,
    pub backends: Option<PathBuf>,
    pub translator: Option<String>,
    pub completer: Option<String>,
    pub matrices: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub k: Option<usize>,
    pub threshold: Option<f64>,
    pub oov: Option<OovPolicy>,
    pub occurrence_tiebreak: Option<OccurrenceTiebreak>,
    pub unaligned_styled_word: Option<UnalignedStyledWord>,
    pub merge_adjacent: Option<bool>,
    pub source_lang: Option<String>,
    pub target_lang: Option<String>,
    pub max_output_tokens: Option<u32>,
    pub prompts_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config("config", format!("bad config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.input,
            &mut cfg.backends,
            &mut cfg.matrices,
            &mut cfg.lexicon,
            &mut cfg.prompts_dir,
            &mut cfg.out,
            &mut cfg.meta,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            methods: if over.methods.is_empty() { self.methods } else { over.methods },
            input: over.input.or(self.input),
            backends: over.backends.or(self.backends),
            translator: over.translator.or(self.translator),
            completer: over.completer.or(self.completer),
            matrices: over.matrices.or(self.matrices),
            lexicon: over.lexicon.or(self.lexicon),
            k: over.k.or(self.k),
            threshold: over.threshold.or(self.threshold),
            oov: over.oov.or(self.oov),
            occurrence_tiebreak: over.occurrence_tiebreak.or(self.occurrence_tiebreak),
            unaligned_styled_word: over.unaligned_styled_word.or(self.unaligned_styled_word),
            merge_adjacent: over.merge_adjacent.or(self.merge_adjacent),
            source_lang: over.source_lang.or(self.source_lang),
            target_lang: over.target_lang.or(self.target_lang),
            max_output_tokens: over.max_output_tokens.or(self.max_output_tokens),
            prompts_dir: over.prompts_dir.or(self.prompts_dir),
            out: over.out.or(self.out),
            meta: over.meta.or(self.meta),
            jobs: over.jobs.or(self.jobs),
        }
    }

    pub fn policy(&self) -> ProjectionPolicy {
        let d = ProjectionPolicy::default();
        ProjectionPolicy {
            occurrence_tiebreak: self.occurrence_tiebreak.unwrap_or(d.occurrence_tiebreak),
            unaligned_styled_word: self.unaligned_styled_word.unwrap_or(d.unaligned_styled_word),
            merge_adjacent: self.merge_adjacent.unwrap_or(d.merge_adjacent),
        }
    }

    pub fn attention_params(&self) -> AttentionParams {
        let d = AttentionParams::default();
        AttentionParams {
            k: self.k.unwrap_or(d.k),
            threshold: self.threshold.unwrap_or(d.threshold),
            oov: self.oov.unwrap_or(d.oov),
        }
    }

    pub fn langs(&self) -> LangPair {
        let d = LangPair::default();
        LangPair {
            source: self.source_lang.clone().unwrap_or(d.source),
            target: self.target_lang.clone().unwrap_or(d.target),
        }
    }

    /// Checks that a method is selected and that every path it needs exists.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.methods.is_empty() {
            return Err(CliError::config("config", "no method selected; pass --method or set \"methods\""));
        }
        let need = |name: &str, p: &Option<PathBuf>| -> Result<(), CliError> {
            match p {
                None => Err(CliError::config("config", format!("missing {name}"))),
                Some(p) if !p.exists() => {
                    Err(CliError::config("missing_path", format!("{name} not found: {}", p.display())))
                }
                Some(_) => Ok(()),
            }
        };
        need("input", &self.input)?;
        if self.out.is_none() {
            return Err(CliError::config("config", "missing output path; pass --out"));
        }
        if self.methods.contains(&MethodKind::Attention) {
            need("lexicon", &self.lexicon)?;
            need("matrices", &self.matrices)?;
        }
        if self.methods.iter().any(|m| *m != MethodKind::Attention) {
            need("backends", &self.backends)?;
        }
        if let Some(dir) = &self.prompts_dir {
            need("prompts directory", &Some(dir.clone()))?;
        }
        if self.jobs == Some(0) {
            return Err(CliError::config("config", "--jobs must be at least 1"));
        }
        Ok(())
    }
}
