mod commands;
mod error;
mod run_config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use stylemt::align::OovPolicy;
use stylemt::pipelines::{MethodKind, OccurrenceTiebreak, UnalignedStyledWord};

/// Style-preserving translation runs, alignment and evaluation.
#[derive(Debug, Parser)]
#[command(name = "stylemt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Translate styled documents with one or more methods and write a result file.
    TranslateStyled(Box<TranslateArgs>),
    /// Align the styled words of one sentence through an attention matrix.
    Align(AlignArgs),
    /// Score result files against gold styling.
    Evaluate(EvaluateArgs),
    /// Render the per-sentence comparison table across methods.
    Compare(CompareArgs),
    /// Evaluate the attention method over a range of similarity thresholds.
    Sweep(SweepArgs),
}

/// Parses a snake_case name the way the JSON configs spell it.
fn json_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|_| format!("unknown value {s:?}"))
}

#[derive(Debug, Clone, Args)]
pub struct AttentionFlags {
    /// Candidates per styled source word [default: 3]
    #[arg(long)]
    pub k: Option<usize>,
    /// Similarity a candidate must exceed, in [-1, 1] [default: 0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Missing lexicon words: permissive keeps the candidate, strict drops it [default: permissive]
    #[arg(long, value_parser = json_enum::<OovPolicy>)]
    pub oov: Option<OovPolicy>,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// JSON run config; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated methods: attention, nmt_tags, llm_delimiters, hybrid
    #[arg(long, value_delimiter = ',', value_parser = |s: &str| s.parse::<MethodKind>())]
    pub method: Vec<MethodKind>,
    /// Documents: a JSON array of styled texts (with optional "id") or gold records
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Backend config file
    #[arg(long)]
    pub backends: Option<PathBuf>,
    /// Translator backend name [default: nmt]
    #[arg(long)]
    pub translator: Option<String>,
    /// Completer backend name [default: llm]
    #[arg(long)]
    pub completer: Option<String>,
    /// Attention matrices, one per document (attention method)
    #[arg(long)]
    pub matrices: Option<PathBuf>,
    /// Word-vector lexicon (attention method)
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[command(flatten)]
    pub attention: AttentionFlags,
    /// Repeated target words: relative_position, last_occurrence, first_occurrence
    #[arg(long, value_parser = json_enum::<OccurrenceTiebreak>)]
    pub tiebreak: Option<OccurrenceTiebreak>,
    /// Styled words with no alignment: drop or warn_drop
    #[arg(long, value_parser = json_enum::<UnalignedStyledWord>)]
    pub unaligned: Option<UnalignedStyledWord>,
    /// Merge adjacent runs of a style across source spans [default: true]
    #[arg(long)]
    pub merge_adjacent: Option<bool>,
    #[arg(long)]
    pub source_lang: Option<String>,
    #[arg(long)]
    pub target_lang: Option<String>,
    #[arg(long)]
    pub max_output_tokens: Option<u32>,
    /// Directory overriding the built-in prompt templates
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    /// Result file to write
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run metadata (timings, run id) file
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Sentences in flight at once [default: 4]
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Attention matrix JSON: one matrix, or an array (see --index)
    #[arg(long)]
    pub matrix: PathBuf,
    /// Which matrix of an array file
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Comma-separated styled source indices [default: every source token]
    #[arg(long, value_delimiter = ',')]
    pub styled: Option<Vec<usize>>,
    #[command(flatten)]
    pub attention: AttentionFlags,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub gold: PathBuf,
    /// Result files written by translate-styled
    #[arg(long, num_args = 1.., required = true)]
    pub results: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub results: Vec<PathBuf>,
    /// text or csv
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub gold: PathBuf,
    /// Attention matrices, one per gold record
    #[arg(long)]
    pub matrices: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_parser = json_enum::<OovPolicy>, default_value = "permissive")]
    pub oov: OovPolicy,
    /// Threshold range START:END:STEP, both ends included
    #[arg(long, allow_hyphen_values = true, conflicts_with = "thresholds")]
    pub sweep: Option<String>,
    /// Explicit comma-separated thresholds
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::TranslateStyled(a) => commands::translate_styled(*a),
        Command::Align(a) => commands::align(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code)
        }
    }
}
