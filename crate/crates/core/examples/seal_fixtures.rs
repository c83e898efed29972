//! Regenerates the offline fixtures next to a corpus file.
//!
//! cargo run -p stylemt --example seal_fixtures -- crates/core/fixtures/sample10/corpus.json

use std::path::PathBuf;
use std::process::ExitCode;

use stylemt::evalkit::{load_corpus, seal_corpus};
use stylemt::pipelines::MethodOptions;

fn main() -> ExitCode {
    let corpus = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample10/corpus.json"));
    let dir = corpus.parent().map(PathBuf::from).unwrap_or_default();
    let sealed = match load_corpus(&corpus).and_then(|entries| seal_corpus(&entries, &MethodOptions::default())) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            return ExitCode::from(2);
        }
    };
    if let Err(e) = sealed.write(&dir) {
        eprintln!("error: io: {e}");
        return ExitCode::from(1);
    }
    for (name, _) in sealed.files() {
        println!("wrote {}", dir.join(name).display());
    }
    ExitCode::SUCCESS
}
