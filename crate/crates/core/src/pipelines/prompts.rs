use std::path::Path;

use crate::backends::BackendError;

/// Prompt texts used by the LLM-driven methods. Placeholders are `{source}`,
/// `{target}` and `{unigrams}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub llm_system: String,
    pub llm_numbered_system: String,
    pub llm_user: String,
    pub hybrid_system: String,
    pub hybrid_user: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            llm_system: include_str!("../../prompts/llm_delimiters_system.txt").into(),
            llm_numbered_system: include_str!("../../prompts/llm_numbered_delimiters_system.txt").into(),
            llm_user: include_str!("../../prompts/llm_delimiters_user.txt").into(),
            hybrid_system: include_str!("../../prompts/hybrid_system.txt").into(),
            hybrid_user: include_str!("../../prompts/hybrid_user.txt").into(),
        }
    }
}

impl PromptSet {
    /// Loads overrides from a directory; files that are absent keep the built-in text.
    pub fn from_dir(dir: &Path) -> Result<Self, BackendError> {
        let mut set = Self::default();
        let slots: [(&str, &mut String); 5] = [
            ("llm_delimiters_system.txt", &mut set.llm_system),
            ("llm_numbered_delimiters_system.txt", &mut set.llm_numbered_system),
            ("llm_delimiters_user.txt", &mut set.llm_user),
            ("hybrid_system.txt", &mut set.hybrid_system),
            ("hybrid_user.txt", &mut set.hybrid_user),
        ];
        for (file, slot) in slots {
            let path = dir.join(file);
            if path.exists() {
                *slot = std::fs::read_to_string(&path)
                    .map_err(|e| BackendError::Config(format!("cannot read prompt {}: {e}", path.display())))?;
            }
        }
        Ok(set)
    }
}

/// Single-pass substitution, so placeholder-looking text inside a value is
/// left alone.
pub(crate) fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    'outer: while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open..];
        for (name, value) in vars {
            if let Some(tail) =
                after.strip_prefix('{').and_then(|t| t.strip_prefix(name)).and_then(|t| t.strip_prefix('}'))
            {
                out.push_str(value);
                rest = tail;
                continue 'outer;
            }
        }
        out.push('{');
        rest = &after[1..];
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        assert_eq!(fill("A {x} B {y} {z}", &[("x", "{y}"), ("y", "2")]), "A {y} B 2 {z}");
    }

    #[test]
    fn builtin_prompts_have_no_trailing_newline() {
        let p = PromptSet::default();
        assert!(p.hybrid_user.ends_with("{unigrams}"));
        assert!(p.llm_system.starts_with("You are efficient in language translation."));
        assert!(p.hybrid_system.starts_with("You are an expert in multiple languages."));
    }

    #[test]
    fn overrides_from_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("hybrid_system.txt"), "custom").unwrap();
        let p = PromptSet::from_dir(dir.path()).unwrap();
        assert_eq!(p.hybrid_system, "custom");
        assert_eq!(p.llm_system, PromptSet::default().llm_system);
    }
}
