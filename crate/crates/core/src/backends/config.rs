use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BackendError, Completer, DictionaryTranslator, HttpCompleter, HttpTranslator, ReplayBackend, Translator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Nmt,
    Llm,
    MockReplay,
    MockDictionary,
}

fn default_timeout() -> u64 {
    30_000
}

fn default_in_flight() -> usize {
    4
}

/// One backend entry in a config file. For the mock kinds `endpoint` is a
/// fixture path, resolved relative to the config file.
///
/// `auth_env` names the environment variable holding the credential; the
/// value itself never appears in config files, logs or errors.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub name: String,
    pub kind: BackendKind,
    pub endpoint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default)]
    pub retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

impl std::fmt::Debug for BackendConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BackendConfig")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("endpoint", &self.endpoint)
            .field("auth_env", &self.auth_env)
            .field("timeout_ms", &self.timeout_ms)
            .field("retries", &self.retries)
            .field("template", &self.template)
            .field("max_in_flight", &self.max_in_flight)
            .finish()
    }
}

impl BackendConfig {
    pub fn new(name: impl Into<String>, kind: BackendKind, endpoint: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind,
            endpoint: endpoint.into(),
            auth_env: None,
            timeout_ms: default_timeout(),
            retries: 0,
            template: None,
            max_in_flight: default_in_flight(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let fail = |m: &str| Err(BackendError::Config(format!("backend {:?}: {m}", self.name)));
        if self.name.trim().is_empty() {
            return fail("name must be non-empty");
        }
        if self.endpoint.trim().is_empty() {
            return fail("endpoint must be non-empty");
        }
        if self.timeout_ms == 0 {
            return fail("timeout_ms must be positive");
        }
        if self.max_in_flight == 0 {
            return fail("max_in_flight must be positive");
        }
        if matches!(self.kind, BackendKind::Nmt | BackendKind::Llm)
            && !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://"))
        {
            return fail("endpoint must be an http(s) URL");
        }
        if let Some(var) = &self.auth_env {
            if var.is_empty() || var.contains('=') {
                return fail("auth_env must be an environment variable name");
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<BackendConfig>),
    One(BackendConfig),
}

/// Reads a config file holding one backend object or an array of them.
pub fn load_backend_configs(path: &Path) -> Result<Vec<BackendConfig>, BackendError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BackendError::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed: OneOrMany =
        serde_json::from_str(&text).map_err(|e| BackendError::Config(format!("bad config {}: {e}", path.display())))?;
    let mut configs = match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(c) => vec![c],
    };
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    for c in &mut configs {
        c.validate()?;
        if matches!(c.kind, BackendKind::MockReplay | BackendKind::MockDictionary) {
            let p = PathBuf::from(&c.endpoint);
            if p.is_relative() {
                c.endpoint = base.join(p).to_string_lossy().into_owned();
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for c in &configs {
        if !seen.insert(&c.name) {
            return Err(BackendError::Config(format!("duplicate backend name {:?}", c.name)));
        }
    }
    Ok(configs)
}

/// Named backends, instantiated from configs.
#[derive(Default, Clone)]
pub struct BackendRegistry {
    translators: BTreeMap<String, Arc<dyn Translator>>,
    completers: BTreeMap<String, Arc<dyn Completer>>,
}

impl BackendRegistry {
    pub fn from_configs(configs: &[BackendConfig]) -> Result<Self, BackendError> {
        let mut reg = Self::default();
        for c in configs {
            match c.kind {
                BackendKind::Nmt => reg.add_translator(&c.name, Arc::new(HttpTranslator::new(c.clone())?)),
                BackendKind::Llm => reg.add_completer(&c.name, Arc::new(HttpCompleter::new(c.clone())?)),
                BackendKind::MockDictionary => {
                    reg.add_translator(&c.name, Arc::new(DictionaryTranslator::from_path(Path::new(&c.endpoint))?))
                }
                BackendKind::MockReplay => {
                    let replay = Arc::new(ReplayBackend::from_path(Path::new(&c.endpoint))?);
                    reg.add_translator(&c.name, replay.clone());
                    reg.add_completer(&c.name, replay);
                }
            }
        }
        Ok(reg)
    }

    pub fn add_translator(&mut self, name: &str, t: Arc<dyn Translator>) {
        self.translators.insert(name.to_string(), t);
    }

    pub fn add_completer(&mut self, name: &str, c: Arc<dyn Completer>) {
        self.completers.insert(name.to_string(), c);
    }

    pub fn translator(&self, name: &str) -> Result<Arc<dyn Translator>, BackendError> {
        self.translators
            .get(name)
            .cloned()
            .ok_or_else(|| BackendError::Config(format!("no translation backend named {name:?}")))
    }

    pub fn completer(&self, name: &str) -> Result<Arc<dyn Completer>, BackendError> {
        self.completers
            .get(name)
            .cloned()
            .ok_or_else(|| BackendError::Config(format!("no completion backend named {name:?}")))
    }

    pub fn names(&self) -> Vec<String> {
        let mut all: Vec<String> = self.translators.keys().chain(self.completers.keys()).cloned().collect();
        all.sort();
        all.dedup();
        all
    }
}

impl std::fmt::Debug for BackendRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BackendRegistry")
            .field("translators", &self.translators.keys().collect::<Vec<_>>())
            .field("completers", &self.completers.keys().collect::<Vec<_>>())
            .finish()
    }
}
