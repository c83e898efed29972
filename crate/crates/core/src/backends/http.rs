use std::sync::{Condvar, Mutex};
use std::time::Duration;

use reqwest::blocking::{Client, RequestBuilder};
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{BackendConfig, BackendError, Completer, CompletionRequest, TranslationRequest, Translator};

const MAX_BACKOFF: Duration = Duration::from_secs(5);

/// Counting gate bounding in-flight requests per backend.
#[derive(Debug)]
struct Gate {
    limit: usize,
    busy: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(limit: usize) -> Self {
        Self { limit: limit.max(1), busy: Mutex::new(0), freed: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut busy = self.busy.lock().unwrap_or_else(|p| p.into_inner());
        while *busy >= self.limit {
            busy = self.freed.wait(busy).unwrap_or_else(|p| p.into_inner());
        }
        *busy += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut busy = self.0.busy.lock().unwrap_or_else(|p| p.into_inner());
        *busy -= 1;
        self.0.freed.notify_one();
    }
}

/// Shared HTTP plumbing: credentials by environment variable, bounded
/// concurrency, and retries with exponential backoff. Auth failures are not
/// retried.
#[derive(Debug)]
struct HttpCore {
    config: BackendConfig,
    client: Client,
    gate: Gate,
    backoff: Duration,
}

enum Auth<'a> {
    Header(&'a str),
    Bearer,
}

impl HttpCore {
    fn new(config: BackendConfig) -> Result<Self, BackendError> {
        config.validate()?;
        let client = Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| BackendError::Config(format!("cannot build HTTP client: {e}")))?;
        let gate = Gate::new(config.max_in_flight);
        Ok(Self { config, client, gate, backoff: Duration::from_millis(100) })
    }

    fn credential(&self) -> Result<Option<String>, BackendError> {
        match &self.config.auth_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| BackendError::Auth(format!("environment variable {var} is not set"))),
        }
    }

    fn send(&self, auth: Auth<'_>, build: impl Fn(&Client) -> RequestBuilder) -> Result<Value, BackendError> {
        let secret = self.credential()?;
        let _permit = self.gate.acquire();
        let attempts = self.config.retries + 1;
        let mut last = BackendError::Transport { attempts: 0, message: "no attempt made".into() };
        for attempt in 1..=attempts {
            if attempt > 1 {
                let wait = self.backoff.saturating_mul(1 << (attempt - 2).min(16)).min(MAX_BACKOFF);
                std::thread::sleep(wait);
            }
            let mut rb = build(&self.client);
            if let Some(secret) = &secret {
                rb = match auth {
                    Auth::Header(name) => rb.header(name, secret),
                    Auth::Bearer => rb.bearer_auth(secret),
                };
            }
            match rb.send() {
                Err(e) => {
                    // reqwest errors carry the URL, never headers
                    last = BackendError::Transport { attempts: attempt, message: e.without_url().to_string() };
                }
                Ok(resp) => {
                    let status = resp.status();
                    let body = resp.text().unwrap_or_default();
                    if status.is_success() {
                        return serde_json::from_str(&body).map_err(|e| BackendError::Remote {
                            status: status.as_u16(),
                            body: format!("unparseable response: {e}"),
                        });
                    }
                    if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
                        return Err(BackendError::Auth(format!(
                            "{} rejected credentials ({status})",
                            self.config.name
                        )));
                    }
                    let err = BackendError::Remote { status: status.as_u16(), body: truncate(&body, 500) };
                    if !(status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS) {
                        return Err(err);
                    }
                    last = err;
                }
            }
        }
        Err(last)
    }
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((cut, _)) => format!("{}…", &s[..cut]),
        None => s.to_string(),
    }
}

fn malformed(what: &str) -> BackendError {
    BackendError::Remote { status: 200, body: format!("response missing {what}") }
}

/// Neural MT over HTTP.
///
/// Templates: `ms-translator-v3` (default; HTML text type when markup must
/// survive) and `json` (`{"text", "source_lang", "target_lang",
/// "preserve_markup"}` in, `{"translation"}` out).
#[derive(Debug)]
pub struct HttpTranslator {
    core: HttpCore,
}

impl HttpTranslator {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        let core = HttpCore::new(config)?;
        match core.config.template.as_deref().unwrap_or("ms-translator-v3") {
            "ms-translator-v3" | "json" => Ok(Self { core }),
            other => Err(BackendError::Config(format!("unknown translation template {other:?}"))),
        }
    }

    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.core.backoff = base;
        self
    }
}

impl Translator for HttpTranslator {
    fn translate(&self, req: &TranslationRequest) -> Result<String, BackendError> {
        req.validate()?;
        let endpoint = &self.core.config.endpoint;
        match self.core.config.template.as_deref().unwrap_or("ms-translator-v3") {
            "json" => {
                let v = self.core.send(Auth::Bearer, |c| c.post(endpoint).json(req))?;
                v.get("translation").and_then(Value::as_str).map(str::to_string).ok_or_else(|| malformed("translation"))
            }
            _ => {
                let text_type = if req.preserve_markup { "html" } else { "plain" };
                let v = self.core.send(Auth::Header("Ocp-Apim-Subscription-Key"), |c| {
                    c.post(endpoint)
                        .query(&[
                            ("api-version", "3.0"),
                            ("from", req.source_lang.as_str()),
                            ("to", req.target_lang.as_str()),
                            ("textType", text_type),
                        ])
                        .json(&json!([{ "Text": req.body }]))
                })?;
                v.pointer("/0/translations/0/text")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| malformed("translations[0].text"))
            }
        }
    }
}

/// Chat completion over HTTP.
///
/// Templates: `openai-chat[:model]` (bearer token, default) and
/// `azure-openai-chat` (`api-key` header; the deployment is part of the URL).
#[derive(Debug)]
pub struct HttpCompleter {
    core: HttpCore,
    model: Option<String>,
    azure: bool,
}

impl HttpCompleter {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        let core = HttpCore::new(config)?;
        let template = core.config.template.clone().unwrap_or_else(|| "openai-chat".into());
        let (name, model) = match template.split_once(':') {
            Some((n, m)) => (n.to_string(), Some(m.to_string())),
            None => (template, None),
        };
        let azure = match name.as_str() {
            "openai-chat" => false,
            "azure-openai-chat" => true,
            other => return Err(BackendError::Config(format!("unknown completion template {other:?}"))),
        };
        Ok(Self { core, model, azure })
    }

    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.core.backoff = base;
        self
    }
}

impl Completer for HttpCompleter {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        req.validate()?;
        let mut body = json!({
            "messages": [
                { "role": "system", "content": req.system_prompt },
                { "role": "user", "content": req.user_prompt },
            ],
            "max_tokens": req.max_output_tokens,
        });
        if let Some(model) = &self.model {
            body["model"] = json!(model);
        }
        let auth = if self.azure { Auth::Header("api-key") } else { Auth::Bearer };
        let endpoint = &self.core.config.endpoint;
        let v = self.core.send(auth, |c| c.post(endpoint).json(&body))?;
        let text = v
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| malformed("choices[0].message.content"))?;
        if text.trim().is_empty() {
            return Err(BackendError::EmptyCompletion);
        }
        Ok(text.to_string())
    }
}
