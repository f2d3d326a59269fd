//! Network clients for live mode: search API, page fetcher and chat backend.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::Utc;
use reqwest::blocking::Client;

use super::{LiveSettings, PipelineError};
use crate::extract::chat::{parse_chat_response, ChatRequest, API_KEY_ENV as LLM_KEY_ENV, ENDPOINT_ENV};
use crate::extract::{BackendError, ExtractionBackend, ExtractionPrompt};
use crate::ingest::robots::RobotsRules;
use crate::ingest::serper::{parse_response, SerperRequest, API_KEY_ENV as SEARCH_KEY_ENV, SERPER_ENDPOINT};
use crate::ingest::{
    FetchOutcome, FetchStatus, Fetcher, IngestError, SearchCallError, SearchClient, SearchHit,
    SearchRequest,
};

fn env_var(name: &str) -> Result<String, PipelineError> {
    std::env::var(name)
        .ok()
        .filter(|v| !v.trim().is_empty())
        .ok_or_else(|| PipelineError::Config(format!("live mode needs ${name}")))
}

fn client(settings: &LiveSettings) -> Result<Client, PipelineError> {
    Client::builder()
        .timeout(Duration::from_secs(settings.timeout_secs))
        .user_agent(settings.user_agent.clone())
        .build()
        .map_err(|e| PipelineError::Config(format!("http client: {e}")))
}

pub struct SerperClient {
    http: Client,
    api_key: String,
    page_size: u32,
}

impl SerperClient {
    pub fn from_env(settings: &LiveSettings, page_size: u32) -> Result<Self, PipelineError> {
        Ok(Self {
            http: client(settings)?,
            api_key: env_var(SEARCH_KEY_ENV)?,
            page_size,
        })
    }
}

impl SearchClient for SerperClient {
    fn search(&self, request: &SearchRequest<'_>) -> Result<Vec<SearchHit>, SearchCallError> {
        let body = SerperRequest {
            q: request.query,
            num: self.page_size,
            page: request.page,
            gl: "cn",
            hl: "zh-cn",
        };
        let resp = self
            .http
            .post(SERPER_ENDPOINT)
            .header("X-API-KEY", &self.api_key)
            .json(&body)
            .send()
            .map_err(|e| SearchCallError::Transient(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| SearchCallError::Transient(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(SearchCallError::Transient(format!("http {status}")));
        }
        if !status.is_success() {
            return Err(SearchCallError::Fatal(format!("http {status}")));
        }
        parse_response(&text, Utc::now()).map_err(|e| SearchCallError::Fatal(e.to_string()))
    }
}

/// Page fetcher honouring robots.txt and a minimum per-domain spacing.
pub struct HttpFetcher {
    http: Client,
    agent: String,
    interval: Duration,
    robots: Mutex<BTreeMap<String, RobotsRules>>,
    last_hit: Mutex<BTreeMap<String, Instant>>,
}

impl HttpFetcher {
    pub fn new(settings: &LiveSettings) -> Result<Self, PipelineError> {
        Ok(Self {
            http: client(settings)?,
            agent: settings.user_agent.clone(),
            interval: Duration::from_millis(settings.domain_interval_ms),
            robots: Mutex::new(BTreeMap::new()),
            last_hit: Mutex::new(BTreeMap::new()),
        })
    }

    fn origin(url: &url::Url) -> String {
        url.origin().ascii_serialization()
    }

    fn rules(&self, url: &url::Url) -> RobotsRules {
        let origin = Self::origin(url);
        if let Some(r) = self.robots.lock().expect("robots cache").get(&origin) {
            return r.clone();
        }
        let text = self
            .http
            .get(format!("{origin}/robots.txt"))
            .send()
            .ok()
            .filter(|r| r.status().is_success())
            .and_then(|r| r.text().ok())
            .unwrap_or_default();
        let rules = RobotsRules::parse(&text, &self.agent);
        self.robots.lock().expect("robots cache").insert(origin, rules.clone());
        rules
    }

    fn wait_turn(&self, url: &url::Url) {
        let host = url.host_str().unwrap_or_default().to_string();
        loop {
            let mut last = self.last_hit.lock().expect("rate table");
            let now = Instant::now();
            match last.get(&host) {
                Some(&t) if now.duration_since(t) < self.interval => {
                    let wait = self.interval - now.duration_since(t);
                    drop(last);
                    std::thread::sleep(wait);
                }
                _ => {
                    last.insert(host, now);
                    return;
                }
            }
        }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, url: &url::Url) -> Result<FetchOutcome, IngestError> {
        let now = Utc::now();
        let path = match url.query() {
            Some(q) => format!("{}?{q}", url.path()),
            None => url.path().to_string(),
        };
        if !self.rules(url).is_allowed(&path) {
            return Ok(FetchOutcome::failure(url.as_str(), FetchStatus::Blocked, now));
        }
        self.wait_turn(url);
        let resp = match self.http.get(url.as_str()).send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Ok(FetchOutcome::failure(url.as_str(), FetchStatus::Timeout, now)),
            Err(_) => return Ok(FetchOutcome::failure(url.as_str(), FetchStatus::Unparsable, now)),
        };
        let code = resp.status().as_u16();
        if !resp.status().is_success() {
            return Ok(FetchOutcome::failure(url.as_str(), FetchStatus::HttpError { code }, now));
        }
        match resp.text() {
            Ok(body) => Ok(FetchOutcome::from_html(url.as_str(), &body, now)),
            Err(e) if e.is_timeout() => Ok(FetchOutcome::failure(url.as_str(), FetchStatus::Timeout, now)),
            Err(_) => Ok(FetchOutcome::failure(url.as_str(), FetchStatus::Unparsable, now)),
        }
    }
}

/// OpenAI-compatible chat-completion backend.
pub struct ChatBackend {
    http: Client,
    endpoint: String,
    api_key: String,
    model: String,
    audit_dir: Option<PathBuf>,
    seq: AtomicU64,
}

impl ChatBackend {
    pub fn from_env(settings: &LiveSettings) -> Result<Self, PipelineError> {
        if let Some(dir) = &settings.audit_dir {
            fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        }
        Ok(Self {
            http: client(settings)?,
            endpoint: env_var(ENDPOINT_ENV)?,
            api_key: env_var(LLM_KEY_ENV)?,
            model: settings.model.clone(),
            audit_dir: settings.audit_dir.clone(),
            seq: AtomicU64::new(0),
        })
    }

    fn audit(&self, request: &ChatRequest, response: &str) {
        let Some(dir) = &self.audit_dir else { return };
        let n = self.seq.fetch_add(1, Ordering::Relaxed);
        let record = serde_json::json!({ "request": request, "response": response });
        let path = dir.join(format!("call-{n:06}.json"));
        if let Err(e) = fs::write(&path, record.to_string()) {
            log::warn!("audit log {}: {e}", path.display());
        }
    }
}

impl ExtractionBackend for ChatBackend {
    fn complete(&self, prompt: &ExtractionPrompt) -> Result<String, BackendError> {
        let request = ChatRequest::from_prompt(&self.model, prompt);
        let resp = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&request)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    BackendError::Timeout
                } else {
                    BackendError::Unavailable(e.to_string())
                }
            })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| BackendError::Unavailable(e.to_string()))?;
        self.audit(&request, &body);
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(BackendError::Unavailable(format!("http {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Failed(format!("http {status}")));
        }
        parse_chat_response(&body)
    }
}
