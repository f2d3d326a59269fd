use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::{IngestError, RequestLedger};

/// One retrieved search-result item with its retrieval metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetRecord {
    pub snippet_id: String,
    pub target_id: String,
    pub query: String,
    pub retrieved_at: DateTime<Utc>,
    pub title: String,
    pub snippet_text: String,
    pub source_url: String,
    #[serde(default)]
    pub published_at: Option<NaiveDate>,
    pub page: u32,
    /// 1-based rank within `page`.
    pub rank: u32,
    /// 1-based position across all pages of the query.
    pub position: u32,
}

/// A single hit as returned by a search backend, before ids are assigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub title: String,
    pub snippet_text: String,
    pub source_url: String,
    pub published_at: Option<NaiveDate>,
    pub retrieved_at: DateTime<Utc>,
    pub rank: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchRequest<'a> {
    pub target_id: &'a str,
    pub query: &'a str,
    pub page: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchCallError {
    /// Worth retrying (timeouts, 5xx, rate limiting).
    Transient(String),
    /// No recorded response exists for this target/query.
    FixtureMissing,
    Fatal(String),
}

pub trait SearchClient: Send + Sync {
    /// Fetch one result page. An empty vector means the engine has no more results.
    fn search(&self, request: &SearchRequest<'_>) -> Result<Vec<SearchHit>, SearchCallError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectOptions {
    pub page_size: u32,
    pub max_attempts: u32,
}

impl Default for CollectOptions {
    fn default() -> Self {
        Self {
            page_size: 10,
            max_attempts: 3,
        }
    }
}

/// Collect up to `top_n` rank-ordered snippets for one query, paging as needed.
///
/// Snippet ids are `{id_prefix}-{position:03}` so they are unique per
/// (target, template) prefix and independent of task scheduling.
pub fn collect_snippets(
    client: &dyn SearchClient,
    target_id: &str,
    query: &str,
    top_n: u32,
    id_prefix: &str,
    options: &CollectOptions,
    ledger: &RequestLedger,
) -> Result<Vec<SnippetRecord>, IngestError> {
    if top_n == 0 {
        return Err(IngestError::InvalidInput("top_n must be at least 1".into()));
    }
    if options.page_size == 0 || options.max_attempts == 0 {
        return Err(IngestError::InvalidInput("page_size and max_attempts must be positive".into()));
    }
    let mut out: Vec<SnippetRecord> = Vec::new();
    let mut page = 1u32;
    loop {
        let request = SearchRequest { target_id, query, page };
        let mut hits = call_with_retry(client, &request, options.max_attempts, ledger)?;
        let returned = hits.len();
        hits.sort_by_key(|h| h.rank);
        for hit in hits {
            if out.len() as u32 >= top_n {
                break;
            }
            let position = out.len() as u32 + 1;
            out.push(SnippetRecord {
                snippet_id: format!("{id_prefix}-{position:03}"),
                target_id: target_id.to_string(),
                query: query.to_string(),
                retrieved_at: hit.retrieved_at,
                title: hit.title,
                snippet_text: hit.snippet_text,
                source_url: hit.source_url,
                published_at: hit.published_at,
                page,
                rank: hit.rank,
                position,
            });
        }
        if out.len() as u32 >= top_n || (returned as u32) < options.page_size {
            break;
        }
        page += 1;
    }
    Ok(out)
}

fn call_with_retry(
    client: &dyn SearchClient,
    request: &SearchRequest<'_>,
    max_attempts: u32,
    ledger: &RequestLedger,
) -> Result<Vec<SearchHit>, IngestError> {
    let mut attempts = 0;
    loop {
        attempts += 1;
        match client.search(request) {
            Ok(hits) => {
                ledger.record(true);
                return Ok(hits);
            }
            Err(SearchCallError::FixtureMissing) => {
                return Err(IngestError::FixtureMissing {
                    target_id: request.target_id.to_string(),
                    query: request.query.to_string(),
                });
            }
            Err(SearchCallError::Transient(message)) => {
                ledger.record(false);
                if attempts >= max_attempts {
                    return Err(IngestError::Retryable { attempts, message });
                }
            }
            Err(SearchCallError::Fatal(message)) => {
                ledger.record(false);
                return Err(IngestError::Retryable { attempts, message });
            }
        }
    }
}

/// One line of a replay fixture: a snippet record without its id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureHit {
    pub target_id: String,
    pub query: String,
    pub retrieved_at: DateTime<Utc>,
    pub title: String,
    pub snippet_text: String,
    pub source_url: String,
    #[serde(default)]
    pub published_at: Option<NaiveDate>,
    pub page: u32,
    pub rank: u32,
}

type PageKey = (String, String, u32);

/// Serves search pages from recorded JSONL fixtures keyed by (target, query, page).
#[derive(Debug, Default, Clone)]
pub struct ReplayClient {
    pages: BTreeMap<PageKey, Vec<SearchHit>>,
}

impl ReplayClient {
    /// Load every `*.jsonl` file in `dir`, in file-name order.
    pub fn from_dir(dir: &Path) -> Result<Self, IngestError> {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        let mut client = Self::default();
        for path in files {
            let text = fs::read_to_string(&path)?;
            client.add_jsonl(&text, &path)?;
        }
        Ok(client)
    }

    pub fn from_jsonl_str(text: &str) -> Result<Self, IngestError> {
        let mut client = Self::default();
        client.add_jsonl(text, Path::new("<memory>"))?;
        Ok(client)
    }

    fn add_jsonl(&mut self, text: &str, path: &Path) -> Result<(), IngestError> {
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| IngestError::Fixture {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let hit: FixtureHit = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            if hit.page == 0 || hit.rank == 0 {
                return Err(err("page and rank must be >= 1".into()));
            }
            if hit.source_url.trim().is_empty() {
                return Err(err("source_url is empty".into()));
            }
            if hit.target_id.is_empty() {
                return Err(err("target_id is empty".into()));
            }
            self.insert(hit);
        }
        Ok(())
    }

    pub fn insert(&mut self, hit: FixtureHit) {
        let key = (hit.target_id, hit.query, hit.page);
        self.pages.entry(key).or_default().push(SearchHit {
            title: hit.title,
            snippet_text: hit.snippet_text,
            source_url: hit.source_url,
            published_at: hit.published_at,
            retrieved_at: hit.retrieved_at,
            rank: hit.rank,
        });
    }

    pub fn has_query(&self, target_id: &str, query: &str) -> bool {
        self.pages
            .range((target_id.to_string(), query.to_string(), 0)..)
            .next()
            .is_some_and(|((t, q, _), _)| t == target_id && q == query)
    }

    /// Number of requests a collection of `top_n` items would issue for this query.
    pub fn expected_requests(&self, target_id: &str, query: &str, top_n: u32, page_size: u32) -> u64 {
        let mut requests = 0;
        let mut collected = 0u32;
        let mut page = 1;
        loop {
            requests += 1;
            let n = self
                .pages
                .get(&(target_id.to_string(), query.to_string(), page))
                .map_or(0, |p| p.len() as u32);
            collected += n;
            if collected >= top_n || n < page_size {
                return requests;
            }
            page += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.pages.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }
}

impl SearchClient for ReplayClient {
    fn search(&self, request: &SearchRequest<'_>) -> Result<Vec<SearchHit>, SearchCallError> {
        let key = (request.target_id.to_string(), request.query.to_string(), request.page);
        match self.pages.get(&key) {
            Some(hits) => Ok(hits.clone()),
            None if self.has_query(request.target_id, request.query) => Ok(Vec::new()),
            None => Err(SearchCallError::FixtureMissing),
        }
    }
}
