use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{html_to_text, FetchLedger, IngestError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FetchStatus {
    Success,
    HttpError { code: u16 },
    Blocked,
    Timeout,
    Unparsable,
}

/// Result of fetching one source page. `body_text` is present iff the status is success.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchOutcome {
    pub url: String,
    pub status: FetchStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_text: Option<String>,
    pub fetched_at: DateTime<Utc>,
}

impl FetchOutcome {
    pub fn failure(url: &str, status: FetchStatus, fetched_at: DateTime<Utc>) -> Self {
        debug_assert!(status != FetchStatus::Success);
        Self {
            url: url.to_string(),
            status,
            body_text: None,
            fetched_at,
        }
    }

    /// Build an outcome from a raw HTML body; an empty extraction is unparsable.
    pub fn from_html(url: &str, html: &str, fetched_at: DateTime<Utc>) -> Self {
        let text = html_to_text(html);
        if text.is_empty() {
            return Self::failure(url, FetchStatus::Unparsable, fetched_at);
        }
        Self {
            url: url.to_string(),
            status: FetchStatus::Success,
            body_text: Some(text),
            fetched_at,
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == FetchStatus::Success
    }
}

pub trait Fetcher: Send + Sync {
    fn fetch(&self, url: &url::Url) -> Result<FetchOutcome, IngestError>;
}

/// Fetch one URL and record the outcome. Transport failures come back as
/// statuses, not errors; only a malformed URL or a missing replay fixture
/// is an error.
pub fn fetch_fulltext(fetcher: &dyn Fetcher, url: &str, ledger: &FetchLedger) -> Result<FetchOutcome, IngestError> {
    let parsed = url::Url::parse(url).map_err(|_| IngestError::InvalidUrl(url.to_string()))?;
    if !matches!(parsed.scheme(), "http" | "https") || parsed.host_str().is_none() {
        return Err(IngestError::InvalidUrl(url.to_string()));
    }
    let outcome = fetcher.fetch(&parsed)?;
    ledger.record(&outcome.status);
    Ok(outcome)
}

/// File stem used for a URL's page fixture: first 16 hex digits of its SHA-256.
pub fn url_hash(url: &str) -> String {
    let digest = Sha256::digest(url.as_bytes());
    hex::encode(&digest[..8])
}

/// Sidecar status file stored next to a page fixture as `<hash>.status.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSidecar {
    pub url: String,
    pub status: FetchStatus,
    pub fetched_at: DateTime<Utc>,
}

/// Serves recorded pages from `<dir>/<url-hash>.html` plus `<url-hash>.status.json`.
#[derive(Debug, Clone)]
pub struct ReplayFetcher {
    dir: PathBuf,
}

impl ReplayFetcher {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn sidecar_path(&self, url: &str) -> PathBuf {
        self.dir.join(format!("{}.status.json", url_hash(url)))
    }

    pub fn page_path(&self, url: &str) -> PathBuf {
        self.dir.join(format!("{}.html", url_hash(url)))
    }

    fn read_sidecar(&self, path: &Path) -> Result<PageSidecar, IngestError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| IngestError::Fixture {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

impl Fetcher for ReplayFetcher {
    fn fetch(&self, url: &url::Url) -> Result<FetchOutcome, IngestError> {
        let url = url.as_str();
        let sidecar_path = self.sidecar_path(url);
        if !sidecar_path.exists() {
            return Err(IngestError::PageFixtureMissing(url.to_string()));
        }
        let sidecar = self.read_sidecar(&sidecar_path)?;
        if sidecar.status != FetchStatus::Success {
            return Ok(FetchOutcome::failure(url, sidecar.status, sidecar.fetched_at));
        }
        match fs::read(self.page_path(url)) {
            Ok(bytes) => match String::from_utf8(bytes) {
                Ok(html) => Ok(FetchOutcome::from_html(url, &html, sidecar.fetched_at)),
                Err(_) => Ok(FetchOutcome::failure(url, FetchStatus::Unparsable, sidecar.fetched_at)),
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Ok(FetchOutcome::failure(url, FetchStatus::Unparsable, sidecar.fetched_at))
            }
            Err(e) => Err(e.into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_fixture(dir: &Path, url: &str, status: FetchStatus, html: Option<&str>) {
        let f = ReplayFetcher::new(dir);
        let sidecar = PageSidecar {
            url: url.into(),
            status,
            fetched_at: "2024-05-02T00:00:00Z".parse().unwrap(),
        };
        fs::write(f.sidecar_path(url), serde_json::to_string(&sidecar).unwrap()).unwrap();
        if let Some(html) = html {
            fs::write(f.page_path(url), html).unwrap();
        }
    }

    #[test]
    fn success_strips_markup() {
        let dir = tempfile::tempdir().unwrap();
        let url = "https://example.com/a";
        write_fixture(dir.path(), url, FetchStatus::Success, Some("<p>hello <b>world</b></p>"));
        let ledger = FetchLedger::new();
        let out = fetch_fulltext(&ReplayFetcher::new(dir.path()), url, &ledger).unwrap();
        assert_eq!(out.status, FetchStatus::Success);
        assert_eq!(out.body_text.as_deref(), Some("hello world"));
        assert_eq!(ledger.snapshot().success, 1);
    }

    #[test]
    fn http_error_is_data() {
        let dir = tempfile::tempdir().unwrap();
        let url = "https://example.com/forbidden";
        write_fixture(dir.path(), url, FetchStatus::HttpError { code: 403 }, None);
        let ledger = FetchLedger::new();
        let out = fetch_fulltext(&ReplayFetcher::new(dir.path()), url, &ledger).unwrap();
        assert_eq!(out.status, FetchStatus::HttpError { code: 403 });
        assert!(out.body_text.is_none());
        let snap = ledger.snapshot();
        assert_eq!(snap.attempts, 1);
        assert_eq!(snap.success + snap.failures(), snap.attempts);
    }

    #[test]
    fn empty_page_is_unparsable() {
        let dir = tempfile::tempdir().unwrap();
        let url = "https://example.com/empty";
        write_fixture(dir.path(), url, FetchStatus::Success, Some("<script>x</script>"));
        let out = fetch_fulltext(&ReplayFetcher::new(dir.path()), url, &FetchLedger::new()).unwrap();
        assert_eq!(out.status, FetchStatus::Unparsable);
    }

    #[test]
    fn invalid_and_missing_urls() {
        let dir = tempfile::tempdir().unwrap();
        let f = ReplayFetcher::new(dir.path());
        let ledger = FetchLedger::new();
        assert!(matches!(fetch_fulltext(&f, "not a url", &ledger), Err(IngestError::InvalidUrl(_))));
        assert!(matches!(
            fetch_fulltext(&f, "https://nowhere.example/", &ledger),
            Err(IngestError::PageFixtureMissing(_))
        ));
        assert_eq!(ledger.snapshot().attempts, 0);
    }

    #[test]
    fn url_hash_is_stable() {
        assert_eq!(url_hash("https://example.com/a").len(), 16);
        assert_eq!(url_hash("https://example.com/a"), url_hash("https://example.com/a"));
        assert_ne!(url_hash("https://example.com/a"), url_hash("https://example.com/b"));
    }
}
