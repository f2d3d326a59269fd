//! Serper-style search API wire format.

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::{IngestError, SearchHit};

pub const SERPER_ENDPOINT: &str = "https://google.serper.dev/search";
pub const API_KEY_ENV: &str = "SCKG_SEARCH_API_KEY";

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct SerperRequest<'a> {
    pub q: &'a str,
    pub num: u32,
    pub page: u32,
    pub gl: &'a str,
    pub hl: &'a str,
}

#[derive(Debug, Deserialize)]
struct SerperResponse {
    #[serde(default)]
    organic: Vec<SerperItem>,
}

#[derive(Debug, Deserialize)]
struct SerperItem {
    #[serde(default)]
    title: String,
    link: Option<String>,
    #[serde(default)]
    snippet: String,
    date: Option<String>,
    position: Option<u32>,
}

/// Parse one response page. Items without a link are skipped; ranks fall
/// back to response order when `position` is absent.
pub fn parse_response(body: &str, retrieved_at: DateTime<Utc>) -> Result<Vec<SearchHit>, IngestError> {
    let resp: SerperResponse =
        serde_json::from_str(body).map_err(|e| IngestError::InvalidInput(format!("search response: {e}")))?;
    let mut hits = Vec::with_capacity(resp.organic.len());
    for (i, item) in resp.organic.into_iter().enumerate() {
        let Some(link) = item.link.filter(|l| !l.trim().is_empty()) else {
            continue;
        };
        hits.push(SearchHit {
            title: item.title,
            snippet_text: item.snippet,
            source_url: link,
            published_at: item.date.as_deref().and_then(parse_date),
            retrieved_at,
            rank: item.position.filter(|&p| p > 0).unwrap_or(i as u32 + 1),
        });
    }
    // positions are absolute across pages; re-rank within the page
    hits.sort_by_key(|h| h.rank);
    for (i, h) in hits.iter_mut().enumerate() {
        h.rank = i as u32 + 1;
    }
    Ok(hits)
}

/// Best-effort parse of the engine's free-form date strings.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    const FORMATS: [&str; 5] = ["%Y-%m-%d", "%b %d, %Y", "%d %b %Y", "%Y/%m/%d", "%Y年%m月%d日"];
    FORMATS.iter().find_map(|f| NaiveDate::parse_from_str(s, f).ok())
}
