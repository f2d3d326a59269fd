//! Query generation, snippet collection, full-text fetching and chunking.
//!
//! Search and fetch both go through small traits ([`SearchClient`],
//! [`Fetcher`]) so the same collection code runs against recorded fixtures
//! or a live backend. Every call made through them is counted in a shared
//! ledger with atomic counters.

mod chunk;
mod fetch;
mod html;
mod ledger;
mod query;
pub mod robots;
mod search;
pub mod serper;
mod targets;

pub use chunk::{chunk_document, reconstruct, Chunk, SourcedChunk};
pub use fetch::{fetch_fulltext, url_hash, FetchOutcome, FetchStatus, Fetcher, PageSidecar, ReplayFetcher};
pub use html::html_to_text;
pub use ledger::{FetchLedger, FetchLedgerSnapshot, RequestLedger};
pub use query::{build_queries, QueryTemplate, TemplateSet, PLACEHOLDER};
pub use search::{
    collect_snippets, CollectOptions, FixtureHit, ReplayClient, SearchCallError, SearchClient, SearchHit,
    SearchRequest, SnippetRecord,
};
pub use targets::{load_targets, parse_flag as targets_flag, parse_targets, Target};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no replay fixture for target `{target_id}` and query `{query}`")]
    FixtureMissing { target_id: String, query: String },
    #[error("no page fixture for url `{0}`")]
    PageFixtureMissing(String),
    #[error("search failed after {attempts} attempt(s): {message}")]
    Retryable { attempts: u32, message: String },
    #[error("{path}:{line}: {message}")]
    Fixture { path: PathBuf, line: usize, message: String },
    #[error("invalid url `{0}`")]
    InvalidUrl(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
