use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_json, thread_pool, to_jsonl, write_file, write_json, Arm, Layout, Mode, PipelineConfig, PipelineError, Resources};
use crate::ingest::{
    chunk_document, collect_snippets, fetch_fulltext, url_hash, CollectOptions, FetchLedger, FetchLedgerSnapshot,
    FetchStatus, Fetcher, IngestError, ReplayClient, ReplayFetcher, RequestLedger, SearchClient, SnippetRecord,
    SourcedChunk, Target,
};

/// One completed (target, template) collection task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub target_id: String,
    pub template_id: String,
    pub query: String,
    pub requests: u64,
    pub failed_requests: u64,
    pub snippets: u64,
    pub fulltext: bool,
    pub fetch: FetchLedgerSnapshot,
    pub chunks: u64,
}

/// Fetch outcome without the page body, as listed in `fetches.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchRecord {
    pub snippet_id: String,
    pub url: String,
    pub status: FetchStatus,
    pub fetched_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_chars: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PairOutput {
    snippets: Vec<SnippetRecord>,
    fetches: Vec<FetchRecord>,
    chunks: Vec<SourcedChunk>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestLedger {
    pub pairs: u64,
    pub requests: u64,
    pub failed_requests: u64,
    pub snippets: u64,
    pub fetch: FetchLedgerSnapshot,
    pub chunks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub ledger: IngestLedger,
    /// Tasks run in this invocation (the rest were already in the manifest).
    pub ran: usize,
    pub skipped: usize,
}

fn pair_file_stem(target_id: &str, template_id: &str) -> String {
    let safe = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect()
    };
    format!(
        "{}__{}__{}",
        safe(target_id),
        safe(template_id),
        &url_hash(&format!("{target_id}\u{0}{template_id}"))[..8]
    )
}

/// Manifest lines in file order. A torn final line from an interrupted run
/// is ignored.
fn load_manifest(layout: &Layout) -> Result<Vec<ManifestEntry>, PipelineError> {
    let path = layout.manifest();
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(PipelineError::io(&path, e)),
    };
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str(line) {
            Ok(entry) => out.push(entry),
            Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => log::warn!("ignoring torn manifest line"),
            Err(e) => return Err(PipelineError::data(&path, format!("line {}: {e}", i + 1))),
        }
    }
    Ok(out)
}

/// Latest manifest entry per (target, template).
fn latest(entries: Vec<ManifestEntry>) -> BTreeMap<(String, String), ManifestEntry> {
    entries
        .into_iter()
        .map(|e| ((e.target_id.clone(), e.template_id.clone()), e))
        .collect()
}

struct Clients {
    search: Box<dyn SearchClient>,
    fetcher: Option<Box<dyn Fetcher>>,
}

fn clients(cfg: &PipelineConfig) -> Result<Clients, PipelineError> {
    let want_fetch = cfg.arm.includes(Arm::Fulltext);
    match cfg.mode {
        Mode::Replay => {
            let replay = cfg.replay.as_ref().expect("validated");
            let search = ReplayClient::from_dir(&replay.search_dir).map_err(|e| match e {
                IngestError::Io(io) => PipelineError::missing(&replay.search_dir, io),
                other => PipelineError::data(&replay.search_dir, other),
            })?;
            let fetcher: Option<Box<dyn Fetcher>> = match (&replay.pages_dir, want_fetch) {
                (Some(dir), true) => {
                    if !dir.is_dir() {
                        return Err(PipelineError::missing(dir, "page fixture directory not found"));
                    }
                    Some(Box::new(ReplayFetcher::new(dir)))
                }
                _ => None,
            };
            Ok(Clients {
                search: Box::new(search),
                fetcher,
            })
        }
        Mode::Live => live_clients(cfg, want_fetch),
    }
}

#[cfg(feature = "live")]
fn live_clients(cfg: &PipelineConfig, want_fetch: bool) -> Result<Clients, PipelineError> {
    let settings = cfg.live.clone().unwrap_or_default();
    let search = super::live::SerperClient::from_env(&settings, cfg.page_size)?;
    let fetcher: Option<Box<dyn Fetcher>> = if want_fetch {
        Some(Box::new(super::live::HttpFetcher::new(&settings)?))
    } else {
        None
    };
    Ok(Clients {
        search: Box::new(search),
        fetcher,
    })
}

#[cfg(not(feature = "live"))]
fn live_clients(_cfg: &PipelineConfig, _want_fetch: bool) -> Result<Clients, PipelineError> {
    Err(PipelineError::Config("live mode needs a build with the `live` feature".into()))
}

enum TaskError {
    Missing(String),
    Backend(String),
    Other(PipelineError),
}

impl From<PipelineError> for TaskError {
    fn from(e: PipelineError) -> Self {
        TaskError::Other(e)
    }
}

fn classify(e: IngestError) -> TaskError {
    match e {
        IngestError::FixtureMissing { .. } | IngestError::PageFixtureMissing(_) => TaskError::Missing(e.to_string()),
        IngestError::Retryable { .. } => TaskError::Backend(e.to_string()),
        other => TaskError::Other(PipelineError::Data {
            path: Default::default(),
            message: other.to_string(),
        }),
    }
}

struct Task<'a> {
    target: &'a Target,
    template_id: &'a str,
    query: String,
}

fn run_task(
    task: &Task<'_>,
    cfg: &PipelineConfig,
    clients: &Clients,
    layout: &Layout,
    manifest: &Mutex<fs::File>,
) -> Result<ManifestEntry, TaskError> {
    let requests = RequestLedger::new();
    let options = CollectOptions {
        page_size: cfg.page_size,
        max_attempts: cfg.max_attempts,
    };
    let prefix = format!("{}-{}", task.target.id, task.template_id);
    let snippets = collect_snippets(
        clients.search.as_ref(),
        &task.target.id,
        &task.query,
        cfg.top_n,
        &prefix,
        &options,
        &requests,
    )
    .map_err(classify)?;

    let fetch_ledger = FetchLedger::new();
    let mut fetches = Vec::new();
    let mut chunks = Vec::new();
    if let Some(fetcher) = &clients.fetcher {
        for s in &snippets {
            let outcome = match fetch_fulltext(fetcher.as_ref(), &s.source_url, &fetch_ledger) {
                Ok(o) => o,
                Err(IngestError::InvalidUrl(url)) => {
                    let status = FetchStatus::Unparsable;
                    fetch_ledger.record(&status);
                    crate::ingest::FetchOutcome::failure(&url, status, s.retrieved_at)
                }
                Err(e) => return Err(classify(e)),
            };
            let text = outcome.body_text.as_deref().unwrap_or("");
            fetches.push(FetchRecord {
                snippet_id: s.snippet_id.clone(),
                url: outcome.url.clone(),
                status: outcome.status.clone(),
                fetched_at: outcome.fetched_at,
                text_chars: outcome.body_text.as_ref().map(|t| t.chars().count()),
            });
            let pieces = chunk_document(&s.source_url, text, cfg.chunk_chars, cfg.overlap_chars).map_err(classify)?;
            for piece in pieces {
                chunks.push(SourcedChunk {
                    chunk_id: SourcedChunk::chunk_id_for(&s.snippet_id, piece.chunk_index),
                    snippet_id: s.snippet_id.clone(),
                    target_id: s.target_id.clone(),
                    query: s.query.clone(),
                    position: s.position,
                    retrieved_at: outcome.fetched_at,
                    chunk: piece,
                });
            }
        }
    }

    let entry = ManifestEntry {
        target_id: task.target.id.clone(),
        template_id: task.template_id.to_string(),
        query: task.query.clone(),
        requests: requests.total(),
        failed_requests: requests.failed(),
        snippets: snippets.len() as u64,
        fulltext: clients.fetcher.is_some(),
        fetch: fetch_ledger.snapshot(),
        chunks: chunks.len() as u64,
    };
    let out = PairOutput {
        snippets,
        fetches,
        chunks,
    };
    let path = layout.pairs_dir().join(format!("{}.json", pair_file_stem(&task.target.id, task.template_id)));
    write_file(&path, serde_json::to_vec(&out).expect("pair output serializes"))?;
    let mut line = serde_json::to_string(&entry).expect("manifest entry serializes");
    line.push('\n');
    let mut file = manifest.lock().expect("manifest lock");
    file.write_all(line.as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| PipelineError::io(&layout.manifest(), e))?;
    Ok(entry)
}

/// Collect snippets (and pages for the full-text arm) for every target and
/// template, skipping tasks already recorded in the manifest, then write the
/// consolidated corpora and ledger.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestSummary, PipelineError> {
    let res = Resources::load(cfg)?;
    let layout = Layout::new(&cfg.output_dir);
    let clients = clients(cfg)?;
    let want_fulltext = clients.fetcher.is_some();

    fs::create_dir_all(layout.pairs_dir()).map_err(|e| PipelineError::io(&layout.pairs_dir(), e))?;
    let done = latest(load_manifest(&layout)?);
    let mut tasks = Vec::new();
    let mut skipped = 0;
    for target in &res.targets {
        for template in res.templates.iter() {
            let key = (target.id.clone(), template.id.clone());
            let query = template.render(&target.name);
            let complete = done
                .get(&key)
                .is_some_and(|e| e.query == query && (e.fulltext || !want_fulltext));
            if complete {
                skipped += 1;
            } else {
                tasks.push(Task {
                    target,
                    template_id: &template.id,
                    query,
                });
            }
        }
    }

    let manifest_file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(layout.manifest())
        .map_err(|e| PipelineError::io(&layout.manifest(), e))?;
    let manifest = Mutex::new(manifest_file);
    let pool = thread_pool(cfg.concurrency)?;
    let results: Vec<Result<ManifestEntry, TaskError>> =
        pool.install(|| tasks.par_iter().map(|t| run_task(t, cfg, &clients, &layout, &manifest)).collect());

    let mut missing = Vec::new();
    let mut backend = Vec::new();
    for r in results {
        match r {
            Ok(_) => {}
            Err(TaskError::Missing(m)) => missing.push(m),
            Err(TaskError::Backend(m)) => backend.push(m),
            Err(TaskError::Other(e)) => return Err(e),
        }
    }

    let ledger = consolidate(&res, &layout)?;
    if !backend.is_empty() {
        backend.sort();
        return Err(PipelineError::Backend(backend));
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(PipelineError::MissingInputs(missing));
    }
    Ok(IngestSummary {
        ledger,
        ran: tasks.len(),
        skipped,
    })
}

/// Merge the per-task outputs named by the manifest into sorted corpus files.
fn consolidate(res: &Resources, layout: &Layout) -> Result<IngestLedger, PipelineError> {
    let entries = latest(load_manifest(layout)?);
    let mut ledger = IngestLedger::default();
    let mut snippets = Vec::new();
    let mut fetches = Vec::new();
    let mut chunks = Vec::new();
    for ((target_id, template_id), e) in &entries {
        if res.target(target_id).is_none() || res.templates.get(template_id).is_none() {
            continue;
        }
        let path = layout.pairs_dir().join(format!("{}.json", pair_file_stem(target_id, template_id)));
        let out: PairOutput = read_json(&path)?;
        ledger.pairs += 1;
        ledger.requests += e.requests;
        ledger.failed_requests += e.failed_requests;
        ledger.snippets += e.snippets;
        ledger.chunks += e.chunks;
        ledger.fetch.attempts += e.fetch.attempts;
        ledger.fetch.success += e.fetch.success;
        ledger.fetch.http_error += e.fetch.http_error;
        ledger.fetch.blocked += e.fetch.blocked;
        ledger.fetch.timeout += e.fetch.timeout;
        ledger.fetch.unparsable += e.fetch.unparsable;
        snippets.extend(out.snippets);
        fetches.extend(out.fetches);
        chunks.extend(out.chunks);
    }
    snippets.sort_by(|a, b| a.snippet_id.cmp(&b.snippet_id));
    fetches.sort_by(|a, b| a.snippet_id.cmp(&b.snippet_id));
    chunks.sort_by(|a, b| a.chunk_id.cmp(&b.chunk_id));
    write_file(&layout.snippets(), to_jsonl(&snippets))?;
    write_file(&layout.fetches(), to_jsonl(&fetches))?;
    write_file(&layout.chunks(), to_jsonl(&chunks))?;
    write_json(&layout.ingest_ledger(), &ledger)?;
    Ok(ledger)
}
