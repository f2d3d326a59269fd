use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{read_jsonl, thread_pool, to_jsonl, write_file, write_json, Arm, Layout, Mode, PipelineConfig, PipelineError, Resources};
use crate::extract::{
    extract, CallReport, CallStatus, EvidenceInput, ExtractOptions, ExtractionBackend, ExtractionLedger,
    HeuristicTokenCounter, MockBackend, RawRelation,
};
use crate::ingest::{SnippetRecord, SourcedChunk, Target};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractSummary {
    pub ledgers: BTreeMap<String, ExtractionLedger>,
}

enum Batch<'a> {
    Snippets(Vec<SnippetRecord>),
    Chunk(&'a SourcedChunk),
}

struct Call<'a> {
    call_id: String,
    target: &'a Target,
    batch: Batch<'a>,
}

fn backend(cfg: &PipelineConfig) -> Result<Box<dyn ExtractionBackend>, PipelineError> {
    match cfg.mode {
        Mode::Replay => Ok(Box::new(MockBackend)),
        Mode::Live => live_backend(cfg),
    }
}

#[cfg(feature = "live")]
fn live_backend(cfg: &PipelineConfig) -> Result<Box<dyn ExtractionBackend>, PipelineError> {
    let settings = cfg.live.clone().unwrap_or_default();
    Ok(Box::new(super::live::ChatBackend::from_env(&settings)?))
}

#[cfg(not(feature = "live"))]
fn live_backend(_cfg: &PipelineConfig) -> Result<Box<dyn ExtractionBackend>, PipelineError> {
    Err(PipelineError::Config("live mode needs a build with the `live` feature".into()))
}

/// Run the extraction backend over the ingested corpora: one call per
/// (target, query) snippet set, one call per full-text chunk.
pub fn cmd_extract(cfg: &PipelineConfig) -> Result<ExtractSummary, PipelineError> {
    let res = Resources::load(cfg)?;
    let layout = Layout::new(&cfg.output_dir);
    let backend = backend(cfg)?;
    let options = ExtractOptions {
        max_attempts: cfg.max_attempts,
        synonyms: cfg.synonyms(),
        ..ExtractOptions::default()
    };
    let counter = HeuristicTokenCounter::default();
    let pool = thread_pool(cfg.concurrency)?;
    let mut ledgers = BTreeMap::new();
    let mut failures = Vec::new();

    for arm in cfg.arm.parts() {
        match arm {
            Arm::Snippet => {
                let snippets: Vec<SnippetRecord> = read_jsonl(&layout.snippets())?;
                let mut groups: BTreeMap<(String, String), Vec<SnippetRecord>> = BTreeMap::new();
                for s in snippets {
                    groups.entry((s.target_id.clone(), s.query.clone())).or_default().push(s);
                }
                let mut calls = Vec::with_capacity(groups.len());
                for ((target_id, query), mut group) in groups {
                    let Some(target) = res.target(&target_id) else {
                        log::warn!("snippets for unknown target `{target_id}` skipped");
                        continue;
                    };
                    group.sort_by_key(|s| s.position);
                    let template = res.template_of(&target_id, &query).unwrap_or(query);
                    calls.push(Call {
                        call_id: format!("{target_id}:{template}"),
                        target,
                        batch: Batch::Snippets(group),
                    });
                }
                run_arm(arm, &calls, backend.as_ref(), &options, &counter, cfg, &pool, &layout, &mut ledgers, &mut failures)?;
            }
            Arm::Fulltext => {
                let chunks: Vec<SourcedChunk> = read_jsonl(&layout.chunks())?;
                let calls: Vec<Call> = chunks
                    .iter()
                    .filter_map(|c| {
                        let target = res.target(&c.target_id)?;
                        Some(Call {
                            call_id: c.chunk_id.clone(),
                            target,
                            batch: Batch::Chunk(c),
                        })
                    })
                    .collect();
                run_arm(arm, &calls, backend.as_ref(), &options, &counter, cfg, &pool, &layout, &mut ledgers, &mut failures)?;
            }
            Arm::Both => unreachable!("parts() yields single arms"),
        }
    }
    if !failures.is_empty() {
        return Err(PipelineError::Backend(failures));
    }
    Ok(ExtractSummary { ledgers })
}

#[allow(clippy::too_many_arguments)]
fn run_arm(
    arm: Arm,
    calls: &[Call<'_>],
    backend: &dyn ExtractionBackend,
    options: &ExtractOptions,
    counter: &HeuristicTokenCounter,
    cfg: &PipelineConfig,
    pool: &rayon::ThreadPool,
    layout: &Layout,
    ledgers: &mut BTreeMap<String, ExtractionLedger>,
    failures: &mut Vec<String>,
) -> Result<(), PipelineError> {
    let extracted_at = match cfg.mode {
        Mode::Replay => cfg.clock,
        Mode::Live => chrono::Utc::now(),
    };
    let reports: Vec<CallReport> = pool.install(|| {
        calls
            .par_iter()
            .map(|call| {
                let input = match &call.batch {
                    Batch::Snippets(s) => EvidenceInput::Snippets(s.as_slice()),
                    Batch::Chunk(c) => EvidenceInput::Chunks(std::slice::from_ref(*c)),
                };
                extract(backend, call.target, input, &call.call_id, options, counter, extracted_at)
            })
            .collect()
    });
    let mut ledger = ExtractionLedger::default();
    let mut relations: Vec<&RawRelation> = Vec::new();
    for r in &reports {
        ledger.record(r);
        relations.extend(r.relations.iter());
        if let CallStatus::Failed { error } = &r.status {
            failures.push(format!("{} call {}: {error} after {} attempt(s)", arm.as_str(), r.call_id, r.attempts));
        }
    }
    write_file(&layout.relations(arm), to_jsonl(&relations))?;
    write_file(&layout.calls(arm), to_jsonl(&reports))?;
    write_json(&layout.extract_ledger(arm), &ledger)?;
    ledgers.insert(arm.as_str().to_string(), ledger);
    Ok(())
}
