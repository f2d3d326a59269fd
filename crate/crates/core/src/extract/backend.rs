use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    assemble_prompt, parse_extraction_at, EvidenceInput, ExtractionPrompt, RawRelation, RejectionLedger, SynonymMap,
    TokenCounter, DEFAULT_SYSTEM_PROMPT,
};
use crate::ingest::Target;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend timed out")]
    Timeout,
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend failed: {0}")]
    Failed(String),
}

pub trait ExtractionBackend: Send + Sync {
    fn complete(&self, prompt: &ExtractionPrompt) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub max_attempts: u32,
    pub system_text: String,
    pub synonyms: SynonymMap,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            system_text: DEFAULT_SYSTEM_PROMPT.to_string(),
            synonyms: SynonymMap::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CallStatus {
    Ok,
    Skipped,
    Failed { error: String },
}

/// Outcome of one extraction call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallReport {
    pub call_id: String,
    pub target_id: String,
    pub status: CallStatus,
    pub attempts: u32,
    pub input_tokens: u64,
    pub items_seen: u64,
    pub rejections: RejectionLedger,
    #[serde(skip)]
    pub relations: Vec<RawRelation>,
}

/// Per-arm totals over many calls. Built by folding [`CallReport`]s in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionLedger {
    pub calls: u64,
    pub failed_calls: u64,
    pub input_tokens: u64,
    pub items_seen: u64,
    pub accepted: u64,
    pub rejections: RejectionLedger,
}

impl ExtractionLedger {
    pub fn record(&mut self, report: &CallReport) {
        if report.status == CallStatus::Skipped {
            return;
        }
        self.calls += 1;
        if matches!(report.status, CallStatus::Failed { .. }) {
            self.failed_calls += 1;
        }
        self.input_tokens += report.input_tokens;
        self.items_seen += report.items_seen;
        self.accepted += report.relations.len() as u64;
        self.rejections.merge(&report.rejections);
    }

    pub fn merge(&mut self, other: &ExtractionLedger) {
        self.calls += other.calls;
        self.failed_calls += other.failed_calls;
        self.input_tokens += other.input_tokens;
        self.items_seen += other.items_seen;
        self.accepted += other.accepted;
        self.rejections.merge(&other.rejections);
    }
}

/// Assemble a prompt, call the backend (retrying failures) and validate the output.
///
/// An empty record list is skipped without a call. A backend that keeps
/// failing yields a `Failed` report rather than an error.
pub fn extract(
    backend: &dyn ExtractionBackend,
    target: &Target,
    records: EvidenceInput<'_>,
    call_id: &str,
    options: &ExtractOptions,
    counter: &dyn TokenCounter,
    extracted_at: DateTime<Utc>,
) -> CallReport {
    let mut report = CallReport {
        call_id: call_id.to_string(),
        target_id: target.id.clone(),
        status: CallStatus::Skipped,
        attempts: 0,
        input_tokens: 0,
        items_seen: 0,
        rejections: RejectionLedger::default(),
        relations: Vec::new(),
    };
    let Ok(prompt) = assemble_prompt(&target.id, &target.name, records, &options.system_text) else {
        return report;
    };
    report.input_tokens = counter.count(&prompt.render());
    let max_attempts = options.max_attempts.max(1);
    let mut last_error = None;
    while report.attempts < max_attempts {
        report.attempts += 1;
        match backend.complete(&prompt) {
            Ok(output) => {
                let parsed = parse_extraction_at(
                    &output,
                    &prompt,
                    &options.synonyms,
                    extracted_at,
                    report.input_tokens,
                    call_id,
                );
                report.status = CallStatus::Ok;
                report.items_seen = parsed.items_seen;
                report.rejections = parsed.rejections;
                report.relations = parsed.relations;
                return report;
            }
            Err(e) => last_error = Some(e),
        }
    }
    report.status = CallStatus::Failed {
        error: last_error.map(|e| e.to_string()).unwrap_or_default(),
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{HeuristicTokenCounter, MockBackend, RelationType};
    use crate::ingest::SnippetRecord;
    use std::sync::atomic::{AtomicU32, Ordering};

    fn target() -> Target {
        Target {
            id: "T9".into(),
            name: "B".into(),
            listed: true,
        }
    }

    fn snippet(text: &str) -> SnippetRecord {
        SnippetRecord {
            snippet_id: "T9-q1-001".into(),
            target_id: "T9".into(),
            query: "B 主要供应商".into(),
            retrieved_at: "2024-05-01T00:00:00Z".parse().unwrap(),
            title: "新闻".into(),
            snippet_text: text.into(),
            source_url: "https://news.example.com/1".into(),
            published_at: None,
            page: 1,
            rank: 1,
            position: 1,
        }
    }

    fn at() -> DateTime<Utc> {
        "2024-06-01T00:00:00Z".parse().unwrap()
    }

    #[test]
    fn mock_end_to_end() {
        let recs = [snippet("A 为 B 供应电池")];
        let r = extract(
            &MockBackend,
            &target(),
            EvidenceInput::Snippets(&recs),
            "call-1",
            &ExtractOptions::default(),
            &HeuristicTokenCounter::default(),
            at(),
        );
        assert_eq!(r.status, CallStatus::Ok);
        assert_eq!(r.relations.len(), 1);
        let rel = &r.relations[0];
        assert_eq!(rel.partner_name, "A");
        assert_eq!(rel.relation_type, RelationType::Supplier);
        assert_eq!(rel.product, "电池");
        assert_eq!(rel.source_urls, vec!["https://news.example.com/1"]);
        assert_eq!(rel.input_tokens, r.input_tokens);
        assert!(r.input_tokens > 0);
        assert_eq!(rel.call_id, "call-1");
        assert_eq!(rel.extracted_at, at());
    }

    #[test]
    fn empty_records_short_circuit() {
        let r = extract(
            &MockBackend,
            &target(),
            EvidenceInput::Snippets(&[]),
            "c",
            &ExtractOptions::default(),
            &HeuristicTokenCounter::default(),
            at(),
        );
        assert_eq!(r.status, CallStatus::Skipped);
        assert_eq!(r.input_tokens, 0);
        assert!(r.relations.is_empty());
        let mut ledger = ExtractionLedger::default();
        ledger.record(&r);
        assert_eq!(ledger.calls, 0);
    }

    struct Failing(AtomicU32);

    impl ExtractionBackend for Failing {
        fn complete(&self, _: &ExtractionPrompt) -> Result<String, BackendError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Err(BackendError::Timeout)
        }
    }

    #[test]
    fn retries_then_records_failure() {
        let backend = Failing(AtomicU32::new(0));
        let recs = [snippet("A 为 B 供应电池")];
        let r = extract(
            &backend,
            &target(),
            EvidenceInput::Snippets(&recs),
            "c",
            &ExtractOptions::default(),
            &HeuristicTokenCounter::default(),
            at(),
        );
        assert_eq!(backend.0.load(Ordering::SeqCst), 3);
        assert_eq!(r.attempts, 3);
        assert!(matches!(r.status, CallStatus::Failed { .. }));
        let mut ledger = ExtractionLedger::default();
        ledger.record(&r);
        assert_eq!(ledger.failed_calls, 1);
        assert_eq!(ledger.calls, 1);
    }
}
