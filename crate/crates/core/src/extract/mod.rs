//! Relation extraction: prompt assembly, backend invocation and validation
//! of the backend's JSON output into [`RawRelation`]s with provenance.

mod backend;
pub mod chat;
mod mock;
mod parse;
mod prompt;
mod tokens;

pub use backend::{
    extract, BackendError, CallReport, CallStatus, ExtractOptions, ExtractionBackend, ExtractionLedger,
};
pub use mock::{mock_backend, MockBackend, MALFORMED_MARKER};
pub use parse::{parse_extraction, parse_extraction_at, ParseOutcome, RejectReason, RejectionLedger};
pub use prompt::{assemble_prompt, EvidenceInput, EvidenceSource, ExtractionPrompt, PromptItem, DEFAULT_SYSTEM_PROMPT};
pub use tokens::{count_tokens, is_cjk, HeuristicTokenCounter, TokenCounter};

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationType {
    /// The partner supplies the target.
    Supplier,
    /// The partner buys from the target.
    Customer,
    Partner,
    Unknown,
}

impl RelationType {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationType::Supplier => "supplier",
            RelationType::Customer => "customer",
            RelationType::Partner => "partner",
            RelationType::Unknown => "unknown",
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps backend relation strings onto [`RelationType`]. Keys are matched
/// after trimming and ASCII lowercasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymMap {
    entries: BTreeMap<String, RelationType>,
}

impl Default for SynonymMap {
    fn default() -> Self {
        use RelationType::*;
        let pairs = [
            ("supplier", Supplier),
            ("vendor", Supplier),
            ("供应商", Supplier),
            ("供货商", Supplier),
            ("customer", Customer),
            ("client", Customer),
            ("buyer", Customer),
            ("客户", Customer),
            ("采购方", Customer),
            ("partner", Partner),
            ("partnership", Partner),
            ("合作伙伴", Partner),
            ("合作", Partner),
            ("unknown", Unknown),
            ("other", Unknown),
            ("未知", Unknown),
        ];
        Self {
            entries: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

impl SynonymMap {
    pub fn new(entries: impl IntoIterator<Item = (String, RelationType)>) -> Self {
        Self {
            entries: entries.into_iter().map(|(k, v)| (k.trim().to_ascii_lowercase(), v)).collect(),
        }
    }

    pub fn insert(&mut self, key: &str, value: RelationType) {
        self.entries.insert(key.trim().to_ascii_lowercase(), value);
    }

    pub fn lookup(&self, token: &str) -> Option<RelationType> {
        self.entries.get(&token.trim().to_ascii_lowercase()).copied()
    }
}

/// One extracted relation before entity resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRelation {
    pub target_id: String,
    pub partner_name: String,
    pub relation_type: RelationType,
    #[serde(default)]
    pub product: String,
    /// Snippet ids (or chunk ids) cited by the backend.
    pub evidence_refs: Vec<String>,
    /// Source URL of each entry in `evidence_refs`, index-aligned.
    pub source_urls: Vec<String>,
    pub extracted_at: DateTime<Utc>,
    /// Input tokens of the call that produced this relation.
    pub input_tokens: u64,
    pub call_id: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synonyms_are_case_insensitive() {
        let m = SynonymMap::default();
        assert_eq!(m.lookup(" Supplier "), Some(RelationType::Supplier));
        assert_eq!(m.lookup("供应商"), Some(RelationType::Supplier));
        assert_eq!(m.lookup("UNKNOWN"), Some(RelationType::Unknown));
        assert_eq!(m.lookup("frenemy"), None);
    }

    #[test]
    fn relation_type_serializes_lowercase() {
        assert_eq!(serde_json::to_string(&RelationType::Customer).unwrap(), "\"customer\"");
    }
}
