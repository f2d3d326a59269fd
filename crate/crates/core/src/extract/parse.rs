use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ExtractionPrompt, RawRelation, SynonymMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    UnparsableOutput,
    NotAnObject,
    EmptyPartner,
    BadRelationType,
    BadEvidence,
    MissingEvidence,
    EvidenceOutOfRange,
}

/// Rejection counts keyed by reason.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionLedger(pub BTreeMap<RejectReason, u64>);

impl RejectionLedger {
    pub fn add(&mut self, reason: RejectReason) {
        *self.0.entry(reason).or_insert(0) += 1;
    }

    pub fn get(&self, reason: RejectReason) -> u64 {
        self.0.get(&reason).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn merge(&mut self, other: &RejectionLedger) {
        for (k, v) in &other.0 {
            *self.0.entry(*k).or_insert(0) += v;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutcome {
    pub relations: Vec<RawRelation>,
    pub rejections: RejectionLedger,
    /// Array elements inspected, or 1 for wholly unparsable output.
    pub items_seen: u64,
}

/// Validate backend output against `prompt`. Never fails: anything that
/// does not validate is counted in the rejection ledger and skipped.
pub fn parse_extraction(output: &str, prompt: &ExtractionPrompt, synonyms: &SynonymMap) -> ParseOutcome {
    parse_extraction_at(output, prompt, synonyms, DateTime::UNIX_EPOCH, 0, "")
}

pub fn parse_extraction_at(
    output: &str,
    prompt: &ExtractionPrompt,
    synonyms: &SynonymMap,
    extracted_at: DateTime<Utc>,
    input_tokens: u64,
    call_id: &str,
) -> ParseOutcome {
    let mut outcome = ParseOutcome::default();
    let Some(items) = locate_array(output) else {
        outcome.items_seen = 1;
        outcome.rejections.add(RejectReason::UnparsableOutput);
        return outcome;
    };
    for item in items {
        outcome.items_seen += 1;
        match validate_item(&item, prompt, synonyms) {
            Ok((partner_name, relation_type, product, indices)) => {
                let (evidence_refs, source_urls) = indices
                    .iter()
                    .filter_map(|&i| prompt.source(i))
                    .map(|s| (s.evidence_id.clone(), s.source_url.clone()))
                    .unzip();
                outcome.relations.push(RawRelation {
                    target_id: prompt.target_id.clone(),
                    partner_name,
                    relation_type,
                    product,
                    evidence_refs,
                    source_urls,
                    extracted_at,
                    input_tokens,
                    call_id: call_id.to_string(),
                });
            }
            Err(reason) => outcome.rejections.add(reason),
        }
    }
    outcome
}

/// Find the relation array in free-form output: the whole text, a fenced
/// code block, an object wrapping a `relations` array, or the outermost
/// `[...]` span.
fn locate_array(output: &str) -> Option<Vec<Value>> {
    let trimmed = strip_fence(output.trim());
    if let Ok(value) = serde_json::from_str::<Value>(trimmed) {
        return array_of(value);
    }
    let start = trimmed.find('[')?;
    let end = trimmed.rfind(']')?;
    if end <= start {
        return None;
    }
    serde_json::from_str::<Value>(&trimmed[start..=end]).ok().and_then(array_of)
}

fn array_of(value: Value) -> Option<Vec<Value>> {
    match value {
        Value::Array(items) => Some(items),
        Value::Object(mut map) => match map.remove("relations").or_else(|| map.remove("relationships")) {
            Some(Value::Array(items)) => Some(items),
            _ => None,
        },
        _ => None,
    }
}

fn strip_fence(s: &str) -> &str {
    let Some(rest) = s.strip_prefix("```") else {
        return s;
    };
    let rest = rest.split_once('\n').map_or("", |(_, body)| body);
    rest.trim_end().strip_suffix("```").unwrap_or(rest).trim()
}

type Validated = (String, super::RelationType, String, Vec<u32>);

fn validate_item(item: &Value, prompt: &ExtractionPrompt, synonyms: &SynonymMap) -> Result<Validated, RejectReason> {
    let obj = item.as_object().ok_or(RejectReason::NotAnObject)?;
    let partner = obj
        .get("partner_name")
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or(RejectReason::EmptyPartner)?;
    let relation_type = obj
        .get("relation_type")
        .and_then(Value::as_str)
        .and_then(|s| synonyms.lookup(s))
        .ok_or(RejectReason::BadRelationType)?;
    let product = match obj.get("product") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.trim().to_string(),
        Some(other) => other.to_string(),
    };
    let evidence = match obj.get("evidence") {
        None | Some(Value::Null) => return Err(RejectReason::MissingEvidence),
        Some(Value::Array(values)) => values,
        Some(single) => std::slice::from_ref(single),
    };
    if evidence.is_empty() {
        return Err(RejectReason::MissingEvidence);
    }
    let mut indices: Vec<u32> = Vec::with_capacity(evidence.len());
    for v in evidence {
        let index = evidence_index(v).ok_or(RejectReason::BadEvidence)?;
        if index == 0 || index as usize > prompt.sources.len() {
            return Err(RejectReason::EvidenceOutOfRange);
        }
        if !indices.contains(&index) {
            indices.push(index);
        }
    }
    Ok((partner.to_string(), relation_type, product, indices))
}

fn evidence_index(v: &Value) -> Option<u32> {
    match v {
        Value::Number(n) => n.as_u64().and_then(|n| u32::try_from(n).ok()),
        Value::String(s) => s.trim().trim_start_matches('[').trim_end_matches(']').parse().ok(),
        _ => None,
    }
}
