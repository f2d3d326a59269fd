//! Deterministic rule-based stand-in for an extraction model.
//!
//! Recognized item-body patterns (tokens separated by whitespace where shown):
//!
//! - `X 为 Y 供应 P`: X supplies P to Y
//! - `X 的客户包括 Y1、Y2`: each Y is a customer of X
//! - `X 与 Y 合作`: X and Y are partners
//!
//! A relation is reported from the target's point of view; when neither
//! side is the target it is emitted with type `unknown`. An item containing
//! [`MALFORMED_MARKER`] makes the whole output invalid JSON.

use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use super::{BackendError, ExtractionBackend, ExtractionPrompt, RelationType};

pub const MALFORMED_MARKER: &str = "@@MALFORMED@@";

const TOKEN: &str = r"[^\s，。；、,;：:]+";

struct Grammar {
    supplies: Regex,
    customers: Regex,
    partners: Regex,
    list_sep: Regex,
}

fn grammar() -> &'static Grammar {
    static GRAMMAR: OnceLock<Grammar> = OnceLock::new();
    GRAMMAR.get_or_init(|| Grammar {
        supplies: Regex::new(&format!(r"({TOKEN})\s+为\s+({TOKEN})\s+供应\s*({TOKEN})")).unwrap(),
        customers: Regex::new(&format!(r"({TOKEN})\s*的客户包括\s*({TOKEN}(?:\s*[、,，]\s*{TOKEN})*)")).unwrap(),
        partners: Regex::new(&format!(r"({TOKEN})\s+与\s+({TOKEN})\s+合作")).unwrap(),
        list_sep: Regex::new(r"\s*[、,，]\s*").unwrap(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct MockRelation {
    partner_name: String,
    relation_type: RelationType,
    product: String,
    evidence: Vec<u32>,
}

fn is_target(name: &str, target: &str) -> bool {
    name == target || name.starts_with(target) || target.starts_with(name)
}

/// Orient a directed fact `supplier -> buyer` relative to `target`.
fn flow(supplier: &str, buyer: &str, target: &str) -> Option<(String, RelationType)> {
    if supplier == buyer {
        return None;
    }
    if is_target(buyer, target) {
        Some((supplier.to_string(), RelationType::Supplier))
    } else if is_target(supplier, target) {
        Some((buyer.to_string(), RelationType::Customer))
    } else {
        Some((supplier.to_string(), RelationType::Unknown))
    }
}

fn partnership(a: &str, b: &str, target: &str) -> Option<(String, RelationType)> {
    if a == b {
        return None;
    }
    if is_target(a, target) {
        Some((b.to_string(), RelationType::Partner))
    } else if is_target(b, target) {
        Some((a.to_string(), RelationType::Partner))
    } else {
        Some((a.to_string(), RelationType::Unknown))
    }
}

pub fn mock_backend(prompt: &ExtractionPrompt) -> String {
    if prompt.items.iter().any(|i| i.body.contains(MALFORMED_MARKER)) {
        return format!("[{{\"partner_name\": \"{MALFORMED_MARKER}\", \"relation_type\": ");
    }
    let g = grammar();
    let target = prompt.target_name.as_str();
    let mut out: Vec<MockRelation> = Vec::new();
    let mut push = |found: Option<(String, RelationType)>, product: &str, index: u32| {
        let Some((partner_name, relation_type)) = found else {
            return;
        };
        match out
            .iter_mut()
            .find(|r| r.partner_name == partner_name && r.relation_type == relation_type && r.product == product)
        {
            Some(existing) => {
                if !existing.evidence.contains(&index) {
                    existing.evidence.push(index);
                }
            }
            None => out.push(MockRelation {
                partner_name,
                relation_type,
                product: product.to_string(),
                evidence: vec![index],
            }),
        }
    };
    for item in &prompt.items {
        let body = item.body.as_str();
        for cap in g.supplies.captures_iter(body) {
            push(flow(&cap[1], &cap[2], target), &cap[3], item.index);
        }
        for cap in g.customers.captures_iter(body) {
            for buyer in g.list_sep.split(&cap[2]).filter(|s| !s.is_empty()) {
                push(flow(&cap[1], buyer, target), "", item.index);
            }
        }
        for cap in g.partners.captures_iter(body) {
            push(partnership(&cap[1], &cap[2], target), "", item.index);
        }
    }
    serde_json::to_string(&out).expect("mock output serializes")
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl ExtractionBackend for MockBackend {
    fn complete(&self, prompt: &ExtractionPrompt) -> Result<String, BackendError> {
        Ok(mock_backend(prompt))
    }
}
