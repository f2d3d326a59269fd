use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Absolute counters for one extraction arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmLedger {
    pub targets: u64,
    pub requests: u64,
    pub evidence_items: u64,
    pub raw_relations: u64,
    pub unique_relations: u64,
    /// Sum over targets of each target's own unique relation count,
    /// taken before cross-target consolidation.
    pub target_relation_total: u64,
    pub unique_partners: u64,
    pub input_tokens: u64,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    #[serde(flatten)]
    pub ledger: ArmLedger,
    pub duplicate_rate: Option<f64>,
    pub relations_per_target: Option<f64>,
    pub relations_per_unique_partner: Option<f64>,
    pub tokens_per_unique_relation: Option<f64>,
}

impl ArmReport {
    pub fn from_ledger(ledger: ArmLedger) -> Self {
        let l = ledger;
        Self {
            ledger,
            duplicate_rate: ratio(l.unique_relations as f64, l.raw_relations as f64).map(|q| 1.0 - q),
            relations_per_target: ratio(l.target_relation_total as f64, l.targets as f64),
            relations_per_unique_partner: ratio(l.unique_relations as f64, l.unique_partners as f64),
            tokens_per_unique_relation: ratio(l.input_tokens as f64, l.unique_relations as f64),
        }
    }
}

/// Full-text value divided by snippet value, field by field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioColumn {
    pub requests: Option<f64>,
    pub evidence_items: Option<f64>,
    pub raw_relations: Option<f64>,
    pub unique_relations: Option<f64>,
    pub relations_per_target: Option<f64>,
    pub unique_partners: Option<f64>,
    pub relations_per_unique_partner: Option<f64>,
    pub input_tokens: Option<f64>,
    pub tokens_per_unique_relation: Option<f64>,
}

fn opt_ratio(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    ratio(num?, den?)
}

impl RatioColumn {
    fn between(snippet: &ArmReport, full: &ArmReport) -> Self {
        let (s, f) = (&snippet.ledger, &full.ledger);
        let r = |a: u64, b: u64| ratio(a as f64, b as f64);
        Self {
            requests: r(f.requests, s.requests),
            evidence_items: r(f.evidence_items, s.evidence_items),
            raw_relations: r(f.raw_relations, s.raw_relations),
            unique_relations: r(f.unique_relations, s.unique_relations),
            relations_per_target: opt_ratio(full.relations_per_target, snippet.relations_per_target),
            unique_partners: r(f.unique_partners, s.unique_partners),
            relations_per_unique_partner: opt_ratio(
                full.relations_per_unique_partner,
                snippet.relations_per_unique_partner,
            ),
            input_tokens: r(f.input_tokens, s.input_tokens),
            tokens_per_unique_relation: opt_ratio(full.tokens_per_unique_relation, snippet.tokens_per_unique_relation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub snippet: ArmReport,
    pub fulltext: Option<ArmReport>,
    pub ratio: Option<RatioColumn>,
}

pub fn cost_report(snippet: ArmLedger, fulltext: Option<ArmLedger>) -> CostReport {
    let snippet = ArmReport::from_ledger(snippet);
    let fulltext = fulltext.map(ArmReport::from_ledger);
    let ratio = fulltext.as_ref().map(|f| RatioColumn::between(&snippet, f));
    CostReport {
        snippet,
        fulltext,
        ratio,
    }
}

fn cell(v: Option<f64>, decimals: usize, suffix: &str) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.decimals$}{suffix}"))
}

impl CostReport {
    /// Aligned text table: snippet, full text and ratio columns.
    pub fn render_text(&self) -> String {
        let s = &self.snippet;
        let f = self.fulltext.as_ref();
        let r = self.ratio.as_ref();
        let int = |v: u64| Some(v as f64);
        type Row = (&'static str, Option<f64>, Option<f64>, Option<f64>, usize, &'static str);
        let rows: Vec<Row> = vec![
            ("Requests", int(s.ledger.requests), f.and_then(|f| int(f.ledger.requests)), r.and_then(|r| r.requests), 0, ""),
            ("Evidence items", int(s.ledger.evidence_items), f.and_then(|f| int(f.ledger.evidence_items)), r.and_then(|r| r.evidence_items), 0, ""),
            ("Raw relations", int(s.ledger.raw_relations), f.and_then(|f| int(f.ledger.raw_relations)), r.and_then(|r| r.raw_relations), 0, ""),
            ("Unique relations", int(s.ledger.unique_relations), f.and_then(|f| int(f.ledger.unique_relations)), r.and_then(|r| r.unique_relations), 0, ""),
            ("Duplicate rate", s.duplicate_rate.map(|d| d * 100.0), f.and_then(|f| f.duplicate_rate).map(|d| d * 100.0), None, 1, "%"),
            ("Relations per target", s.relations_per_target, f.and_then(|f| f.relations_per_target), r.and_then(|r| r.relations_per_target), 1, ""),
            ("Unique partners", int(s.ledger.unique_partners), f.and_then(|f| int(f.ledger.unique_partners)), r.and_then(|r| r.unique_partners), 0, ""),
            ("Relations per partner", s.relations_per_unique_partner, f.and_then(|f| f.relations_per_unique_partner), r.and_then(|r| r.relations_per_unique_partner), 1, ""),
            ("Input tokens", int(s.ledger.input_tokens), f.and_then(|f| int(f.ledger.input_tokens)), r.and_then(|r| r.input_tokens), 0, ""),
            ("Tokens per unique relation", s.tokens_per_unique_relation, f.and_then(|f| f.tokens_per_unique_relation), r.and_then(|r| r.tokens_per_unique_relation), 0, ""),
        ];
        let mut out = String::new();
        let _ = writeln!(out, "{:<28}{:>16}{:>16}{:>10}", "metric", "snippet", "fulltext", "ratio");
        for (name, a, b, q, d, suffix) in rows {
            let _ = writeln!(
                out,
                "{:<28}{:>16}{:>16}{:>10}",
                name,
                cell(a, d, suffix),
                cell(b, d, suffix),
                cell(q, 2, "x")
            );
        }
        out
    }
}
