//! Entity resolution: name normalization, Unknown-relation filtering and
//! staged matching of partner surface forms to canonical firms.

mod alias;
mod jaro;
mod normalize;
mod resolver;

pub use alias::{AliasTable, CanonicalRecord};
pub use jaro::{jaro, jaro_winkler};
pub use normalize::{normalize_name, NameNormalizer, NormalizedName, DEFAULT_LEGAL_SUFFIXES};
pub use resolver::{FirmRecord, MatchDecision, MatchStage, Registry, ResolveOptions};

use crate::extract::{RawRelation, RelationType};

#[derive(Debug, thiserror::Error)]
pub enum ResolveError {
    #[error("name `{0}` is empty after normalization")]
    EmptyAfterNormalize(String),
    #[error("alias table line {line}: {message}")]
    AliasTable { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Remove relations typed `unknown`; returns the survivors and the number removed.
pub fn drop_unknown(relations: Vec<RawRelation>) -> (Vec<RawRelation>, u64) {
    let before = relations.len();
    let kept: Vec<RawRelation> = relations
        .into_iter()
        .filter(|r| r.relation_type != RelationType::Unknown)
        .collect();
    let dropped = (before - kept.len()) as u64;
    (kept, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(t: RelationType) -> RawRelation {
        RawRelation {
            target_id: "T".into(),
            partner_name: "p".into(),
            relation_type: t,
            product: String::new(),
            evidence_refs: vec!["s".into()],
            source_urls: vec!["https://a.com".into()],
            extracted_at: chrono::DateTime::UNIX_EPOCH,
            input_tokens: 0,
            call_id: "c".into(),
        }
    }

    #[test]
    fn drops_only_unknown() {
        use RelationType::*;
        let (kept, dropped) = drop_unknown(vec![rel(Supplier), rel(Unknown), rel(Partner)]);
        assert_eq!(kept.iter().map(|r| r.relation_type).collect::<Vec<_>>(), vec![Supplier, Partner]);
        assert_eq!(dropped, 1);
    }

    #[test]
    fn all_unknown_is_empty() {
        let (kept, dropped) = drop_unknown(vec![rel(RelationType::Unknown); 4]);
        assert!(kept.is_empty());
        assert_eq!(dropped, 4);
    }

    #[test]
    fn ten_with_three_unknown() {
        use RelationType::*;
        let types = [Supplier, Unknown, Customer, Partner, Unknown, Supplier, Supplier, Unknown, Customer, Partner];
        let (kept, dropped) = drop_unknown(types.iter().map(|t| rel(*t)).collect());
        assert_eq!(kept.len(), 7);
        assert_eq!(dropped, 3);
        assert!(kept.iter().all(|r| r.relation_type != Unknown));
    }
}
