use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NameNormalizer, ResolveError};
use crate::ingest::targets_flag;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub canonical_id: String,
    /// Normalized canonical name; also present in `aliases`.
    pub canonical_name: String,
    pub aliases: BTreeSet<String>,
    pub listed: bool,
}

/// Multilingual alias table: normalized alias -> canonical id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasTable {
    index: BTreeMap<String, String>,
    records: BTreeMap<String, CanonicalRecord>,
}

impl AliasTable {
    pub fn load(path: &Path, normalizer: &NameNormalizer) -> Result<Self, ResolveError> {
        let text = fs::read_to_string(path)?;
        Self::from_tsv_str(&text, normalizer)
    }

    /// Parse TSV with header `alias, canonical_id, canonical_name, listed_flag`.
    pub fn from_tsv_str(text: &str, normalizer: &NameNormalizer) -> Result<Self, ResolveError> {
        let mut table = Self::default();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.split('\t').next().map(str::trim) == Some("alias") => {}
            _ => {
                return Err(ResolveError::AliasTable {
                    line: 1,
                    message: "expected header `alias\\tcanonical_id\\tcanonical_name\\tlisted_flag`".into(),
                })
            }
        }
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| ResolveError::AliasTable { line: i + 1, message };
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() < 3 {
                return Err(err(format!("expected 4 columns, found {}", cols.len())));
            }
            let listed = match cols.get(3) {
                None | Some(&"") => false,
                Some(flag) => targets_flag(flag).ok_or_else(|| err(format!("bad listed flag `{flag}`")))?,
            };
            let alias = normalizer.normalize(cols[0]).map_err(|e| err(e.to_string()))?;
            let canonical = normalizer.normalize(cols[2]).map_err(|e| err(e.to_string()))?;
            table
                .insert(cols[1], &canonical.text, &alias.text, listed)
                .map_err(err)?;
        }
        Ok(table)
    }

    /// Add one already-normalized alias row.
    pub fn insert(&mut self, canonical_id: &str, canonical_name: &str, alias: &str, listed: bool) -> Result<(), String> {
        if canonical_id.is_empty() {
            return Err("empty canonical id".into());
        }
        let record = self
            .records
            .entry(canonical_id.to_string())
            .or_insert_with(|| CanonicalRecord {
                canonical_id: canonical_id.to_string(),
                canonical_name: canonical_name.to_string(),
                aliases: BTreeSet::new(),
                listed,
            });
        if record.canonical_name != canonical_name {
            return Err(format!(
                "canonical id `{canonical_id}` has two canonical names: `{}` and `{canonical_name}`",
                record.canonical_name
            ));
        }
        record.listed |= listed;
        record.aliases.insert(alias.to_string());
        record.aliases.insert(canonical_name.to_string());
        for name in [alias, canonical_name] {
            match self.index.get(name) {
                Some(existing) if existing != canonical_id => {
                    return Err(format!("alias `{name}` maps to both `{existing}` and `{canonical_id}`"));
                }
                _ => {
                    self.index.insert(name.to_string(), canonical_id.to_string());
                }
            }
        }
        Ok(())
    }

    /// Look up a normalized name.
    pub fn lookup(&self, normalized: &str) -> Option<&str> {
        self.index.get(normalized).map(String::as_str)
    }

    pub fn record(&self, canonical_id: &str) -> Option<&CanonicalRecord> {
        self.records.get(canonical_id)
    }

    pub fn records(&self) -> impl Iterator<Item = &CanonicalRecord> {
        self.records.values()
    }

    /// Every (alias, canonical id) pair.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.index.iter().map(|(a, id)| (a.as_str(), id.as_str()))
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "alias\tcanonical_id\tcanonical_name\tlisted_flag\n\
        HUAWEI\tID7\t华为技术有限公司\t0\n\
        华为\tID7\t华为技术有限公司\t0\n\
        BYD Company Ltd.\tID8\t比亚迪股份有限公司\t1\n";

    #[test]
    fn loads_and_normalizes() {
        let t = AliasTable::from_tsv_str(TABLE, &NameNormalizer::default()).unwrap();
        assert_eq!(t.lookup("huawei"), Some("ID7"));
        assert_eq!(t.lookup("华为技术"), Some("ID7"));
        assert_eq!(t.lookup("byd company"), Some("ID8"));
        let rec = t.record("ID7").unwrap();
        assert!(rec.aliases.contains(&rec.canonical_name));
        assert!(!rec.listed);
        assert!(t.record("ID8").unwrap().listed);
    }

    #[test]
    fn alias_must_map_to_one_id() {
        let bad = "alias\tcanonical_id\tcanonical_name\tlisted_flag\nacme\tA\tacme\t0\nAcme Inc\tB\tacme two\t0\n";
        let err = AliasTable::from_tsv_str(bad, &NameNormalizer::default()).unwrap_err();
        assert!(matches!(err, ResolveError::AliasTable { line: 3, .. }), "{err}");
    }

    #[test]
    fn header_and_columns_checked() {
        assert!(AliasTable::from_tsv_str("x\ty\n", &NameNormalizer::default()).is_err());
        assert!(AliasTable::from_tsv_str("alias\tcanonical_id\nfoo\n", &NameNormalizer::default()).is_err());
        assert!(AliasTable::from_tsv_str("alias\nInc.\tX\tfoo\t0\n", &NameNormalizer::default()).is_err());
    }
}
