use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{jaro_winkler, AliasTable, NameNormalizer, ResolveError};
use crate::extract::is_cjk;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStage {
    Exact,
    Alias,
    Similarity,
    NewNode,
}

/// Audit record for one resolved surface form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub input: String,
    pub normalized: String,
    pub stage: MatchStage,
    pub canonical_id: String,
    pub score: f64,
    /// The known name that matched (similarity stage) or the alias hit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolveOptions {
    pub threshold: f64,
    /// Compare against every known name instead of blocked candidates.
    pub exhaustive: bool,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        Self {
            threshold: 0.92,
            exhaustive: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirmRecord {
    pub canonical_id: String,
    pub canonical_name: String,
    pub aliases: BTreeSet<String>,
    pub listed: bool,
    pub is_target: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Script {
    Latin,
    Cjk,
    Other,
}

fn script_of(s: &str) -> Script {
    if s.chars().any(is_cjk) {
        Script::Cjk
    } else if s.chars().any(|c| c.is_ascii_alphabetic()) {
        Script::Latin
    } else {
        Script::Other
    }
}

fn blocking_keys(name: &str) -> BTreeSet<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut keys = BTreeSet::new();
    if let Some(first) = chars.first() {
        keys.insert(format!("^{first}"));
    }
    for w in chars.windows(2) {
        keys.insert(w.iter().collect());
    }
    keys
}

/// Firm registry plus the staged entity resolver that grows it.
///
/// Minted ids are `N` followed by a zero-padded sequence number.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    records: BTreeMap<String, FirmRecord>,
    /// Normalized known name -> canonical id (stage 1).
    names: BTreeMap<String, String>,
    /// Similarity candidates: normalized name -> canonical ids.
    candidates: BTreeMap<String, BTreeSet<String>>,
    blocks: BTreeMap<String, BTreeSet<String>>,
    minted: u64,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// A registry whose similarity candidates include every alias-table name.
    pub fn with_alias_candidates(aliases: &AliasTable) -> Self {
        let mut reg = Self::default();
        for (alias, id) in aliases.entries() {
            reg.add_candidate(alias, id);
        }
        reg
    }

    fn add_candidate(&mut self, name: &str, id: &str) {
        let ids = self.candidates.entry(name.to_string()).or_default();
        if ids.insert(id.to_string()) && ids.len() == 1 {
            for key in blocking_keys(name) {
                self.blocks.entry(key).or_default().insert(name.to_string());
            }
        }
    }

    fn add_name(&mut self, name: &str, id: &str) {
        self.names.entry(name.to_string()).or_insert_with(|| id.to_string());
        if let Some(rec) = self.records.get_mut(id) {
            rec.aliases.insert(name.to_string());
        }
        self.add_candidate(name, id);
    }

    fn insert_record(&mut self, record: FirmRecord) {
        let id = record.canonical_id.clone();
        let names: Vec<String> = record.aliases.iter().cloned().collect();
        let canonical = record.canonical_name.clone();
        self.records.insert(id.clone(), record);
        self.add_name(&canonical, &id);
        for n in names {
            self.add_name(&n, &id);
        }
    }

    /// Register a search seed under its own id.
    pub fn register_target(
        &mut self,
        id: &str,
        raw_name: &str,
        listed: bool,
        normalizer: &NameNormalizer,
        aliases: &AliasTable,
    ) -> Result<(), ResolveError> {
        let name = normalizer.normalize(raw_name)?;
        if let Some(rec) = self.records.get_mut(id) {
            rec.is_target = true;
            rec.listed |= listed;
            self.add_name(&name.text, id);
            return Ok(());
        }
        let mut record = FirmRecord {
            canonical_id: id.to_string(),
            canonical_name: name.text.clone(),
            aliases: BTreeSet::from([name.text.clone()]),
            listed,
            is_target: true,
        };
        if let Some(alias_rec) = aliases.record(id) {
            record.aliases.extend(alias_rec.aliases.iter().cloned());
            record.listed |= alias_rec.listed;
        }
        self.insert_record(record);
        Ok(())
    }

    fn ensure_from_alias(&mut self, id: &str, aliases: &AliasTable) {
        if self.records.contains_key(id) {
            return;
        }
        if let Some(rec) = aliases.record(id) {
            self.insert_record(FirmRecord {
                canonical_id: id.to_string(),
                canonical_name: rec.canonical_name.clone(),
                aliases: rec.aliases.clone(),
                listed: rec.listed,
                is_target: false,
            });
        }
    }

    pub fn get(&self, id: &str) -> Option<&FirmRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &FirmRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Exact name, then alias table, then Jaro–Winkler; otherwise mint a node.
    pub fn resolve(
        &mut self,
        raw_name: &str,
        normalizer: &NameNormalizer,
        aliases: &AliasTable,
        options: &ResolveOptions,
    ) -> Result<MatchDecision, ResolveError> {
        let name = normalizer.normalize(raw_name)?;
        let norm = name.text;
        let decision = |stage, id: &str, score, matched: Option<String>| MatchDecision {
            input: raw_name.to_string(),
            normalized: norm.clone(),
            stage,
            canonical_id: id.to_string(),
            score,
            matched_name: matched,
        };

        if let Some(id) = self.names.get(&norm) {
            return Ok(decision(MatchStage::Exact, id, 1.0, None));
        }

        if let Some(id) = aliases.lookup(&norm).map(str::to_string) {
            self.ensure_from_alias(&id, aliases);
            self.add_name(&norm, &id);
            return Ok(decision(MatchStage::Alias, &id, 1.0, Some(norm.clone())));
        }

        if let Some((score, id, matched)) = self.best_similar(&norm, options) {
            if score >= options.threshold {
                self.ensure_from_alias(&id, aliases);
                if self.records.contains_key(&id) {
                    self.add_name(&norm, &id);
                    return Ok(decision(MatchStage::Similarity, &id, score, Some(matched)));
                }
            }
        }

        self.minted += 1;
        let id = format!("N{:06}", self.minted);
        self.insert_record(FirmRecord {
            canonical_id: id.clone(),
            canonical_name: norm.clone(),
            aliases: BTreeSet::from([norm.clone()]),
            listed: false,
            is_target: false,
        });
        Ok(decision(MatchStage::NewNode, &id, 0.0, None))
    }

    /// Highest-scoring known name in the same script; ties go to the smallest id.
    fn best_similar(&self, norm: &str, options: &ResolveOptions) -> Option<(f64, String, String)> {
        let script = script_of(norm);
        let pool: Vec<&String> = if options.exhaustive {
            self.candidates.keys().collect()
        } else {
            let mut set = BTreeSet::new();
            for key in blocking_keys(norm) {
                if let Some(names) = self.blocks.get(&key) {
                    set.extend(names.iter());
                }
            }
            set.into_iter().collect()
        };
        let mut best: Option<(f64, String, String)> = None;
        for cand in pool {
            if script_of(cand) != script {
                continue;
            }
            let score = jaro_winkler(norm, cand);
            for id in &self.candidates[cand] {
                let better = match &best {
                    None => true,
                    Some((s, bid, _)) => score > *s || (score == *s && id < bid),
                };
                if better {
                    best = Some((score, id.clone(), cand.clone()));
                }
            }
        }
        best
    }

    /// Resolve a set of surface forms independently of input order:
    /// forms are deduplicated and processed sorted by normalized text.
    pub fn resolve_all<'a>(
        &mut self,
        names: impl IntoIterator<Item = &'a str>,
        normalizer: &NameNormalizer,
        aliases: &AliasTable,
        options: &ResolveOptions,
    ) -> BTreeMap<String, Result<MatchDecision, ResolveError>> {
        let unique: BTreeSet<&str> = names.into_iter().collect();
        let mut ordered: Vec<(String, &str)> = unique
            .into_iter()
            .map(|raw| (normalizer.normalize(raw).map(|n| n.text).unwrap_or_default(), raw))
            .collect();
        ordered.sort();
        ordered
            .into_iter()
            .map(|(_, raw)| (raw.to_string(), self.resolve(raw, normalizer, aliases, options)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alias_table() -> AliasTable {
        let mut t = AliasTable::default();
        t.insert("ID7", "华为技术", "huawei", false).unwrap();
        t
    }

    fn setup() -> (Registry, NameNormalizer, AliasTable) {
        let norm = NameNormalizer::default();
        let aliases = alias_table();
        let mut reg = Registry::with_alias_candidates(&aliases);
        reg.register_target("T1", "华为技术", true, &norm, &aliases).unwrap();
        reg.register_target("T2", "Huawei Technologies", false, &norm, &aliases).unwrap();
        (reg, norm, aliases)
    }

    #[test]
    fn exact_after_normalization() {
        let (mut reg, norm, aliases) = setup();
        let d = reg
            .resolve("华为技术有限公司", &norm, &aliases, &ResolveOptions::default())
            .unwrap();
        assert_eq!(d.stage, MatchStage::Exact);
        assert_eq!(d.canonical_id, "T1");
        assert_eq!(d.score, 1.0);
    }

    #[test]
    fn alias_lookup() {
        let (mut reg, norm, aliases) = setup();
        let d = reg.resolve("HUAWEI", &norm, &aliases, &ResolveOptions::default()).unwrap();
        assert_eq!(d.stage, MatchStage::Alias);
        assert_eq!(d.canonical_id, "ID7");
        assert!(reg.get("ID7").is_some());
        let again = reg.resolve("HUAWEI", &norm, &aliases, &ResolveOptions::default()).unwrap();
        assert_eq!(again.stage, MatchStage::Exact);
        assert_eq!(again.canonical_id, "ID7");
    }

    #[test]
    fn similarity_on_typo() {
        let (mut reg, norm, aliases) = setup();
        let d = reg
            .resolve("huawei technolgies", &norm, &aliases, &ResolveOptions::default())
            .unwrap();
        assert_eq!(d.stage, MatchStage::Similarity);
        assert_eq!(d.canonical_id, "T2");
        assert!(d.score >= 0.92, "{}", d.score);
        assert_eq!(d.matched_name.as_deref(), Some("huawei technologies"));
    }

    #[test]
    fn unmatched_mints_new_node() {
        let (mut reg, norm, aliases) = setup();
        let d = reg
            .resolve("completely-new-firm", &norm, &aliases, &ResolveOptions::default())
            .unwrap();
        assert_eq!(d.stage, MatchStage::NewNode);
        assert_eq!(d.canonical_id, "N000001");
        let rec = reg.get("N000001").unwrap();
        assert_eq!(rec.canonical_name, "completely-new-firm");
        let again = reg
            .resolve("completely-new-firm", &norm, &aliases, &ResolveOptions::default())
            .unwrap();
        assert_eq!(again.stage, MatchStage::Exact);
        assert_eq!(again.canonical_id, "N000001");
    }

    #[test]
    fn no_cross_script_similarity() {
        let (mut reg, norm, aliases) = setup();
        let d = reg.resolve("华为科技", &norm, &aliases, &ResolveOptions::default()).unwrap();
        // CJK input is only compared against CJK names
        assert!(matches!(d.stage, MatchStage::NewNode | MatchStage::Similarity));
        if d.stage == MatchStage::Similarity {
            assert!(script_of(d.matched_name.as_deref().unwrap()) == Script::Cjk);
        }
    }

    #[test]
    fn empty_name_propagates() {
        let (mut reg, norm, aliases) = setup();
        assert!(matches!(
            reg.resolve("有限公司", &norm, &aliases, &ResolveOptions::default()),
            Err(ResolveError::EmptyAfterNormalize(_))
        ));
    }

    #[test]
    fn resolve_all_is_order_independent() {
        let names = ["gamma corp", "Alpha Inc", "alpha", "beta", "gamma corporation", "delta"];
        let run = |order: &[&str]| {
            let (mut reg, norm, aliases) = setup();
            reg.resolve_all(order.iter().copied(), &norm, &aliases, &ResolveOptions::default())
                .into_iter()
                .map(|(k, v)| (k, v.unwrap().canonical_id))
                .collect::<Vec<_>>()
        };
        let forward = run(&names);
        let mut reversed = names;
        reversed.reverse();
        assert_eq!(forward, run(&reversed));
    }

    #[test]
    fn blocking_matches_exhaustive_on_typos() {
        let (mut reg, norm, aliases) = setup();
        let blocked = reg.clone().resolve("huawei technolgies", &norm, &aliases, &ResolveOptions::default());
        let exhaustive = reg.resolve(
            "huawei technolgies",
            &norm,
            &aliases,
            &ResolveOptions {
                exhaustive: true,
                ..ResolveOptions::default()
            },
        );
        assert_eq!(blocked.unwrap().canonical_id, exhaustive.unwrap().canonical_id);
    }
}
