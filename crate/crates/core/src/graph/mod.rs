//! The supply-chain knowledge graph: firms as nodes, evidence-carrying
//! directed edges keyed by (src, dst, type).

mod snapshot;

pub use snapshot::{Snapshot, SnapshotHeader, SCHEMA_NAME, SCHEMA_VERSION};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::extract::RelationType;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("tier filter must be within 1..=5, got {0}")]
    InvalidTier(u8),
    #[error("{file} line {line}: {message}")]
    Load { file: String, line: usize, message: String },
    #[error("{file}: schema version {found}, expected {expected}")]
    SchemaVersion { file: String, found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirmNode {
    pub canonical_id: String,
    pub canonical_name: String,
    pub aliases: BTreeSet<String>,
    pub listed: bool,
    pub is_target: bool,
}

impl FirmNode {
    fn absorb(&mut self, other: &FirmNode) {
        if other.canonical_name < self.canonical_name {
            self.canonical_name = other.canonical_name.clone();
        }
        self.aliases.extend(other.aliases.iter().cloned());
        self.listed |= other.listed;
        self.is_target |= other.is_target;
    }
}

/// One supporting source for an edge. Field order gives the canonical
/// evidence order (by snippet id first).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Evidence {
    /// Snippet id, or chunk id for full-text evidence.
    pub snippet_id: String,
    pub source_url: String,
    pub domain: String,
    pub tier: u8,
    pub retrieved_at: DateTime<Utc>,
    pub evidence_text: String,
    /// Overall rank of the originating search result for its query.
    pub rank: u32,
    pub template_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeType {
    Supplier,
    Partner,
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeType::Supplier => "supplier",
            EdgeType::Partner => "partner",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub src: String,
    pub dst: String,
    pub relation_type: EdgeType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplyEdge {
    pub src: String,
    pub dst: String,
    pub relation_type: EdgeType,
    pub products: BTreeSet<String>,
    /// Sorted and deduplicated.
    pub evidence: Vec<Evidence>,
    pub raw_count: u64,
    pub best_tier: u8,
}

impl SupplyEdge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            src: self.src.clone(),
            dst: self.dst.clone(),
            relation_type: self.relation_type,
        }
    }

    fn add_evidence(&mut self, evidence: impl IntoIterator<Item = Evidence>) {
        self.evidence.extend(evidence);
        self.evidence.sort();
        self.evidence.dedup();
        self.best_tier = self.evidence.iter().map(|e| e.tier).min().unwrap_or(5).min(self.best_tier);
    }
}

/// Counters for relations that entered the build but produced no edge.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphLedger {
    /// Every relation offered to the build, including dropped ones.
    pub raw_in: u64,
    pub unknown_dropped: u64,
    pub empty_name: u64,
    pub self_loops: u64,
    pub no_evidence: u64,
}

impl GraphLedger {
    pub fn merge(&mut self, other: &GraphLedger) {
        self.raw_in += other.raw_in;
        self.unknown_dropped += other.unknown_dropped;
        self.empty_name += other.empty_name;
        self.self_loops += other.self_loops;
        self.no_evidence += other.no_evidence;
    }

    pub fn dropped(&self) -> u64 {
        self.unknown_dropped + self.empty_name + self.self_loops + self.no_evidence
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientError {
    Unknown,
    SelfLoop,
}

/// Map a relation around `target` onto a stored edge direction. Goods
/// flow from src to dst; partner edges put the smaller id first.
pub fn orient<'a>(
    target: &'a str,
    partner: &'a str,
    relation_type: RelationType,
) -> Result<(&'a str, &'a str, EdgeType), OrientError> {
    if target == partner {
        return Err(OrientError::SelfLoop);
    }
    match relation_type {
        RelationType::Supplier => Ok((partner, target, EdgeType::Supplier)),
        RelationType::Customer => Ok((target, partner, EdgeType::Supplier)),
        RelationType::Partner if target < partner => Ok((target, partner, EdgeType::Partner)),
        RelationType::Partner => Ok((partner, target, EdgeType::Partner)),
        RelationType::Unknown => Err(OrientError::Unknown),
    }
}

/// How unique relations are counted for yield accounting. The graph itself
/// is always keyed by (src, dst, type).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniqueKey {
    /// Unordered firm pair.
    Pair,
    #[default]
    PairAndType,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sckg {
    pub nodes: BTreeMap<String, FirmNode>,
    pub edges: BTreeMap<EdgeKey, SupplyEdge>,
    pub ledger: GraphLedger,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredView {
    pub graph: Sckg,
    pub removed_edges: usize,
    pub removed_nodes: usize,
}

impl Sckg {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn upsert_node(&mut self, node: FirmNode) {
        match self.nodes.get_mut(&node.canonical_id) {
            Some(existing) => existing.absorb(&node),
            None => {
                self.nodes.insert(node.canonical_id.clone(), node);
            }
        }
    }

    /// Insert one oriented relation. Both endpoints are upserted; an edge
    /// with an existing key absorbs the products and evidence.
    pub fn merge_edge(
        &mut self,
        src: FirmNode,
        dst: FirmNode,
        relation_type: EdgeType,
        product: &str,
        evidence: Vec<Evidence>,
    ) {
        let key = EdgeKey {
            src: src.canonical_id.clone(),
            dst: dst.canonical_id.clone(),
            relation_type,
        };
        self.upsert_node(src);
        self.upsert_node(dst);
        let product = product.trim();
        let edge = self.edges.entry(key.clone()).or_insert_with(|| SupplyEdge {
            src: key.src.clone(),
            dst: key.dst.clone(),
            relation_type,
            products: BTreeSet::new(),
            evidence: Vec::new(),
            raw_count: 0,
            best_tier: 5,
        });
        if !product.is_empty() {
            edge.products.insert(product.to_string());
        }
        edge.raw_count += 1;
        edge.add_evidence(evidence);
    }

    /// Union of two graphs; commutative and associative.
    pub fn merge(mut self, other: Sckg) -> Sckg {
        for node in other.nodes.into_values() {
            self.upsert_node(node);
        }
        for (key, edge) in other.edges {
            match self.edges.get_mut(&key) {
                Some(existing) => {
                    existing.products.extend(edge.products);
                    existing.raw_count += edge.raw_count;
                    existing.best_tier = existing.best_tier.min(edge.best_tier);
                    existing.add_evidence(edge.evidence);
                }
                None => {
                    self.edges.insert(key, edge);
                }
            }
        }
        self.ledger.merge(&other.ledger);
        self
    }

    pub fn raw_count_total(&self) -> u64 {
        self.edges.values().map(|e| e.raw_count).sum()
    }

    /// raw_in = merged raw counts + every drop counter.
    pub fn conservation_holds(&self) -> bool {
        self.ledger.raw_in == self.raw_count_total() + self.ledger.dropped()
    }

    pub fn unique_relations(&self, mode: UniqueKey) -> usize {
        match mode {
            UniqueKey::PairAndType => self.edges.len(),
            UniqueKey::Pair => self
                .edges
                .keys()
                .map(|k| if k.src <= k.dst { (&k.src, &k.dst) } else { (&k.dst, &k.src) })
                .collect::<BTreeSet<_>>()
                .len(),
        }
    }

    /// Subgraph over the given edges and their endpoints.
    fn restrict(&self, keep: impl Fn(&SupplyEdge) -> bool) -> Sckg {
        let edges: BTreeMap<EdgeKey, SupplyEdge> =
            self.edges.iter().filter(|(_, e)| keep(e)).map(|(k, e)| (k.clone(), e.clone())).collect();
        let ids: BTreeSet<&str> = edges.values().flat_map(|e| [e.src.as_str(), e.dst.as_str()]).collect();
        let nodes = self
            .nodes
            .iter()
            .filter(|(id, _)| ids.contains(id.as_str()))
            .map(|(k, n)| (k.clone(), n.clone()))
            .collect();
        Sckg {
            nodes,
            edges,
            ledger: self.ledger,
        }
    }

    /// Edges with some evidence of tier `k` or better, plus their endpoints.
    pub fn filter_by_tier(&self, k: u8) -> Result<FilteredView, GraphError> {
        if !(1..=5).contains(&k) {
            return Err(GraphError::InvalidTier(k));
        }
        let graph = self.restrict(|e| e.best_tier <= k);
        Ok(FilteredView {
            removed_edges: self.edges.len() - graph.edges.len(),
            removed_nodes: self.nodes.len() - graph.nodes.len(),
            graph,
        })
    }

    /// Edges touching at least one listed firm, plus their endpoints.
    pub fn listed_view(&self) -> Sckg {
        let listed = |id: &str| self.nodes.get(id).is_some_and(|n| n.listed);
        self.restrict(|e| listed(&e.src) || listed(&e.dst))
    }
}
