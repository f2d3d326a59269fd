use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    read_json, read_jsonl, thread_pool, to_jsonl, write_file, write_json, Arm, IngestLedger, Layout, PipelineConfig,
    PipelineError, Resources,
};
use crate::analytics::ArmLedger;
use crate::credibility::{extract_domain, TierLabeler};
use crate::extract::{ExtractionLedger, RawRelation};
use crate::graph::{orient, EdgeKey, EdgeType, Evidence, FirmNode, GraphLedger, OrientError, Sckg, Snapshot};
use crate::ingest::{SnippetRecord, SourcedChunk};
use crate::resolve::{drop_unknown, FirmRecord, MatchDecision, Registry, ResolveOptions};

const EXCERPT_CHARS: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildLedger {
    pub graph: GraphLedger,
    pub cost: ArmLedger,
    pub extraction: ExtractionLedger,
    pub nodes: u64,
    pub edges: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildSummary {
    pub ledgers: BTreeMap<String, BuildLedger>,
}

/// What the graph needs to know about one evidence id.
struct EvidenceInfo {
    source_url: String,
    retrieved_at: DateTime<Utc>,
    text: String,
    rank: u32,
    template_id: String,
}

fn excerpt(text: &str) -> String {
    text.chars().take(EXCERPT_CHARS).collect()
}

fn evidence_index(res: &Resources, layout: &Layout, arm: Arm) -> Result<BTreeMap<String, EvidenceInfo>, PipelineError> {
    let template = |target: &str, query: &str| res.template_of(target, query).unwrap_or_else(|| query.to_string());
    let mut out = BTreeMap::new();
    match arm {
        Arm::Snippet => {
            for s in read_jsonl::<SnippetRecord>(&layout.snippets())? {
                let info = EvidenceInfo {
                    template_id: template(&s.target_id, &s.query),
                    source_url: s.source_url,
                    retrieved_at: s.retrieved_at,
                    text: excerpt(&s.snippet_text),
                    rank: s.position,
                };
                out.insert(s.snippet_id, info);
            }
        }
        Arm::Fulltext => {
            for c in read_jsonl::<SourcedChunk>(&layout.chunks())? {
                let info = EvidenceInfo {
                    template_id: template(&c.target_id, &c.query),
                    source_url: c.chunk.source_url,
                    retrieved_at: c.retrieved_at,
                    text: excerpt(&c.chunk.text),
                    rank: c.position,
                };
                out.insert(c.chunk_id, info);
            }
        }
        Arm::Both => unreachable!("single arm expected"),
    }
    Ok(out)
}

fn firm_node(rec: &FirmRecord) -> FirmNode {
    FirmNode {
        canonical_id: rec.canonical_id.clone(),
        canonical_name: rec.canonical_name.clone(),
        aliases: rec.aliases.clone(),
        listed: rec.listed,
        is_target: rec.is_target,
    }
}

/// A relation ready to merge.
struct Oriented {
    target_id: String,
    partner_id: String,
    src: String,
    dst: String,
    edge_type: EdgeType,
    product: String,
    evidence: Vec<Evidence>,
}

/// Resolve, label and merge the extracted relations of each arm into a
/// graph snapshot, with its match audit and ledgers.
pub fn cmd_build(cfg: &PipelineConfig) -> Result<BuildSummary, PipelineError> {
    let res = Resources::load(cfg)?;
    let layout = Layout::new(&cfg.output_dir);
    let pool = thread_pool(cfg.concurrency)?;
    let ingest: IngestLedger = read_json(&layout.ingest_ledger())?;
    let mut ledgers = BTreeMap::new();
    for arm in cfg.arm.parts() {
        let relations: Vec<RawRelation> = read_jsonl(&layout.relations(arm))?;
        let extraction: ExtractionLedger = read_json(&layout.extract_ledger(arm))?;
        let evidence = evidence_index(&res, &layout, arm)?;
        let (graph, audit, partners, per_target) = build_graph(cfg, &res, relations, &evidence, &pool)?;

        let requests = match arm {
            Arm::Fulltext => ingest.requests + ingest.fetch.attempts,
            _ => ingest.requests,
        };
        let evidence_items = match arm {
            Arm::Fulltext => ingest.fetch.success,
            _ => ingest.snippets,
        };
        let cost = ArmLedger {
            targets: res.targets.len() as u64,
            requests,
            evidence_items,
            raw_relations: graph.ledger.raw_in,
            unique_relations: graph.unique_relations(cfg.unique_key) as u64,
            target_relation_total: per_target,
            unique_partners: partners,
            input_tokens: extraction.input_tokens,
        };
        let ledger = BuildLedger {
            graph: graph.ledger,
            cost,
            extraction,
            nodes: graph.node_count() as u64,
            edges: graph.edge_count() as u64,
        };
        let snapshot = Snapshot::new(graph, cfg.build_hash(arm)?);
        snapshot
            .write(&layout.graph_dir(arm))
            .map_err(|e| PipelineError::data(&layout.graph_dir(arm), e))?;
        write_file(&layout.match_audit(arm), to_jsonl(&audit))?;
        write_json(&layout.build_ledger(arm), &ledger)?;
        ledgers.insert(arm.as_str().to_string(), ledger);
    }
    Ok(BuildSummary { ledgers })
}

type Built = (Sckg, Vec<MatchDecision>, u64, u64);

fn build_graph(
    cfg: &PipelineConfig,
    res: &Resources,
    relations: Vec<RawRelation>,
    evidence: &BTreeMap<String, EvidenceInfo>,
    pool: &rayon::ThreadPool,
) -> Result<Built, PipelineError> {
    let mut ledger = GraphLedger {
        raw_in: relations.len() as u64,
        ..GraphLedger::default()
    };
    let (kept, unknown) = drop_unknown(relations);
    ledger.unknown_dropped = unknown;

    let mut registry = Registry::with_alias_candidates(&res.aliases);
    let mut targets: Vec<_> = res.targets.iter().collect();
    targets.sort_by(|a, b| a.id.cmp(&b.id));
    for t in targets {
        registry
            .register_target(&t.id, &t.name, t.listed, &res.normalizer, &res.aliases)
            .map_err(|e| PipelineError::data(&cfg.targets, format!("target `{}`: {e}", t.id)))?;
    }
    let options = ResolveOptions {
        threshold: cfg.resolve_threshold,
        exhaustive: false,
    };
    let decisions = registry.resolve_all(
        kept.iter().map(|r| r.partner_name.as_str()),
        &res.normalizer,
        &res.aliases,
        &options,
    );
    let audit: Vec<MatchDecision> = decisions.values().filter_map(|d| d.as_ref().ok().cloned()).collect();

    let mut labeler = TierLabeler::new(&res.aliases, &res.normalizer, &res.credibility);
    let mut domains: BTreeMap<&str, String> = BTreeMap::new();
    let mut oriented = Vec::with_capacity(kept.len());
    for rel in &kept {
        let Some(Ok(decision)) = decisions.get(&rel.partner_name) else {
            ledger.empty_name += 1;
            continue;
        };
        let Some(target) = res.target(&rel.target_id) else {
            return Err(PipelineError::data(
                &cfg.targets,
                format!("relation from unknown target `{}`", rel.target_id),
            ));
        };
        let (src, dst, edge_type) = match orient(&rel.target_id, &decision.canonical_id, rel.relation_type) {
            Ok(o) => o,
            Err(OrientError::SelfLoop) => {
                ledger.self_loops += 1;
                continue;
            }
            Err(OrientError::Unknown) => {
                ledger.unknown_dropped += 1;
                continue;
            }
        };
        let mut items = Vec::new();
        for id in &rel.evidence_refs {
            let Some(info) = evidence.get(id) else {
                log::warn!("evidence `{id}` not in corpus");
                continue;
            };
            let domain = domains
                .entry(info.source_url.as_str())
                .or_insert_with(|| extract_domain(&info.source_url).unwrap_or_default())
                .clone();
            let tier = labeler.label(&domain, &target.name, &rel.partner_name);
            items.push(Evidence {
                snippet_id: id.clone(),
                source_url: info.source_url.clone(),
                domain,
                tier: tier.tier,
                retrieved_at: info.retrieved_at,
                evidence_text: info.text.clone(),
                rank: info.rank,
                template_id: info.template_id.clone(),
            });
        }
        if items.is_empty() {
            ledger.no_evidence += 1;
            continue;
        }
        oriented.push(Oriented {
            target_id: rel.target_id.clone(),
            partner_id: decision.canonical_id.clone(),
            src: src.to_string(),
            dst: dst.to_string(),
            edge_type,
            product: rel.product.clone(),
            evidence: items,
        });
    }

    let partners: BTreeSet<&str> = oriented.iter().map(|o| o.partner_id.as_str()).collect();
    let per_target: BTreeSet<(&str, EdgeKey)> = oriented
        .iter()
        .map(|o| {
            (
                o.target_id.as_str(),
                EdgeKey {
                    src: o.src.clone(),
                    dst: o.dst.clone(),
                    relation_type: o.edge_type,
                },
            )
        })
        .collect();
    let per_target_total = match cfg.unique_key {
        crate::graph::UniqueKey::PairAndType => per_target.len(),
        crate::graph::UniqueKey::Pair => per_target
            .iter()
            .map(|(t, k)| (*t, (&k.src).min(&k.dst).clone(), (&k.src).max(&k.dst).clone()))
            .collect::<BTreeSet<_>>()
            .len(),
    };

    // partial graphs over disjoint slices, merged pairwise
    let nodes: BTreeMap<&str, FirmNode> = registry.records().map(|r| (r.canonical_id.as_str(), firm_node(r))).collect();
    let part = oriented.len().div_ceil(cfg.concurrency.max(1)).max(1);
    let mut graph = pool.install(|| {
        oriented
            .par_chunks(part)
            .map(|slice| {
                let mut g = Sckg::new();
                for o in slice {
                    g.merge_edge(
                        nodes[o.src.as_str()].clone(),
                        nodes[o.dst.as_str()].clone(),
                        o.edge_type,
                        &o.product,
                        o.evidence.clone(),
                    );
                }
                g
            })
            .reduce(Sckg::new, Sckg::merge)
    });
    graph.ledger = ledger;
    debug_assert!(graph.conservation_holds());
    Ok((graph, audit, partners.len() as u64, per_target_total as u64))
}
