use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::graph::Sckg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
}

impl NetworkStats {
    pub fn from_counts(nodes: usize, edges: usize, max_degree: usize) -> Self {
        let mean_degree = if nodes == 0 { 0.0 } else { 2.0 * edges as f64 / nodes as f64 };
        Self {
            nodes,
            edges,
            mean_degree,
            max_degree,
        }
    }
}

/// Undirected simple projection: one adjacency per unordered firm pair.
fn projected_pairs(graph: &Sckg) -> BTreeSet<(&str, &str)> {
    graph
        .edges
        .values()
        .filter(|e| e.src != e.dst)
        .map(|e| {
            let (a, b) = (e.src.as_str(), e.dst.as_str());
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

/// Degree of every node on the undirected simple projection.
pub fn degrees(graph: &Sckg) -> BTreeMap<String, usize> {
    let mut deg: BTreeMap<String, usize> = graph.nodes.keys().map(|k| (k.clone(), 0)).collect();
    for (a, b) in projected_pairs(graph) {
        *deg.entry(a.to_string()).or_default() += 1;
        *deg.entry(b.to_string()).or_default() += 1;
    }
    deg
}

pub fn network_stats(graph: &Sckg) -> NetworkStats {
    let edges = projected_pairs(graph).len();
    let deg = degrees(graph);
    NetworkStats::from_counts(deg.len(), edges, deg.values().copied().max().unwrap_or(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcdfPoint {
    pub k: usize,
    /// Fraction of nodes with degree at least `k`.
    pub p: f64,
}

/// One point per distinct degree value.
pub fn ccdf(degrees: &[usize]) -> Result<Vec<CcdfPoint>, AnalyticsError> {
    if degrees.is_empty() {
        return Err(AnalyticsError::Empty("degree list"));
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in degrees {
        *counts.entry(d).or_default() += 1;
    }
    let total = degrees.len() as f64;
    let mut at_least = degrees.len();
    let mut out = Vec::with_capacity(counts.len());
    for (k, c) in counts {
        out.push(CcdfPoint {
            k,
            p: at_least as f64 / total,
        });
        at_least -= c;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub beta: f64,
    pub intercept: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub r_squared: f64,
    pub points: usize,
}

/// OLS of log10 p on log10 k over the points with `k_min <= k <= k_max`.
pub fn fit_slope(points: &[CcdfPoint], k_min: usize, k_max: usize) -> Result<SlopeFit, AnalyticsError> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|pt| pt.k >= k_min && pt.k <= k_max && pt.k > 0 && pt.p > 0.0)
        .map(|pt| ((pt.k as f64).log10(), pt.p.log10()))
        .collect();
    if xy.len() < 3 {
        return Err(AnalyticsError::InsufficientData {
            found: xy.len(),
            needed: 3,
        });
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let sse: f64 = xy.iter().map(|p| (p.1 - intercept - beta * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(SlopeFit {
        beta,
        intercept,
        k_min,
        k_max,
        r_squared,
        points: xy.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRow {
    pub rank: usize,
    pub canonical_id: String,
    pub canonical_name: String,
    pub degree: usize,
}

/// Highest-degree firms, ties by name. Entries of `exclusions` are matched
/// against canonical ids and names.
pub fn top_degree_table(graph: &Sckg, n: usize, exclusions: &BTreeSet<String>) -> Vec<DegreeRow> {
    let deg = degrees(graph);
    let mut rows: Vec<(usize, &str, &str)> = graph
        .nodes
        .values()
        .filter(|node| !exclusions.contains(&node.canonical_id) && !exclusions.contains(&node.canonical_name))
        .map(|node| (deg[&node.canonical_id], node.canonical_name.as_str(), node.canonical_id.as_str()))
        .collect();
    rows.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)).then(a.2.cmp(b.2)));
    rows.into_iter()
        .take(n)
        .enumerate()
        .map(|(i, (degree, name, id))| DegreeRow {
            rank: i + 1,
            canonical_id: id.to_string(),
            canonical_name: name.to_string(),
            degree,
        })
        .collect()
}
