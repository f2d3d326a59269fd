use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnalyticsError, NetworkStats};
use crate::resolve::{AliasTable, NameNormalizer};

/// A benchmark edge list reduced to firm keys and typed edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BenchmarkGraph {
    pub nodes: BTreeSet<String>,
    /// (src, dst, relation_type) with names resolved to firm keys.
    pub edges: BTreeSet<(String, String, String)>,
    pub self_loops: u64,
}

#[derive(Debug, Deserialize)]
struct Row {
    src_name: String,
    dst_name: String,
    relation_type: String,
    #[serde(default)]
    #[allow(dead_code)]
    year: Option<String>,
}

impl BenchmarkGraph {
    pub fn load(path: &Path, normalizer: &NameNormalizer, aliases: &AliasTable) -> Result<Self, AnalyticsError> {
        Self::from_csv_str(&std::fs::read_to_string(path)?, normalizer, aliases)
    }

    /// CSV with header `src_name,dst_name,relation_type,year`. Names are
    /// normalized and mapped through the alias table when listed there.
    pub fn from_csv_str(text: &str, normalizer: &NameNormalizer, aliases: &AliasTable) -> Result<Self, AnalyticsError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut graph = Self::default();
        let key = |raw: &str, line: usize| -> Result<String, AnalyticsError> {
            let n = normalizer.normalize(raw).map_err(|e| AnalyticsError::Benchmark {
                line,
                message: e.to_string(),
            })?;
            Ok(aliases.lookup(&n.text).map(str::to_string).unwrap_or(n.text))
        };
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| AnalyticsError::Benchmark {
                line,
                message: e.to_string(),
            })?;
            let src = key(&row.src_name, line)?;
            let dst = key(&row.dst_name, line)?;
            if src == dst {
                graph.self_loops += 1;
                continue;
            }
            graph.nodes.insert(src.clone());
            graph.nodes.insert(dst.clone());
            graph.edges.insert((src, dst, row.relation_type.to_lowercase()));
        }
        if graph.nodes.is_empty() {
            return Err(AnalyticsError::Empty("benchmark edge list"));
        }
        Ok(graph)
    }

    /// Same undirected simple-projection convention as the graph views.
    pub fn stats(&self) -> NetworkStats {
        let pairs: BTreeSet<(&str, &str)> = self
            .edges
            .iter()
            .map(|(a, b, _)| if a < b { (a.as_str(), b.as_str()) } else { (b.as_str(), a.as_str()) })
            .collect();
        let mut deg: BTreeMap<&str, usize> = BTreeMap::new();
        for (a, b) in &pairs {
            *deg.entry(a).or_default() += 1;
            *deg.entry(b).or_default() += 1;
        }
        NetworkStats::from_counts(self.nodes.len(), pairs.len(), deg.values().copied().max().unwrap_or(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub firm_ratio: f64,
    pub edge_ratio: f64,
    pub view: NetworkStats,
    pub benchmark: NetworkStats,
}

pub fn coverage_compare(view: &NetworkStats, benchmark: &NetworkStats) -> Result<Coverage, AnalyticsError> {
    if benchmark.nodes == 0 || benchmark.edges == 0 {
        return Err(AnalyticsError::Empty("benchmark"));
    }
    Ok(Coverage {
        firm_ratio: view.nodes as f64 / benchmark.nodes as f64,
        edge_ratio: view.edges as f64 / benchmark.edges as f64,
        view: *view,
        benchmark: *benchmark,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_normalizes_names() {
        let mut aliases = AliasTable::default();
        aliases.insert("ID7", "华为技术", "huawei", true).unwrap();
        let csv = "src_name,dst_name,relation_type,year\n\
                   Huawei,比亚迪股份有限公司,supplier,2021\n\
                   华为技术有限公司,比亚迪,supplier,2022\n\
                   Acme Inc.,ACME,supplier,2022\n\
                   Acme,Beta Ltd,customer,\n";
        let g = BenchmarkGraph::from_csv_str(csv, &NameNormalizer::default(), &aliases).unwrap();
        assert_eq!(g.nodes.len(), 4);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.self_loops, 1);
        let s = g.stats();
        assert_eq!((s.nodes, s.edges), (4, 2));
    }

    #[test]
    fn empty_benchmark_is_an_error() {
        let csv = "src_name,dst_name,relation_type,year\n";
        assert!(BenchmarkGraph::from_csv_str(csv, &NameNormalizer::default(), &AliasTable::default()).is_err());
        let zero = NetworkStats::from_counts(0, 0, 0);
        assert!(coverage_compare(&zero, &zero).is_err());
    }

    #[test]
    fn bad_row_reports_line() {
        let csv = "src_name,dst_name,relation_type,year\na,b,supplier,1\n有限公司,b,supplier,1\n";
        match BenchmarkGraph::from_csv_str(csv, &NameNormalizer::default(), &AliasTable::default()) {
            Err(AnalyticsError::Benchmark { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn self_comparison_is_unity() {
        let s = NetworkStats::from_counts(10, 12, 4);
        let c = coverage_compare(&s, &s).unwrap();
        assert_eq!((c.firm_ratio, c.edge_ratio), (1.0, 1.0));
    }
}
