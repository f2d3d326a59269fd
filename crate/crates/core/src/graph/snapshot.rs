use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EdgeKey, FirmNode, GraphError, GraphLedger, Sckg, SupplyEdge};

pub const SCHEMA_NAME: &str = "sckg-snapshot";
pub const SCHEMA_VERSION: u32 = 1;

pub const NODES_FILE: &str = "nodes.jsonl";
pub const EDGES_FILE: &str = "edges.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub schema: String,
    pub version: u32,
    pub kind: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<GraphLedger>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub graph: Sckg,
    pub config_hash: String,
}

fn header(kind: &str, config_hash: &str, ledger: Option<GraphLedger>) -> SnapshotHeader {
    SnapshotHeader {
        schema: SCHEMA_NAME.into(),
        version: SCHEMA_VERSION,
        kind: kind.into(),
        config_hash: config_hash.into(),
        ledger,
    }
}

fn push_line<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("snapshot values serialize"));
    out.push('\n');
}

impl Snapshot {
    pub fn new(graph: Sckg, config_hash: impl Into<String>) -> Self {
        Self {
            graph,
            config_hash: config_hash.into(),
        }
    }

    pub fn nodes_jsonl(&self) -> String {
        let mut out = String::new();
        push_line(&mut out, &header("nodes", &self.config_hash, None));
        for node in self.graph.nodes.values() {
            push_line(&mut out, node);
        }
        out
    }

    pub fn edges_jsonl(&self) -> String {
        let mut out = String::new();
        push_line(&mut out, &header("edges", &self.config_hash, Some(self.graph.ledger)));
        for edge in self.graph.edges.values() {
            push_line(&mut out, edge);
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), GraphError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(NODES_FILE), self.nodes_jsonl())?;
        fs::write(dir.join(EDGES_FILE), self.edges_jsonl())?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, GraphError> {
        let nodes = fs::read_to_string(dir.join(NODES_FILE))?;
        let edges = fs::read_to_string(dir.join(EDGES_FILE))?;
        Self::from_jsonl(&nodes, &edges)
    }

    pub fn from_jsonl(nodes: &str, edges: &str) -> Result<Self, GraphError> {
        let (node_header, node_rows) = parse_file::<FirmNode>(NODES_FILE, "nodes", nodes)?;
        let (edge_header, edge_rows) = parse_file::<SupplyEdge>(EDGES_FILE, "edges", edges)?;
        if node_header.config_hash != edge_header.config_hash {
            return Err(GraphError::Load {
                file: EDGES_FILE.into(),
                line: 1,
                message: "config hash differs from nodes file".into(),
            });
        }
        let mut graph = Sckg {
            ledger: edge_header.ledger.unwrap_or_default(),
            ..Sckg::default()
        };
        for (line, node) in node_rows {
            if graph.nodes.insert(node.canonical_id.clone(), node).is_some() {
                return Err(load_err(NODES_FILE, line, "duplicate canonical_id"));
            }
        }
        for (line, mut edge) in edge_rows {
            if !graph.nodes.contains_key(&edge.src) || !graph.nodes.contains_key(&edge.dst) {
                return Err(load_err(EDGES_FILE, line, "edge endpoint not in nodes file"));
            }
            if edge.evidence.is_empty() {
                return Err(load_err(EDGES_FILE, line, "edge without evidence"));
            }
            edge.evidence.sort();
            edge.evidence.dedup();
            let key: EdgeKey = edge.key();
            if graph.edges.insert(key, edge).is_some() {
                return Err(load_err(EDGES_FILE, line, "duplicate edge key"));
            }
        }
        Ok(Self {
            graph,
            config_hash: node_header.config_hash,
        })
    }
}

fn load_err(file: &str, line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Load {
        file: file.into(),
        line,
        message: message.into(),
    }
}

fn parse_file<T: for<'de> Deserialize<'de>>(
    file: &str,
    kind: &str,
    text: &str,
) -> Result<(SnapshotHeader, Vec<(usize, T)>), GraphError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| load_err(file, 1, "missing header line"))?;
    let head: SnapshotHeader =
        serde_json::from_str(first).map_err(|e| load_err(file, 1, format!("bad header: {e}")))?;
    if head.schema != SCHEMA_NAME {
        return Err(load_err(file, 1, format!("unknown schema `{}`", head.schema)));
    }
    if head.version != SCHEMA_VERSION {
        return Err(GraphError::SchemaVersion {
            file: file.into(),
            found: head.version,
            expected: SCHEMA_VERSION,
        });
    }
    if head.kind != kind {
        return Err(load_err(file, 1, format!("expected kind `{kind}`, found `{}`", head.kind)));
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(line).map_err(|e| load_err(file, n, e.to_string()))?;
        rows.push((n, row));
    }
    Ok((head, rows))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{ev, node};
    use super::super::EdgeType;
    use super::*;

    fn sample() -> Sckg {
        let mut g = Sckg::new();
        g.ledger.raw_in = 4;
        g.ledger.self_loops = 1;
        g.ledger.unknown_dropped = 1;
        g.merge_edge(node("A", true), node("B", false), EdgeType::Supplier, "芯片", vec![ev("s2", 3), ev("s1", 1)]);
        g.merge_edge(node("B", false), node("C", false), EdgeType::Partner, "", vec![ev("s3", 5)]);
        g
    }

    #[test]
    fn empty_graph_is_headers_only() {
        let snap = Snapshot::new(Sckg::new(), "h");
        assert_eq!(snap.nodes_jsonl().lines().count(), 1);
        assert_eq!(snap.edges_jsonl().lines().count(), 1);
        let back = Snapshot::from_jsonl(&snap.nodes_jsonl(), &snap.edges_jsonl()).unwrap();
        assert_eq!(back, snap);
    }

    #[test]
    fn round_trip_and_canonical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let snap = Snapshot::new(sample(), "abc123");
        snap.write(dir.path()).unwrap();
        let back = Snapshot::load(dir.path()).unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.nodes_jsonl(), snap.nodes_jsonl());
        assert_eq!(back.edges_jsonl(), snap.edges_jsonl());
        assert_eq!(back.graph.ledger.self_loops, 1);
    }

    #[test]
    fn version_mismatch_is_reported() {
        let snap = Snapshot::new(sample(), "h");
        let nodes = snap.nodes_jsonl().replacen("\"version\":1", "\"version\":9", 1);
        assert!(matches!(
            Snapshot::from_jsonl(&nodes, &snap.edges_jsonl()),
            Err(GraphError::SchemaVersion { found: 9, .. })
        ));
    }

    #[test]
    fn malformed_line_names_its_number() {
        let snap = Snapshot::new(sample(), "h");
        let mut edges = snap.edges_jsonl();
        edges.push_str("{not json}\n");
        match Snapshot::from_jsonl(&snap.nodes_jsonl(), &edges) {
            Err(GraphError::Load { file, line, .. }) => {
                assert_eq!(file, EDGES_FILE);
                assert_eq!(line, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_endpoint_rejected() {
        let snap = Snapshot::new(sample(), "h");
        let nodes: String = snap.nodes_jsonl().lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            Snapshot::from_jsonl(&nodes, &snap.edges_jsonl()),
            Err(GraphError::Load { line: 2, .. })
        ));
    }
}
