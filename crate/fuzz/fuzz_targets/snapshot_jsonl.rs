#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::graph::Snapshot;

// nodes and edges files separated by a NUL byte
fuzz_target!(|data: &str| {
    let (nodes, edges) = data.split_once('\0').unwrap_or((data, ""));
    if let Ok(snap) = Snapshot::from_jsonl(nodes, edges) {
        assert!(snap.graph.node_count() >= snap.graph.edges.values().count().min(1));
    }
});
