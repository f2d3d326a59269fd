use std::fs;
use std::path::{Path, PathBuf};

use sckg_core::analytics::{cost_report, network_stats};
use sckg_core::graph::Snapshot;
use sckg_core::ingest::{FixtureHit, TemplateSet};
use sckg_core::pipeline::{
    cmd_build, cmd_extract, cmd_ingest, cmd_report, view, Arm, BuildLedger, Layout, PipelineConfig, PipelineError,
    ReportKind, ReportRequest,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn config_in(corpus: &Path, out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(&corpus.join("config.toml")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn run_all(cfg: &PipelineConfig) {
    cmd_ingest(cfg).unwrap();
    cmd_extract(cfg).unwrap();
    cmd_build(cfg).unwrap();
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn firm3_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("firm3");
    let cfg = config_in(&corpus, dir.path());
    run_all(&cfg);
    let layout = Layout::new(dir.path());
    assert_eq!(read(&layout.manifest()).lines().count(), 15);
    for arm in [Arm::Snippet, Arm::Fulltext] {
        let golden = corpus.join("golden").join(arm.as_str());
        assert_eq!(read(&layout.relations(arm)), read(&golden.join("relations.jsonl")), "{arm:?} relations");
        for file in ["nodes.jsonl", "edges.jsonl"] {
            assert_eq!(read(&layout.graph_dir(arm).join(file)), read(&golden.join(file)), "{arm:?} {file}");
        }
    }
}

#[test]
fn rerun_skips_completed_pairs_and_tolerates_torn_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(&fixture("firm3"), dir.path());
    let layout = Layout::new(dir.path());
    let first = cmd_ingest(&cfg).unwrap();
    assert_eq!((first.ran, first.skipped), (15, 0));
    let snippets = read(&layout.snippets());

    let mut manifest = read(&layout.manifest());
    manifest.push_str("{\"target_id\":\"F001\",\"templ");
    fs::write(layout.manifest(), manifest).unwrap();

    let second = cmd_ingest(&cfg).unwrap();
    assert_eq!((second.ran, second.skipped), (0, 15));
    assert_eq!(second.ledger, first.ledger);
    assert_eq!(read(&layout.snippets()), snippets);
    let ids: Vec<&str> = snippets.lines().map(|l| &l[..l.find(",\"").unwrap()]).collect();
    let mut dedup = ids.clone();
    dedup.dedup();
    assert_eq!(ids.len(), dedup.len());
}

#[test]
fn malformed_output_is_counted_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(&fixture("corpus20"), dir.path());
    cmd_ingest(&cfg).unwrap();
    let summary = cmd_extract(&cfg).unwrap();
    let snippet = &summary.ledgers["snippet"];
    assert!(snippet.rejections.total() > 0);
    assert!(snippet.accepted > 0);
    assert!(summary.ledgers.contains_key("fulltext"));
}

#[test]
fn cost_report_matches_hand_computed_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(&fixture("firm3"), dir.path());
    run_all(&cfg);
    let layout = Layout::new(dir.path());
    let ledger = |arm| -> BuildLedger { serde_json::from_str(&read(&layout.build_ledger(arm))).unwrap() };
    let (s, f) = (ledger(Arm::Snippet).cost, ledger(Arm::Fulltext).cost);

    let out = cmd_report(&cfg, &ReportRequest::new(ReportKind::Cost)).unwrap();
    let report = cost_report(s, Some(f));
    assert_eq!(out.json, serde_json::to_value(&report).unwrap());

    let ratio = report.ratio.unwrap();
    let div = |a: u64, b: u64| a as f64 / b as f64;
    assert_eq!(ratio.requests, Some(div(f.requests, s.requests)));
    assert_eq!(ratio.input_tokens, Some(div(f.input_tokens, s.input_tokens)));
    let per_target = |l: &sckg_core::analytics::ArmLedger| l.target_relation_total as f64 / l.targets as f64;
    assert!((ratio.relations_per_target.unwrap() - per_target(&f) / per_target(&s)).abs() < 1e-12);
    let dup = 1.0 - div(s.unique_relations, s.raw_relations);
    assert!((report.snippet.duplicate_rate.unwrap() - dup).abs() < 1e-12);
    assert!(dir.path().join("reports/cost-both.json").is_file());
}

#[test]
fn stats_report_applies_tier_then_listed_view() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(&fixture("corpus20"), dir.path());
    run_all(&cfg);
    let layout = Layout::new(dir.path());
    let snap = Snapshot::load(&layout.graph_dir(Arm::Snippet)).unwrap();
    let mut last = usize::MAX;
    for tier in 1..=5u8 {
        let req = ReportRequest {
            arm: Some(Arm::Snippet),
            tier: Some(tier),
            listed: true,
            ..ReportRequest::new(ReportKind::Stats)
        };
        let out = cmd_report(&cfg, &req).unwrap();
        assert_eq!(out.stem, format!("stats-snippet-tier{tier}-listed"));
        let expect = view(&snap.graph, Some(tier), true).unwrap();
        // stats count the undirected simple projection
        let stats = network_stats(&expect);
        assert_eq!(out.json["snippet"]["edges"], stats.edges);
        assert_eq!(out.json["snippet"]["nodes"], stats.nodes);
        assert!(stats.edges <= expect.edge_count());
        assert!(expect.edge_count() <= snap.graph.edge_count());
        if last != usize::MAX {
            assert!(expect.edge_count() >= last);
        }
        last = expect.edge_count();
    }
    let bad = ReportRequest {
        tier: Some(6),
        ..ReportRequest::new(ReportKind::Stats)
    };
    assert_eq!(cmd_report(&cfg, &bad).unwrap_err().exit_code(), 2);
}

#[test]
fn permuted_targets_give_identical_snapshot() {
    let corpus = fixture("firm3");
    let work = tempfile::tempdir().unwrap();
    let copy = work.path().join("corpus");
    copy_dir(&corpus, &copy);
    let text = read(&corpus.join("targets.tsv"));
    let mut lines: Vec<&str> = text.lines().collect();
    lines[1..].reverse();
    fs::write(copy.join("targets.tsv"), lines.join("\n") + "\n").unwrap();

    let a = config_in(&corpus, &work.path().join("a"));
    let b = config_in(&copy, &work.path().join("b"));
    run_all(&a);
    run_all(&b);
    for arm in [Arm::Snippet, Arm::Fulltext] {
        for file in ["nodes.jsonl", "edges.jsonl"] {
            let pa = Layout::new(&a.output_dir).graph_dir(arm).join(file);
            let pb = Layout::new(&b.output_dir).graph_dir(arm).join(file);
            assert_eq!(read(&pa), read(&pb), "{arm:?} {file}");
        }
    }
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let dest = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &dest);
        } else {
            fs::copy(entry.path(), dest).unwrap();
        }
    }
}

/// A snippet-only corpus: every target gets `bodies` as its hits for each
/// default template.
fn mini_corpus(root: &Path, targets: &[(&str, &str)], bodies: &[&str]) -> PipelineConfig {
    fs::create_dir_all(root.join("search")).unwrap();
    let mut tsv = String::from("target_id\tname\tlisted_flag\n");
    for (id, name) in targets {
        tsv.push_str(&format!("{id}\t{name}\t1\n"));
        let mut lines = String::new();
        for t in TemplateSet::default_zh().iter() {
            for (i, body) in bodies.iter().enumerate() {
                let hit = FixtureHit {
                    target_id: id.to_string(),
                    query: t.render(name),
                    retrieved_at: "2024-05-06T08:00:00Z".parse().unwrap(),
                    title: format!("{name} {i}"),
                    snippet_text: body.replace("{T}", name),
                    source_url: format!("https://news{i}.example.com/{id}/{}", t.id),
                    published_at: None,
                    page: 1,
                    rank: i as u32 + 1,
                };
                lines.push_str(&serde_json::to_string(&hit).unwrap());
                lines.push('\n');
            }
        }
        fs::write(root.join("search").join(format!("{id}.jsonl")), lines).unwrap();
    }
    fs::write(root.join("targets.tsv"), tsv).unwrap();
    let toml = "mode = \"replay\"\narm = \"snippet\"\ntargets = \"targets.tsv\"\ntop_n = 10\n\
                output_dir = \"out\"\nclock = \"2024-05-06T08:00:00Z\"\n[replay]\nsearch_dir = \"search\"\n";
    fs::write(root.join("config.toml"), toml).unwrap();
    PipelineConfig::load(&root.join("config.toml")).unwrap()
}

#[test]
fn empty_target_list_gives_empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mini_corpus(dir.path(), &[], &[]);
    run_all(&cfg);
    let layout = Layout::new(&cfg.output_dir);
    assert_eq!(read(&layout.snippets()), "");
    let snap = Snapshot::load(&layout.graph_dir(Arm::Snippet)).unwrap();
    assert_eq!((snap.graph.node_count(), snap.graph.edge_count()), (0, 0));
}

#[test]
fn unknown_only_relations_leave_no_edges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mini_corpus(dir.path(), &[("T1", "华光电子")], &["甲公司 为 乙公司 供应 芯片", "丙公司 与 丁公司 合作"]);
    run_all(&cfg);
    let layout = Layout::new(&cfg.output_dir);
    assert!(read(&layout.relations(Arm::Snippet)).contains("\"unknown\""));
    let snap = Snapshot::load(&layout.graph_dir(Arm::Snippet)).unwrap();
    assert_eq!(snap.graph.edge_count(), 0);
    assert_eq!(read(&layout.graph_dir(Arm::Snippet).join("edges.jsonl")).lines().count(), 1);
    let ledger: BuildLedger = serde_json::from_str(&read(&layout.build_ledger(Arm::Snippet))).unwrap();
    assert_eq!(ledger.graph.unknown_dropped, ledger.graph.raw_in);
    assert!(ledger.graph.raw_in > 0);
}

#[test]
fn self_loops_are_dropped_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mini_corpus(dir.path(), &[("T1", "华光电子股份有限公司")], &["华光电子股份有限公司 与 华光电子 合作", "{T} 为 远景科技有限公司 供应 芯片"]);
    run_all(&cfg);
    let ledger: BuildLedger =
        serde_json::from_str(&read(&Layout::new(&cfg.output_dir).build_ledger(Arm::Snippet))).unwrap();
    assert!(ledger.graph.self_loops > 0);
    assert_eq!(ledger.edges, 1);
}

fn exit_code(r: Result<impl Sized, PipelineError>) -> i32 {
    match r {
        Ok(_) => 0,
        Err(e) => e.exit_code(),
    }
}

#[test]
fn exit_codes_for_config_and_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = mini_corpus(dir.path(), &[("T1", "华光电子")], &["{T} 与 远景科技 合作"]);

    let mut bad = cfg.clone();
    bad.top_n = 0;
    assert_eq!(exit_code(cmd_ingest(&bad)), 2);
    let mut fulltext = cfg.clone();
    fulltext.arm = Arm::Both;
    assert_eq!(exit_code(cmd_ingest(&fulltext)), 2);
    #[cfg(not(feature = "live"))]
    {
        let mut live = cfg.clone();
        live.mode = sckg_core::pipeline::Mode::Live;
        assert_eq!(exit_code(cmd_ingest(&live)), 2);
    }

    // later stages before earlier ones
    assert_eq!(exit_code(cmd_extract(&cfg)), 3);
    assert_eq!(exit_code(cmd_build(&cfg)), 3);
    assert_eq!(exit_code(cmd_report(&cfg, &ReportRequest::new(ReportKind::Stats))), 3);

    fs::remove_file(dir.path().join("search/T1.jsonl")).unwrap();
    assert_eq!(exit_code(cmd_ingest(&cfg)), 3);
    cfg.targets = dir.path().join("absent.tsv");
    assert_eq!(exit_code(cmd_ingest(&cfg)), 3);
}

#[test]
fn coverage_needs_a_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mini_corpus(dir.path(), &[("T1", "华光电子")], &["{T} 与 远景科技 合作"]);
    run_all(&cfg);
    assert_eq!(exit_code(cmd_report(&cfg, &ReportRequest::new(ReportKind::Coverage))), 2);
    let mut missing = cfg.clone();
    missing.benchmark = Some(dir.path().join("nope.csv"));
    assert_eq!(exit_code(cmd_report(&missing, &ReportRequest::new(ReportKind::Coverage))), 3);
}
