use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{read_json, read_lines_set, write_file, Arm, BuildLedger, Layout, PipelineConfig, PipelineError, Resources};
use crate::analytics::{
    ccdf, coverage_compare, cost_report, degrees, fit_slope, network_stats, saturation_curve, top_degree_table,
    BenchmarkGraph, RankedItem,
};
use crate::graph::{Sckg, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Stats,
    Ccdf,
    Saturation,
    Cost,
    Coverage,
    Topdeg,
}

impl ReportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::Stats => "stats",
            ReportKind::Ccdf => "ccdf",
            ReportKind::Saturation => "saturation",
            ReportKind::Cost => "cost",
            ReportKind::Coverage => "coverage",
            ReportKind::Topdeg => "topdeg",
        }
    }
}

impl std::str::FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "stats" => ReportKind::Stats,
            "ccdf" => ReportKind::Ccdf,
            "saturation" => ReportKind::Saturation,
            "cost" => ReportKind::Cost,
            "coverage" => ReportKind::Coverage,
            "topdeg" => ReportKind::Topdeg,
            _ => return Err(format!("unknown report `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRequest {
    pub kind: ReportKind,
    /// Defaults to the configured arm.
    pub arm: Option<Arm>,
    pub tier: Option<u8>,
    pub listed: bool,
    pub top: usize,
}

impl ReportRequest {
    pub fn new(kind: ReportKind) -> Self {
        Self {
            kind,
            arm: None,
            tier: None,
            listed: false,
            top: 20,
        }
    }

    fn stem(&self, arm: Arm) -> String {
        let mut s = format!("{}-{}", self.kind.as_str(), arm.as_str());
        if let Some(k) = self.tier {
            let _ = write!(s, "-tier{k}");
        }
        if self.listed {
            s.push_str("-listed");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutput {
    pub stem: String,
    pub json: Value,
    pub text: String,
    pub csv: Option<String>,
}

/// Apply the optional tier filter, then the listed-firm view.
pub fn view(graph: &Sckg, tier: Option<u8>, listed: bool) -> Result<Sckg, PipelineError> {
    let g = match tier {
        Some(k) => graph.filter_by_tier(k).map_err(|e| PipelineError::Config(e.to_string()))?.graph,
        None => graph.clone(),
    };
    Ok(if listed { g.listed_view() } else { g })
}

fn load_view(layout: &Layout, arm: Arm, req: &ReportRequest) -> Result<Sckg, PipelineError> {
    let dir = layout.graph_dir(arm);
    let snap = Snapshot::load(&dir).map_err(|e| match e {
        crate::graph::GraphError::Io(io) => PipelineError::missing(&dir, io),
        other => PipelineError::data(&dir, other),
    })?;
    view(&snap.graph, req.tier, req.listed)
}

/// Compute one report over the built snapshot(s) and write it under
/// `reports/` as JSON, text and (for curves) CSV.
pub fn cmd_report(cfg: &PipelineConfig, req: &ReportRequest) -> Result<ReportOutput, PipelineError> {
    if let Some(k) = req.tier {
        if !(1..=5).contains(&k) {
            return Err(PipelineError::Config(format!("--tier must be within 1..=5, got {k}")));
        }
    }
    let layout = Layout::new(&cfg.output_dir);
    let arm = req.arm.unwrap_or(cfg.arm);
    let out = if req.kind == ReportKind::Cost {
        cost(&layout, arm)?
    } else {
        let mut json = serde_json::Map::new();
        let mut text = String::new();
        let mut csv = String::new();
        for part in arm.parts() {
            let graph = load_view(&layout, part, req)?;
            let (j, t, c) = match req.kind {
                ReportKind::Stats => stats(&graph),
                ReportKind::Ccdf => ccdf_report(&graph)?,
                ReportKind::Saturation => saturation(&graph, cfg.top_n)?,
                ReportKind::Coverage => coverage(cfg, &graph)?,
                ReportKind::Topdeg => topdeg(cfg, &graph, req.top)?,
                ReportKind::Cost => unreachable!(),
            };
            json.insert(part.as_str().to_string(), j);
            let _ = writeln!(text, "[{}]\n{t}", part.as_str());
            if let Some(c) = c {
                for line in c.lines() {
                    let _ = writeln!(csv, "{},{line}", part.as_str());
                }
            }
        }
        ReportOutput {
            stem: String::new(),
            json: Value::Object(json),
            text,
            csv: (!csv.is_empty()).then_some(csv),
        }
    };
    let out = ReportOutput {
        stem: req.stem(arm),
        ..out
    };
    let dir = layout.reports_dir();
    let mut json_text = serde_json::to_string_pretty(&out.json).expect("report serializes");
    json_text.push('\n');
    write_file(&dir.join(format!("{}.json", out.stem)), json_text)?;
    write_file(&dir.join(format!("{}.txt", out.stem)), &out.text)?;
    if let Some(csv) = &out.csv {
        write_file(&dir.join(format!("{}.csv", out.stem)), csv)?;
    }
    Ok(out)
}

type Part = (Value, String, Option<String>);

fn stats(graph: &Sckg) -> Part {
    let s = network_stats(graph);
    let text = format!(
        "{:<8}{:>10}{:>10}{:>10}{:>10}\n{:<8}{:>10}{:>10}{:>10.2}{:>10}\n",
        "", "nodes", "edges", "mean", "max", "", s.nodes, s.edges, s.mean_degree, s.max_degree
    );
    (json!(s), text, None)
}

fn ccdf_report(graph: &Sckg) -> Result<Part, PipelineError> {
    let deg: Vec<usize> = degrees(graph).into_values().collect();
    if deg.is_empty() {
        return Ok((json!({"points": [], "fit": null}), "empty graph\n".into(), None));
    }
    let points = ccdf(&deg).expect("non-empty degrees");
    let fit = fit_slope(&points, 10, 200).ok();
    let mut csv = String::from("k,p\n");
    for p in &points {
        let _ = writeln!(csv, "{},{}", p.k, p.p);
    }
    let text = match &fit {
        Some(f) => format!(
            "{} distinct degrees; slope {:.3} over {}<=k<={} (r2 {:.4}, {} points)\n",
            points.len(),
            f.beta,
            f.k_min,
            f.k_max,
            f.r_squared,
            f.points
        ),
        None => format!("{} distinct degrees; too few points in 10<=k<=200 for a slope\n", points.len()),
    };
    Ok((json!({"points": points, "fit": fit}), text, Some(csv)))
}

/// Saturation items: one per (edge, template) observation in the evidence.
pub fn ranked_items(graph: &Sckg) -> Vec<RankedItem> {
    let mut items = Vec::new();
    for (key, edge) in &graph.edges {
        let rel = format!("{}|{}|{}", key.src, key.dst, key.relation_type);
        for ev in &edge.evidence {
            items.push(RankedItem {
                template: ev.template_id.clone(),
                relation_key: rel.clone(),
                rank: Some(ev.rank),
            });
        }
    }
    items
}

fn saturation(graph: &Sckg, top_n: u32) -> Result<Part, PipelineError> {
    let ns: Vec<u32> = (1..=top_n).collect();
    let rep = saturation_curve(&ranked_items(graph), &ns).map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut csv = String::from("series,n,yield\n");
    for (t, curve) in &rep.per_template {
        for (n, y) in curve {
            let _ = writeln!(csv, "{t},{n},{y}");
        }
    }
    let mut text = format!("{:>4}{:>8}{:>8}{:>8}\n", "N", "mean", "min", "max");
    for b in &rep.band {
        let _ = writeln!(csv, "mean,{},{}", b.n, b.mean);
        let _ = writeln!(text, "{:>4}{:>8.3}{:>8.3}{:>8.3}", b.n, b.mean, b.min, b.max);
    }
    Ok((json!(rep), text, Some(csv)))
}

fn coverage(cfg: &PipelineConfig, graph: &Sckg) -> Result<Part, PipelineError> {
    let path = cfg
        .benchmark
        .as_ref()
        .ok_or_else(|| PipelineError::Config("coverage report needs `benchmark` in the config".into()))?;
    let res = Resources::load(cfg)?;
    let bench = BenchmarkGraph::load(path, &res.normalizer, &res.aliases).map_err(|e| match e {
        crate::analytics::AnalyticsError::Io(io) => PipelineError::missing(path, io),
        other => PipelineError::data(path, other),
    })?;
    let c = coverage_compare(&network_stats(graph), &bench.stats()).map_err(|e| PipelineError::data(path, e))?;
    let text = format!(
        "firms {} vs {} ({:.2}x); relations {} vs {} ({:.2}x)\n",
        c.view.nodes, c.benchmark.nodes, c.firm_ratio, c.view.edges, c.benchmark.edges, c.edge_ratio
    );
    Ok((json!(c), text, None))
}

fn topdeg(cfg: &PipelineConfig, graph: &Sckg, n: usize) -> Result<Part, PipelineError> {
    let mut exclusions = BTreeSet::new();
    if let Some(p) = &cfg.exclusions {
        let res = Resources::load(cfg)?;
        for raw in read_lines_set(p)? {
            if let Ok(norm) = res.normalizer.normalize(&raw) {
                exclusions.insert(norm.text);
            }
            exclusions.insert(raw);
        }
    }
    let rows = top_degree_table(graph, n, &exclusions);
    let mut text = String::new();
    for r in &rows {
        let _ = writeln!(text, "{:>4}  {:<40} {:>6}", r.rank, r.canonical_name, r.degree);
    }
    Ok((json!(rows), text, None))
}

fn cost(layout: &Layout, arm: Arm) -> Result<ReportOutput, PipelineError> {
    let load = |a: Arm| read_json::<BuildLedger>(&layout.build_ledger(a));
    let (snippet, fulltext) = match arm {
        Arm::Snippet => (load(Arm::Snippet)?.cost, None),
        Arm::Fulltext => (load(Arm::Fulltext)?.cost, None),
        Arm::Both => (load(Arm::Snippet)?.cost, Some(load(Arm::Fulltext)?.cost)),
    };
    let report = cost_report(snippet, fulltext);
    Ok(ReportOutput {
        stem: String::new(),
        json: json!(report),
        text: report.render_text(),
        csv: None,
    })
}
