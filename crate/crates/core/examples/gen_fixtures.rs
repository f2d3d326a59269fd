//! Regenerate the replay fixture corpora under `fixtures/` and freeze their
//! golden outputs by running the pipeline once.
//!
//! ```text
//! cargo run -p sckg-core --example gen_fixtures
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use sckg_core::ingest::url_hash;
use sckg_core::pipeline::{cmd_build, cmd_extract, cmd_ingest, Arm, Layout, PipelineConfig};

const PREFIXES: &[(&str, &str)] = &[
    ("华光", "Huaguang"),
    ("东方", "Dongfang"),
    ("金桥", "Jinqiao"),
    ("瑞丰", "Ruifeng"),
    ("恒信", "Hengxin"),
    ("天成", "Tiancheng"),
    ("宏达", "Hongda"),
    ("新元", "Xinyuan"),
    ("嘉禾", "Jiahe"),
    ("中科", "Zhongke"),
    ("海润", "Hairun"),
    ("远航", "Yuanhang"),
    ("明德", "Mingde"),
    ("华泰", "Huatai"),
    ("博雅", "Boya"),
    ("国信", "Guoxin"),
    ("安捷", "Anjie"),
    ("正泰", "Zhengtai"),
    ("联创", "Lianchuang"),
    ("汇通", "Huitong"),
    ("鼎盛", "Dingsheng"),
    ("启明", "Qiming"),
    ("凯旋", "Kaixuan"),
    ("盛世", "Shengshi"),
    ("长江", "Changjiang"),
    ("星河", "Xinghe"),
    ("同方", "Tongfang"),
    ("永新", "Yongxin"),
    ("晨光", "Chenguang"),
    ("飞达", "Feida"),
];

const INDUSTRIES: &[(&str, &str, &str)] = &[
    ("电子", "Electronics", "DZ"),
    ("材料", "Materials", "CL"),
    ("科技", "Technology", "KJ"),
    ("化工", "Chemical", "HG"),
    ("机械", "Machinery", "JX"),
    ("汽车", "Automotive", "QC"),
    ("能源", "Energy", "NY"),
    ("物流", "Logistics", "WL"),
    ("光电", "Optoelectronics", "GD"),
    ("半导体", "Semiconductor", "BDT"),
    ("医药", "Pharma", "YY"),
    ("精密", "Precision", "JM"),
];

const SUFFIXES: &[&str] = &["股份有限公司", "有限公司", "集团"];

const PRODUCTS: &[&str] = &[
    "锂电池", "芯片", "钢材", "显示面板", "传感器", "电机", "包装材料", "化工原料", "物流服务", "精密零件", "光学镜头", "原料药",
];

const FILLER: &[&str] = &[
    "公司近日披露经营数据",
    "行业需求稳步增长",
    "多家机构给予关注",
    "据了解该项目已进入量产阶段",
    "相关负责人表示将持续扩大产能",
    "二季度毛利率有所回升",
    "新建产线预计年内投产",
    "市场对其订单前景保持乐观",
];

const PAGE_FILLER: &[&str] = &[
    "本报讯 记者从多方渠道获悉，产业链上下游近期互动频繁，订单能见度明显提升。",
    "分析人士认为，随着下游需求回暖，相关企业有望在下半年实现业绩改善。",
    "从财务数据看，公司经营性现金流保持稳定，应收账款周转天数略有下降。",
    "业内人士指出，原材料价格波动仍是影响行业盈利水平的主要因素之一。",
    "公司在投资者关系活动中表示，将继续加大研发投入，推动产品结构升级。",
    "免责声明：本文内容仅供参考，不构成任何投资建议，据此操作风险自担。",
];

const HUB_NAME: &str = "国家电网有限公司";

#[derive(Debug, Clone)]
struct Firm {
    id: String,
    cn: String,
    short: String,
    en: String,
    ticker: String,
    slug: String,
    listed: bool,
    in_alias: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Supplier,
    Customer,
    Partner,
}

struct Spec {
    name: &'static str,
    seed: u64,
    targets: usize,
    pool: usize,
    partners: (usize, usize),
    clock: DateTime<Utc>,
}

struct World {
    firms: Vec<Firm>,
    weights: Vec<f64>,
    hub: Option<usize>,
}

fn make_world(spec: &Spec, rng: &mut ChaCha8Rng) -> World {
    let mut combos: Vec<(usize, usize)> = (0..PREFIXES.len())
        .flat_map(|p| (0..INDUSTRIES.len()).map(move |i| (p, i)))
        .collect();
    combos.shuffle(rng);
    let mut firms = Vec::new();
    for (n, &(p, i)) in combos.iter().take(spec.pool).enumerate() {
        let (pc, pe) = PREFIXES[p];
        let (ic, ie, code) = INDUSTRIES[i];
        let suffix = SUFFIXES[rng.gen_range(0..SUFFIXES.len())];
        let short = format!("{pc}{ic}");
        firms.push(Firm {
            id: format!("F{:03}", n + 1),
            cn: format!("{short}{suffix}"),
            short,
            en: format!("{pe} {ie} Co., Ltd."),
            ticker: format!("{}{code}", pe.to_uppercase()),
            slug: format!("{}-{}", pe.to_lowercase(), ie.to_lowercase()),
            listed: n < spec.targets || rng.gen_bool(0.35),
            in_alias: n < spec.targets || rng.gen_bool(0.5),
        });
    }
    let mut weights: Vec<f64> = (0..firms.len()).map(|r| 1.0 / ((r + 1) as f64).powf(0.8)).collect();
    let mut hub = None;
    if spec.pool >= 100 {
        firms.push(Firm {
            id: format!("F{:03}", firms.len() + 1),
            cn: HUB_NAME.into(),
            short: "国家电网".into(),
            en: "State Grid Corporation".into(),
            ticker: "SGCC".into(),
            slug: "sgcc".into(),
            listed: false,
            in_alias: true,
        });
        weights.push(3.0);
        hub = Some(firms.len() - 1);
    }
    World { firms, weights, hub }
}

fn weighted(rng: &mut ChaCha8Rng, weights: &[f64], skip: &BTreeSet<usize>) -> usize {
    let total: f64 = weights.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, w)| w).sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

/// A surface form for a firm mention: legal name, short name, ticker-style
/// alias (when the alias table knows it) or a one-character variant.
fn surface(rng: &mut ChaCha8Rng, f: &Firm) -> String {
    let roll: f64 = rng.gen();
    if roll < 0.5 {
        f.cn.clone()
    } else if roll < 0.78 {
        f.short.clone()
    } else if roll < 0.92 && f.in_alias {
        f.ticker.clone()
    } else if f.short.chars().count() >= 5 {
        let mut chars: Vec<char> = f.short.chars().collect();
        let last = chars.len() - 1;
        chars[last] = '科';
        chars.into_iter().collect::<String>() + "有限公司"
    } else {
        f.cn.clone()
    }
}

struct Source {
    url: String,
}

fn source(rng: &mut ChaCha8Rng, target: &Firm, partner: Option<&Firm>, serial: usize) -> Source {
    let roll: f64 = rng.gen();
    let url = if roll < 0.18 {
        format!("http://www.cninfo.com.cn/new/disclosure/detail?announcementId={}", 1_200_000 + serial)
    } else if roll < 0.38 {
        format!("https://finance.eastmoney.com/a/2024{serial:08}.html")
    } else if roll < 0.46 {
        format!("https://www.stcn.com/article/detail/{serial}.html")
    } else if roll < 0.56 {
        format!("https://www.industrynews.cn/p/{serial}")
    } else if roll < 0.62 {
        format!("https://m.techdaily.com.cn/{serial}.shtml")
    } else if roll < 0.72 {
        let firm = match partner {
            Some(p) if rng.gen_bool(0.4) => p,
            _ => target,
        };
        format!("https://www.{}.com/news/{serial}.html", firm.slug)
    } else if roll < 0.995 {
        let hosts = ["blog.example.org", "bbs.gongkong.net", "wenku.baike.com", "xueqiu.com", "zhuanlan.zhihu.com"];
        format!("https://{}/{serial}", hosts[rng.gen_range(0..hosts.len())])
    } else {
        "javascript:void(0)".to_string()
    };
    Source { url }
}

fn sentence(rng: &mut ChaCha8Rng, target: &Firm, partners: &[(&Firm, Kind)]) -> String {
    let t = if rng.gen_bool(0.6) { target.short.clone() } else { target.cn.clone() };
    let product = PRODUCTS[rng.gen_range(0..PRODUCTS.len())];
    let (p, kind) = partners[0];
    let ps = surface(rng, p);
    match kind {
        Kind::Supplier => format!("{ps} 为 {t} 供应 {product}"),
        Kind::Customer if partners.len() > 1 && partners[1].1 == Kind::Customer => {
            let q = surface(rng, partners[1].0);
            format!("{t} 的客户包括 {ps}、{q}")
        }
        Kind::Customer => format!("{t} 为 {ps} 供应 {product}"),
        Kind::Partner => format!("{t} 与 {ps} 合作"),
    }
}

fn filler(rng: &mut ChaCha8Rng) -> &'static str {
    FILLER[rng.gen_range(0..FILLER.len())]
}

struct Corpus {
    hits: Vec<serde_json::Value>,
    pages: Vec<(String, String, serde_json::Value)>,
    truth: BTreeSet<(String, String, &'static str)>,
}

fn template_kinds(template: &str) -> &'static [Kind] {
    match template {
        "q1" => &[Kind::Supplier],
        "q2" => &[Kind::Customer],
        "q3" => &[Kind::Partner],
        "q4" => &[Kind::Customer, Kind::Supplier],
        _ => &[Kind::Supplier, Kind::Customer, Kind::Partner],
    }
}

fn render(template: &str, name: &str) -> String {
    let pattern = match template {
        "q1" => "{company_name} 主要供应商",
        "q2" => "{company_name} 主要客户",
        "q3" => "{company_name} 合作伙伴",
        "q4" => "{company_name} 采购方 供应链",
        _ => "{company_name} 供应链合作伙伴",
    };
    pattern.replace("{company_name}", name)
}

fn page_html(rng: &mut ChaCha8Rng, title: &str, lead: &str, extra: &[String]) -> String {
    let mut body = String::new();
    let _ = writeln!(body, "<nav><a href=\"/\">首页</a> | <a href=\"/list\">财经</a></nav>");
    let _ = writeln!(body, "<h1>{title}</h1>");
    let _ = writeln!(body, "<p>{lead}。</p>");
    let paragraphs = rng.gen_range(2..64);
    let mut extra = extra.iter();
    for i in 0..paragraphs {
        let _ = writeln!(body, "<p>{}</p>", PAGE_FILLER[rng.gen_range(0..PAGE_FILLER.len())]);
        if i % 4 == 1 {
            if let Some(s) = extra.next() {
                let _ = writeln!(body, "<p>此外，{s}。</p>");
            }
        }
    }
    for s in extra {
        let _ = writeln!(body, "<p>另据报道，{s}。</p>");
    }
    format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{title}</title>\
         <script>var _hmt = _hmt || [];</script><style>p{{margin:0}}</style></head>\n<body>\n{body}\
         <footer>版权所有 &copy; 2024</footer></body></html>\n"
    )
}

fn generate(spec: &Spec, world: &World, rng: &mut ChaCha8Rng) -> Corpus {
    let mut corpus = Corpus {
        hits: Vec::new(),
        pages: Vec::new(),
        truth: BTreeSet::new(),
    };
    let kinds = [Kind::Supplier, Kind::Customer, Kind::Partner];
    let mut serial = 0usize;
    let mut malformed_done = false;
    let mut self_loops = 0;
    for ti in 0..spec.targets {
        let target = &world.firms[ti];
        let mut skip = BTreeSet::from([ti]);
        let n = rng.gen_range(spec.partners.0..=spec.partners.1);
        let mut rels: Vec<(usize, Kind)> = Vec::new();
        if let Some(h) = world.hub {
            if rng.gen_bool(0.6) {
                rels.push((h, Kind::Customer));
                skip.insert(h);
            }
        }
        while rels.len() < n {
            let p = weighted(rng, &world.weights, &skip);
            skip.insert(p);
            rels.push((p, kinds[rng.gen_range(0..3)]));
        }
        for (t_idx, template) in ["q1", "q2", "q3", "q4", "q5"].iter().enumerate() {
            let query = render(template, &target.cn);
            let count = if rng.gen_bool(0.1) { rng.gen_range(6..10) } else { 10 };
            let wanted = template_kinds(template);
            for rank in 1..=count {
                serial += 1;
                let retrieved_at = spec.clock + Duration::minutes((ti * 5 + t_idx) as i64);
                let p_rel = 0.8 - 0.035 * rank as f64;
                let mut parts = vec![filler(rng).to_string()];
                let mut extra = Vec::new();
                let mut partner_firm = None;
                if rng.gen_bool(p_rel) {
                    let pool: Vec<&(usize, Kind)> = rels.iter().filter(|(_, k)| wanted.contains(k)).collect();
                    let pool: Vec<&(usize, Kind)> = if pool.is_empty() { rels.iter().collect() } else { pool };
                    let &(p, k) = pool[rng.gen_range(0..pool.len())];
                    let mut picks = vec![(&world.firms[p], k)];
                    if k == Kind::Customer && rng.gen_bool(0.3) {
                        if let Some(&&(q, _)) = pool.iter().find(|(q, qk)| *q != p && *qk == Kind::Customer) {
                            picks.push((&world.firms[q], Kind::Customer));
                        }
                    }
                    for (f, k) in &picks {
                        corpus.truth.insert((target.id.clone(), f.id.clone(), kind_str(*k)));
                    }
                    partner_firm = Some(&world.firms[p]);
                    parts.push(sentence(rng, target, &picks));
                } else if rng.gen_bool(0.12) {
                    let a = weighted(rng, &world.weights, &BTreeSet::from([ti]));
                    let b = weighted(rng, &world.weights, &BTreeSet::from([ti, a]));
                    let prod = PRODUCTS[rng.gen_range(0..PRODUCTS.len())];
                    parts.push(format!("{} 为 {} 供应 {prod}", world.firms[a].short, world.firms[b].cn));
                }
                if self_loops < 2 && ti == 3 + self_loops * 5 && *template == "q3" && rank == 2 {
                    parts.push(format!("{} 与 {} 合作", target.short, target.ticker));
                    self_loops += 1;
                }
                if !malformed_done && ti == 6 && *template == "q3" && rank == 4 {
                    parts.push("@@MALFORMED@@".into());
                    malformed_done = true;
                }
                parts.push(filler(rng).to_string());
                for _ in 0..rng.gen_range(0..3) {
                    let (p, k) = rels[rng.gen_range(0..rels.len())];
                    extra.push(sentence(rng, target, &[(&world.firms[p], k)]));
                    corpus.truth.insert((target.id.clone(), world.firms[p].id.clone(), kind_str(k)));
                }
                let text = parts.join("。") + "。";
                let src = source(rng, target, partner_firm, serial);
                let title = format!("{}{}", target.short, ["供应链动态", "公告解读", "产业观察", "合作进展"][rank as usize % 4]);
                let published = NaiveDate::from_ymd_opt(2024, 1 + (serial % 12) as u32, 1 + (serial % 28) as u32);
                corpus.hits.push(json!({
                    "target_id": target.id,
                    "query": query,
                    "retrieved_at": retrieved_at,
                    "title": title,
                    "snippet_text": text,
                    "source_url": src.url,
                    "published_at": if rng.gen_bool(0.7) { published } else { None },
                    "page": 1,
                    "rank": rank,
                }));
                if !src.url.starts_with("http") {
                    continue;
                }
                let fetched_at = retrieved_at + Duration::seconds(30 + rank as i64);
                let roll: f64 = rng.gen();
                let (status, html) = if roll < 0.78 {
                    (json!({"kind": "success"}), Some(page_html(rng, &title, text.trim_end_matches('。'), &extra)))
                } else if roll < 0.86 {
                    {
                    let code = [403, 404, 502][rng.gen_range(0..3)];
                    (json!({"kind": "http_error", "code": code}), None)
                }
                } else if roll < 0.91 {
                    (json!({"kind": "blocked"}), None)
                } else if roll < 0.96 {
                    (json!({"kind": "timeout"}), None)
                } else if roll < 0.98 {
                    (
                        json!({"kind": "success"}),
                        Some("<html><head><script>location.href='/login'</script></head><body></body></html>\n".into()),
                    )
                } else {
                    (json!({"kind": "success"}), None)
                };
                let sidecar = json!({"url": src.url, "status": status, "fetched_at": fetched_at});
                corpus.pages.push((src.url.clone(), html.unwrap_or_default(), sidecar));
            }
        }
    }
    corpus
}

fn kind_str(k: Kind) -> &'static str {
    match k {
        Kind::Supplier => "supplier",
        Kind::Customer => "customer",
        Kind::Partner => "partner",
    }
}

fn write(path: &Path, text: impl AsRef<[u8]>) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
}

fn emit(spec: &Spec, root: &Path) {
    let dir = root.join(spec.name);
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let world = make_world(spec, &mut rng);
    let corpus = generate(spec, &world, &mut rng);

    let mut targets = String::from("target_id\tname\tlisted_flag\n");
    for f in &world.firms[..spec.targets] {
        let _ = writeln!(targets, "{}\t{}\t{}", f.id, f.cn, u8::from(f.listed));
    }
    write(&dir.join("targets.tsv"), targets);

    let mut aliases = String::from("alias\tcanonical_id\tcanonical_name\tlisted_flag\n");
    for f in world.firms.iter().filter(|f| f.in_alias) {
        for alias in [&f.cn, &f.en, &f.ticker] {
            let _ = writeln!(aliases, "{alias}\t{}\t{}\t{}", f.id, f.cn, u8::from(f.listed));
        }
    }
    write(&dir.join("aliases.tsv"), aliases);

    let mut search: BTreeMap<String, String> = BTreeMap::new();
    for hit in &corpus.hits {
        let file = search.entry(hit["target_id"].as_str().unwrap().to_string()).or_default();
        file.push_str(&hit.to_string());
        file.push('\n');
    }
    for (target, text) in search {
        write(&dir.join("search").join(format!("{target}.jsonl")), text);
    }

    for (url, html, sidecar) in &corpus.pages {
        let hash = url_hash(url);
        write(&dir.join("pages").join(format!("{hash}.status.json")), format!("{sidecar}\n"));
        if !html.is_empty() {
            write(&dir.join("pages").join(format!("{hash}.html")), html);
        }
    }

    // benchmark: part of the true relation set plus firms the corpus never mentions
    let mut bench = String::from("src_name,dst_name,relation_type\n");
    let by_id: BTreeMap<&str, &Firm> = world.firms.iter().map(|f| (f.id.as_str(), f)).collect();
    for (t, p, k) in &corpus.truth {
        if rng.gen_bool(0.3) {
            let (src, dst) = match *k {
                "customer" => (by_id[t.as_str()], by_id[p.as_str()]),
                _ => (by_id[p.as_str()], by_id[t.as_str()]),
            };
            let _ = writeln!(bench, "{},{},{k}", src.cn, dst.cn);
        }
    }
    for i in 0..spec.targets {
        let _ = writeln!(bench, "{},外部样本{:02}有限公司,customer", world.firms[i].cn, i + 1);
    }
    write(&dir.join("benchmark.csv"), bench);
    write(&dir.join("exclusions.txt"), format!("# non-corporate hubs\n{HUB_NAME}\n"));
    write(
        &dir.join("credibility.toml"),
        include_str!("../data/credibility.toml"),
    );
    let config = format!(
        "mode = \"replay\"\narm = \"both\"\ntargets = \"targets.tsv\"\ntop_n = 10\npage_size = 10\n\
         chunk_chars = 1200\noverlap_chars = 120\ncredibility = \"credibility.toml\"\naliases = \"aliases.tsv\"\n\
         benchmark = \"benchmark.csv\"\nexclusions = \"exclusions.txt\"\nresolve_threshold = 0.92\n\
         output_dir = \"out\"\nconcurrency = 4\nclock = \"{}\"\n\n[replay]\nsearch_dir = \"search\"\npages_dir = \"pages\"\n",
        spec.clock.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    );
    write(&dir.join("config.toml"), config);

    freeze_golden(&dir);
}

fn freeze_golden(dir: &Path) {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::load(&dir.join("config.toml")).unwrap();
    cfg.output_dir = tmp.path().to_path_buf();
    cmd_ingest(&cfg).unwrap();
    cmd_extract(&cfg).unwrap();
    cmd_build(&cfg).unwrap();
    let layout = Layout::new(tmp.path());
    let golden = dir.join("golden");
    for arm in [Arm::Snippet, Arm::Fulltext] {
        let out = golden.join(arm.as_str());
        fs::create_dir_all(&out).unwrap();
        for file in ["nodes.jsonl", "edges.jsonl"] {
            fs::copy(layout.graph_dir(arm).join(file), out.join(file)).unwrap();
        }
        fs::copy(layout.relations(arm), out.join("relations.jsonl")).unwrap();
    }
}

fn main() {
    let root: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let clock = Utc.with_ymd_and_hms(2024, 5, 6, 8, 0, 0).unwrap();
    emit(
        &Spec {
            name: "corpus20",
            seed: 20_240_506,
            targets: 20,
            pool: 160,
            partners: (6, 18),
            clock,
        },
        &root,
    );
    emit(
        &Spec {
            name: "firm3",
            seed: 3,
            targets: 3,
            pool: 16,
            partners: (3, 6),
            clock,
        },
        &root,
    );
    println!("fixtures written under {}", root.display());
}
