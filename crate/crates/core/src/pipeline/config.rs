use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::extract::{RelationType, SynonymMap};
use crate::graph::UniqueKey;
use crate::ingest::{QueryTemplate, TemplateSet};
use crate::resolve::DEFAULT_LEGAL_SUFFIXES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Replay,
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    #[default]
    Snippet,
    Fulltext,
    Both,
}

impl Arm {
    pub fn includes(self, other: Arm) -> bool {
        self == Arm::Both || self == other
    }

    /// The single arms covered, snippet first.
    pub fn parts(self) -> Vec<Arm> {
        match self {
            Arm::Both => vec![Arm::Snippet, Arm::Fulltext],
            a => vec![a],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Snippet => "snippet",
            Arm::Fulltext => "fulltext",
            Arm::Both => "both",
        }
    }
}

impl std::str::FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "snippet" => Ok(Arm::Snippet),
            "fulltext" => Ok(Arm::Fulltext),
            "both" => Ok(Arm::Both),
            _ => Err(format!("unknown arm `{s}` (snippet|fulltext|both)")),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "replay" => Ok(Mode::Replay),
            "live" => Ok(Mode::Live),
            _ => Err(format!("unknown mode `{s}` (replay|live)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayPaths {
    pub search_dir: PathBuf,
    #[serde(default)]
    pub pages_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiveSettings {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub audit_dir: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_user_agent")]
    pub user_agent: String,
    /// Minimum spacing between fetches to one domain.
    #[serde(default = "default_domain_interval")]
    pub domain_interval_ms: u64,
}

fn default_model() -> String {
    "gpt-4o-mini".into()
}

fn default_timeout() -> u64 {
    30
}

fn default_user_agent() -> String {
    "sckg-pipeline/0.1".into()
}

fn default_domain_interval() -> u64 {
    1000
}

impl Default for LiveSettings {
    fn default() -> Self {
        Self {
            model: default_model(),
            audit_dir: None,
            timeout_secs: default_timeout(),
            user_agent: default_user_agent(),
            domain_interval_ms: default_domain_interval(),
        }
    }
}

fn default_top_n() -> u32 {
    10
}
fn default_page_size() -> u32 {
    10
}
fn default_concurrency() -> usize {
    4
}
fn default_chunk_chars() -> usize {
    3000
}
fn default_overlap_chars() -> usize {
    200
}
fn default_threshold() -> f64 {
    0.92
}
fn default_attempts() -> u32 {
    3
}
fn default_clock() -> DateTime<Utc> {
    DateTime::UNIX_EPOCH
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Pipeline settings. Relative paths are resolved against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub arm: Arm,
    pub targets: PathBuf,
    #[serde(default)]
    pub templates: Option<Vec<QueryTemplate>>,
    #[serde(default = "default_top_n")]
    pub top_n: u32,
    #[serde(default = "default_page_size")]
    pub page_size: u32,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_chunk_chars")]
    pub chunk_chars: usize,
    #[serde(default = "default_overlap_chars")]
    pub overlap_chars: usize,
    #[serde(default)]
    pub credibility: Option<PathBuf>,
    #[serde(default)]
    pub aliases: Option<PathBuf>,
    #[serde(default)]
    pub benchmark: Option<PathBuf>,
    /// Names or ids left out of top-degree tables, one per line.
    #[serde(default)]
    pub exclusions: Option<PathBuf>,
    #[serde(default)]
    pub legal_suffixes: Option<Vec<String>>,
    /// Extra backend relation strings, added to the built-in synonym map.
    #[serde(default)]
    pub relation_synonyms: BTreeMap<String, RelationType>,
    #[serde(default = "default_threshold")]
    pub resolve_threshold: f64,
    #[serde(default)]
    pub unique_key: UniqueKey,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Timestamp stamped on extraction output in replay mode.
    #[serde(default = "default_clock")]
    pub clock: DateTime<Utc>,
    #[serde(default)]
    pub replay: Option<ReplayPaths>,
    #[serde(default)]
    pub live: Option<LiveSettings>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.targets);
        fix(&mut self.output_dir);
        for p in [&mut self.credibility, &mut self.aliases, &mut self.benchmark, &mut self.exclusions]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        if let Some(r) = &mut self.replay {
            fix(&mut r.search_dir);
            if let Some(p) = &mut r.pages_dir {
                fix(p);
            }
        }
        if let Some(audit) = self.live.as_mut().and_then(|l| l.audit_dir.as_mut()) {
            fix(audit);
        }
    }

    /// Checks that do not touch the filesystem or environment.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.top_n == 0 {
            return bad("top_n must be at least 1".into());
        }
        if self.page_size == 0 || self.max_attempts == 0 {
            return bad("page_size and max_attempts must be at least 1".into());
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1".into());
        }
        if self.chunk_chars == 0 || self.overlap_chars >= self.chunk_chars {
            return bad("need 0 <= overlap_chars < chunk_chars".into());
        }
        if !(self.resolve_threshold > 0.0 && self.resolve_threshold <= 1.0) {
            return bad(format!("resolve_threshold {} outside (0, 1]", self.resolve_threshold));
        }
        self.template_set()?;
        if self.mode == Mode::Replay {
            match &self.replay {
                None => return bad("replay mode requires a [replay] section with search_dir".into()),
                Some(r) if self.arm.includes(Arm::Fulltext) && r.pages_dir.is_none() => {
                    return bad("full-text arm in replay mode requires replay.pages_dir".into())
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn template_set(&self) -> Result<TemplateSet, PipelineError> {
        match &self.templates {
            None => Ok(TemplateSet::default_zh()),
            Some(t) => TemplateSet::new(t.clone()).map_err(|e| PipelineError::Config(e.to_string())),
        }
    }

    pub fn synonyms(&self) -> SynonymMap {
        let mut map = SynonymMap::default();
        for (k, v) in &self.relation_synonyms {
            map.insert(k, *v);
        }
        map
    }

    pub fn suffixes(&self) -> Vec<String> {
        match &self.legal_suffixes {
            Some(s) => s.clone(),
            None => DEFAULT_LEGAL_SUFFIXES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Digest of the settings that shape a graph build, plus the contents of
    /// the alias table and credibility config. Paths, output location, mode
    /// and concurrency are left out.
    pub fn build_hash(&self, arm: Arm) -> Result<String, PipelineError> {
        let mut h = Sha256::new();
        let settings = serde_json::json!({
            "arm": arm.as_str(),
            "templates": self.template_set()?.iter().collect::<Vec<_>>(),
            "top_n": self.top_n,
            "page_size": self.page_size,
            "chunk_chars": self.chunk_chars,
            "overlap_chars": self.overlap_chars,
            "legal_suffixes": self.suffixes(),
            "relation_synonyms": self.relation_synonyms,
            "resolve_threshold": self.resolve_threshold,
            "unique_key": self.unique_key,
            "clock": self.clock,
        });
        h.update(settings.to_string().as_bytes());
        for path in [&self.aliases, &self.credibility] {
            h.update([0u8]);
            if let Some(p) = path {
                h.update(std::fs::read(p).map_err(|e| PipelineError::missing(p, e))?);
            }
        }
        Ok(hex::encode(&h.finalize()[..8]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
targets = "targets.tsv"
[replay]
search_dir = "search"
"#;

    #[test]
    fn defaults_and_rebasing() {
        let cfg = PipelineConfig::from_toml_str(MINIMAL, Path::new("/data/run")).unwrap();
        assert_eq!(cfg.top_n, 10);
        assert_eq!(cfg.arm, Arm::Snippet);
        assert_eq!(cfg.mode, Mode::Replay);
        assert_eq!(cfg.targets, PathBuf::from("/data/run/targets.tsv"));
        assert_eq!(cfg.replay.as_ref().unwrap().search_dir, PathBuf::from("/data/run/search"));
        assert_eq!(cfg.template_set().unwrap().len(), 5);
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_errors() {
        let base = Path::new("/x");
        let with = |extra: &str| PipelineConfig::from_toml_str(&format!("{extra}\n{MINIMAL}"), base).unwrap();
        assert!(with("top_n = 0").validate().is_err());
        assert!(with("concurrency = 0").validate().is_err());
        assert!(with("arm = \"fulltext\"").validate().is_err());
        assert!(with("resolve_threshold = 1.5").validate().is_err());
        assert!(PipelineConfig::from_toml_str("targets = \"t\"", base).unwrap().validate().is_err());
        assert!(matches!(
            PipelineConfig::from_toml_str("nonsense = 1", base),
            Err(PipelineError::Config(_))
        ));
    }

    #[test]
    fn extra_synonyms_extend_defaults() {
        let text = MINIMAL.replacen("[replay]", "[relation_synonyms]\n\"上游\" = \"supplier\"\n\n[replay]", 1);
        let cfg = PipelineConfig::from_toml_str(&text, Path::new("/r")).unwrap();
        let map = cfg.synonyms();
        assert_eq!(map.lookup("上游"), Some(RelationType::Supplier));
        assert_eq!(map.lookup("客户"), Some(RelationType::Customer));
        assert!(PipelineConfig::from_toml_str(&text.replace("supplier\"", "seller\""), Path::new("/r")).is_err());
    }

    #[test]
    fn hash_ignores_concurrency_and_paths() {
        let a = PipelineConfig::from_toml_str(MINIMAL, Path::new("/a")).unwrap();
        let b = PipelineConfig::from_toml_str(&format!("concurrency = 16\n{MINIMAL}"), Path::new("/b")).unwrap();
        assert_eq!(a.build_hash(Arm::Snippet).unwrap(), b.build_hash(Arm::Snippet).unwrap());
        assert_ne!(a.build_hash(Arm::Snippet).unwrap(), a.build_hash(Arm::Fulltext).unwrap());
    }
}
