//! Subcommand drivers: ingest, extract, build and report, each reading the
//! previous stage's files from the output directory.

mod build;
mod config;
mod extract;
mod ingest;
#[cfg(feature = "live")]
pub mod live;
mod report;

pub use build::{cmd_build, BuildLedger, BuildSummary};
pub use config::{Arm, LiveSettings, Mode, PipelineConfig, ReplayPaths};
pub use extract::{cmd_extract, ExtractSummary};
pub use ingest::{cmd_ingest, FetchRecord, IngestLedger, IngestSummary, ManifestEntry};
pub use report::{cmd_report, view, ReportKind, ReportOutput, ReportRequest};

use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::credibility::CredibilityConfig;
use crate::ingest::{load_targets, Target, TemplateSet};
use crate::resolve::{AliasTable, NameNormalizer};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing inputs:\n  {}", .0.join("\n  "))]
    MissingInputs(Vec<String>),
    #[error("backend failures:\n  {}", .0.join("\n  "))]
    Backend(Vec<String>),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// 2 config, 3 missing inputs, 4 live backend, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::MissingInputs(_) => 3,
            PipelineError::Backend(_) => 4,
            PipelineError::Data { .. } | PipelineError::Io { .. } => 1,
        }
    }

    pub(crate) fn missing(path: &Path, err: impl std::fmt::Display) -> Self {
        PipelineError::MissingInputs(vec![format!("{}: {err}", path.display())])
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn data(path: &Path, message: impl std::fmt::Display) -> Self {
        PipelineError::Data {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

/// File locations under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn ingest_dir(&self) -> PathBuf {
        self.root.join("ingest")
    }
    pub fn manifest(&self) -> PathBuf {
        self.ingest_dir().join("manifest.jsonl")
    }
    pub fn pairs_dir(&self) -> PathBuf {
        self.ingest_dir().join("pairs")
    }
    pub fn snippets(&self) -> PathBuf {
        self.ingest_dir().join("snippets.jsonl")
    }
    pub fn chunks(&self) -> PathBuf {
        self.ingest_dir().join("chunks.jsonl")
    }
    pub fn fetches(&self) -> PathBuf {
        self.ingest_dir().join("fetches.jsonl")
    }
    pub fn ingest_ledger(&self) -> PathBuf {
        self.ingest_dir().join("ledger.json")
    }
    pub fn extract_dir(&self, arm: Arm) -> PathBuf {
        self.root.join("extract").join(arm.as_str())
    }
    pub fn relations(&self, arm: Arm) -> PathBuf {
        self.extract_dir(arm).join("relations.jsonl")
    }
    pub fn calls(&self, arm: Arm) -> PathBuf {
        self.extract_dir(arm).join("calls.jsonl")
    }
    pub fn extract_ledger(&self, arm: Arm) -> PathBuf {
        self.extract_dir(arm).join("ledger.json")
    }
    pub fn graph_dir(&self, arm: Arm) -> PathBuf {
        self.root.join("graph").join(arm.as_str())
    }
    pub fn match_audit(&self, arm: Arm) -> PathBuf {
        self.graph_dir(arm).join("match_audit.jsonl")
    }
    pub fn build_ledger(&self, arm: Arm) -> PathBuf {
        self.graph_dir(arm).join("ledger.json")
    }
    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    // write-then-rename so readers never see a partial file
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| PipelineError::io(&tmp, e))?;
    f.write_all(contents.as_ref()).map_err(|e| PipelineError::io(&tmp, e))?;
    f.sync_all().map_err(|e| PipelineError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}

pub(crate) fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("pipeline records serialize"));
        out.push('\n');
    }
    out
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("pipeline records serialize");
    text.push('\n');
    write_file(path, text)
}

/// Read a JSONL file written by an earlier stage; a missing file is a
/// missing input.
pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::missing(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| PipelineError::data(path, format!("line {}: {e}", i + 1))))
        .collect()
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::missing(path, e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::data(path, e))
}

pub(crate) fn thread_pool(concurrency: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))
}

/// Inputs shared by the stages, loaded once from the config.
pub(crate) struct Resources {
    pub targets: Vec<Target>,
    target_index: std::collections::BTreeMap<String, usize>,
    pub templates: TemplateSet,
    pub normalizer: NameNormalizer,
    pub aliases: AliasTable,
    pub credibility: CredibilityConfig,
}

impl Resources {
    pub fn load(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let targets = load_targets(&cfg.targets).map_err(|e| match e {
            crate::ingest::IngestError::Io(io) => PipelineError::missing(&cfg.targets, io),
            other => PipelineError::data(&cfg.targets, other),
        })?;
        let suffixes = cfg.suffixes();
        let normalizer = NameNormalizer::new(suffixes.iter().map(String::as_str));
        let aliases = match &cfg.aliases {
            None => AliasTable::default(),
            Some(p) => AliasTable::load(p, &normalizer).map_err(|e| match e {
                crate::resolve::ResolveError::Io(io) => PipelineError::missing(p, io),
                other => PipelineError::data(p, other),
            })?,
        };
        let credibility = match &cfg.credibility {
            None => CredibilityConfig::default(),
            Some(p) => CredibilityConfig::load(p).map_err(|e| match e {
                crate::credibility::CredibilityError::Io(io) => PipelineError::missing(p, io),
                other => PipelineError::Config(format!("{}: {other}", p.display())),
            })?,
        };
        let target_index = targets.iter().enumerate().map(|(i, t)| (t.id.clone(), i)).collect();
        Ok(Self {
            targets,
            target_index,
            templates: cfg.template_set()?,
            normalizer,
            aliases,
            credibility,
        })
    }

    pub fn target(&self, id: &str) -> Option<&Target> {
        self.target_index.get(id).map(|&i| &self.targets[i])
    }

    /// Template id for a (target, query) pair, found by re-rendering.
    pub fn template_of(&self, target_id: &str, query: &str) -> Option<String> {
        let target = self.target(target_id)?;
        self.templates.iter().find(|t| t.render(&target.name) == query).map(|t| t.id.clone())
    }
}

pub(crate) fn read_lines_set(path: &Path) -> Result<BTreeSet<String>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::missing(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}
