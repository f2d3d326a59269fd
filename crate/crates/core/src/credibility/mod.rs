//! Source-credibility tiers for evidence domains.
//!
//! Tier 1 corporate site, 2 official disclosure, 3 financial news,
//! 4 general media, 5 everything else.

mod psl;

pub use psl::PublicSuffixList;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::extract::is_cjk;
use crate::resolve::{jaro_winkler, AliasTable, NameNormalizer};

pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../data/credibility.toml");

#[derive(Debug, thiserror::Error)]
pub enum CredibilityError {
    #[error("cannot parse url `{0}`")]
    Url(String),
    #[error("invalid credibility config: {0}")]
    Config(String),
    #[error("suffix list line {line}: {message}")]
    SuffixList { line: usize, message: String },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Whitelist,
    Fuzzy,
    Keyword,
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierLabel {
    pub tier: u8,
    pub phase: Phase,
    pub matched_rule: String,
}

impl TierLabel {
    fn new(tier: u8, phase: Phase, rule: impl Into<String>) -> Self {
        Self {
            tier,
            phase,
            matched_rule: rule.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseOrder {
    #[default]
    WhitelistFirst,
    FuzzyFirst,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainList {
    #[serde(default)]
    domains: Vec<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Whitelists {
    #[serde(default)]
    official: DomainList,
    #[serde(default)]
    financial_news: DomainList,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Keywords {
    #[serde(default)]
    terms: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    fuzzy_threshold: Option<f64>,
    #[serde(default)]
    phase_order: PhaseOrder,
    #[serde(default)]
    whitelist: Whitelists,
    #[serde(default)]
    keywords: Keywords,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredibilityConfig {
    pub official_whitelist: BTreeSet<String>,
    pub financial_news_whitelist: BTreeSet<String>,
    /// Checked in order; the first substring hit is reported.
    pub news_keywords: Vec<String>,
    pub fuzzy_threshold: f64,
    pub phase_order: PhaseOrder,
}

impl Default for CredibilityConfig {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG_TOML).expect("bundled credibility config is valid")
    }
}

impl CredibilityConfig {
    pub fn new(
        official: impl IntoIterator<Item = String>,
        financial_news: impl IntoIterator<Item = String>,
        keywords: Vec<String>,
        fuzzy_threshold: f64,
        phase_order: PhaseOrder,
    ) -> Result<Self, CredibilityError> {
        let clean = |d: String| d.trim().trim_matches('.').to_ascii_lowercase();
        let official: BTreeSet<String> = official.into_iter().map(clean).collect();
        let financial: BTreeSet<String> = financial_news.into_iter().map(clean).collect();
        if official.iter().chain(&financial).any(|d| d.is_empty()) {
            return Err(CredibilityError::Config("empty whitelist domain".into()));
        }
        if let Some(d) = official.intersection(&financial).next() {
            return Err(CredibilityError::Config(format!("`{d}` is on both whitelists")));
        }
        if let Some(k) = keywords.iter().find(|k| k.is_empty() || **k != k.to_lowercase()) {
            return Err(CredibilityError::Config(format!("keyword `{k}` must be non-empty lowercase")));
        }
        if !(fuzzy_threshold > 0.0 && fuzzy_threshold <= 1.0) {
            return Err(CredibilityError::Config(format!(
                "fuzzy_threshold {fuzzy_threshold} outside (0, 1]"
            )));
        }
        Ok(Self {
            official_whitelist: official,
            financial_news_whitelist: financial,
            news_keywords: keywords,
            fuzzy_threshold,
            phase_order,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CredibilityError> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::new(
            raw.whitelist.official.domains,
            raw.whitelist.financial_news.domains,
            raw.keywords.terms,
            raw.fuzzy_threshold.unwrap_or(0.85),
            raw.phase_order,
        )
    }

    pub fn load(path: &Path) -> Result<Self, CredibilityError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Registrable domain of `url`'s host, lowercase. IP hosts come back as-is.
pub fn extract_domain(url: &str) -> Result<String, CredibilityError> {
    extract_domain_with(url, PublicSuffixList::bundled())
}

pub fn extract_domain_with(url: &str, list: &PublicSuffixList) -> Result<String, CredibilityError> {
    let parsed = url::Url::parse(url.trim()).map_err(|_| CredibilityError::Url(url.to_string()))?;
    match parsed.host() {
        Some(url::Host::Domain(host)) => Ok(list.registrable_domain(host)),
        Some(url::Host::Ipv4(ip)) => Ok(ip.to_string()),
        Some(url::Host::Ipv6(ip)) => Ok(ip.to_string()),
        None => Err(CredibilityError::Url(url.to_string())),
    }
}

/// ASCII letters and digits of a name, lowercased; `None` for names in
/// CJK script or without any such characters.
pub fn latin_form(name: &str) -> Option<String> {
    if name.chars().any(is_cjk) {
        return None;
    }
    let form: String = name
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect();
    (!form.is_empty()).then_some(form)
}

/// Best Jaro–Winkler match between the domain's leftmost label and the
/// latin forms of `names`. Ties go to the lexicographically smallest name.
pub fn fuzzy_domain_match(domain: &str, names: &BTreeSet<String>, threshold: f64) -> Option<(String, f64)> {
    let first = domain.split('.').next().unwrap_or("");
    let label: String = first
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect();
    if label.is_empty() {
        return None;
    }
    let mut best: Option<(String, f64)> = None;
    for name in names {
        let Some(form) = latin_form(name) else { continue };
        let score = jaro_winkler(&label, &form);
        if score >= threshold && best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((name.clone(), score));
        }
    }
    best
}

/// Names to compare against a domain: each input name plus every alias of
/// the firm it maps to in the alias table.
pub fn expand_names(names: &[&str], aliases: &AliasTable, normalizer: &NameNormalizer) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for raw in names {
        let Ok(n) = normalizer.normalize(raw) else { continue };
        if let Some(rec) = aliases.lookup(&n.text).and_then(|id| aliases.record(id)) {
            out.insert(rec.canonical_name.clone());
            out.extend(rec.aliases.iter().cloned());
        }
        out.insert(n.text);
    }
    out
}

/// Whitelisted entry covering `domain`, checking the domain and each of its
/// parent names.
fn whitelist_hit<'a>(domain: &str, list: &'a BTreeSet<String>) -> Option<&'a String> {
    let mut rest = domain;
    loop {
        if let Some(hit) = list.get(rest) {
            return Some(hit);
        }
        match rest.split_once('.') {
            Some((_, parent)) => rest = parent,
            None => return None,
        }
    }
}

pub fn assign_tier(
    domain: &str,
    target_name: &str,
    partner_name: &str,
    aliases: &AliasTable,
    normalizer: &NameNormalizer,
    config: &CredibilityConfig,
) -> TierLabel {
    let domain = domain.trim().trim_end_matches('.').to_ascii_lowercase();
    let whitelist = || {
        if let Some(hit) = whitelist_hit(&domain, &config.official_whitelist) {
            return Some(TierLabel::new(2, Phase::Whitelist, hit.as_str()));
        }
        whitelist_hit(&domain, &config.financial_news_whitelist).map(|hit| TierLabel::new(3, Phase::Whitelist, hit.as_str()))
    };
    let fuzzy = || {
        let names = expand_names(&[target_name, partner_name], aliases, normalizer);
        fuzzy_domain_match(&domain, &names, config.fuzzy_threshold).map(|(name, _)| TierLabel::new(1, Phase::Fuzzy, name))
    };
    let first = match config.phase_order {
        PhaseOrder::WhitelistFirst => whitelist().or_else(fuzzy),
        PhaseOrder::FuzzyFirst => fuzzy().or_else(whitelist),
    };
    if let Some(label) = first {
        return label;
    }
    if let Some(k) = config.news_keywords.iter().find(|k| domain.contains(k.as_str())) {
        return TierLabel::new(4, Phase::Keyword, k.as_str());
    }
    TierLabel::new(5, Phase::Default, "")
}

/// Memoizes [`assign_tier`] per (domain, target, partner).
#[derive(Debug)]
pub struct TierLabeler<'a> {
    aliases: &'a AliasTable,
    normalizer: &'a NameNormalizer,
    config: &'a CredibilityConfig,
    cache: BTreeMap<(String, String, String), TierLabel>,
}

impl<'a> TierLabeler<'a> {
    pub fn new(aliases: &'a AliasTable, normalizer: &'a NameNormalizer, config: &'a CredibilityConfig) -> Self {
        Self {
            aliases,
            normalizer,
            config,
            cache: BTreeMap::new(),
        }
    }

    pub fn label(&mut self, domain: &str, target_name: &str, partner_name: &str) -> TierLabel {
        let key = (domain.to_string(), target_name.to_string(), partner_name.to_string());
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let label = assign_tier(domain, target_name, partner_name, self.aliases, self.normalizer, self.config);
        self.cache.insert(key, label.clone());
        label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aliases() -> AliasTable {
        let mut t = AliasTable::default();
        t.insert("ID7", "华为技术", "huawei", true).unwrap();
        t
    }

    fn tier(domain: &str, partner: &str) -> TierLabel {
        assign_tier(
            domain,
            "比亚迪",
            partner,
            &aliases(),
            &NameNormalizer::default(),
            &CredibilityConfig::default(),
        )
    }

    #[test]
    fn extracts_registrable_domains() {
        assert_eq!(extract_domain("https://www.sse.com.cn/disclosure/x").unwrap(), "sse.com.cn");
        assert_eq!(extract_domain("http://finance.eastmoney.com/a/1.html").unwrap(), "eastmoney.com");
        assert_eq!(extract_domain("https://example.com").unwrap(), "example.com");
        assert_eq!(extract_domain("HTTPS://News.SSE.com.cn:8443/p?q=1").unwrap(), "sse.com.cn");
        assert_eq!(extract_domain("http://10.0.0.1/x").unwrap(), "10.0.0.1");
        assert_eq!(extract_domain("http://[::1]/x").unwrap(), "::1");
        assert!(matches!(extract_domain("not a url"), Err(CredibilityError::Url(u)) if u == "not a url"));
    }

    #[test]
    fn phase_examples() {
        assert_eq!(tier("sse.com.cn", "Huawei"), TierLabel::new(2, Phase::Whitelist, "sse.com.cn"));
        assert_eq!(tier("eastmoney.com", "Huawei"), TierLabel::new(3, Phase::Whitelist, "eastmoney.com"));
        assert_eq!(tier("huawei.com", "Huawei"), TierLabel::new(1, Phase::Fuzzy, "huawei"));
        assert_eq!(tier("sometechnews.com", "Huawei"), TierLabel::new(4, Phase::Keyword, "news"));
        assert_eq!(tier("randomforum.cn", "Huawei"), TierLabel::new(5, Phase::Default, ""));
    }

    #[test]
    fn cjk_names_match_through_latin_aliases() {
        assert_eq!(tier("huawei.com", "华为技术有限公司").phase, Phase::Fuzzy);
        assert_eq!(tier("huawei.com", "中兴通讯").phase, Phase::Default);
    }

    #[test]
    fn gov_cn_covers_subdomains() {
        let d = extract_domain("https://www.miit.gov.cn/a").unwrap();
        assert_eq!(tier(&d, "x"), TierLabel::new(2, Phase::Whitelist, "gov.cn"));
    }

    #[test]
    fn whitelist_shadows_fuzzy_unless_reordered() {
        let cfg = CredibilityConfig::default();
        let a = aliases();
        let n = NameNormalizer::default();
        assert_eq!(assign_tier("bloomberg.com", "Bloomberg", "x", &a, &n, &cfg).tier, 3);
        let fuzzy_first = CredibilityConfig {
            phase_order: PhaseOrder::FuzzyFirst,
            ..cfg
        };
        assert_eq!(assign_tier("bloomberg.com", "Bloomberg", "x", &a, &n, &fuzzy_first).tier, 1);
    }

    #[test]
    fn fuzzy_examples() {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(fuzzy_domain_match("huawei.com", &set(&["huawei"]), 0.85), Some(("huawei".into(), 1.0)));
        assert_eq!(fuzzy_domain_match("byd.com", &set(&["tencent"]), 0.85), None);
        let (name, score) = fuzzy_domain_match("tencnet.com", &set(&["tencent"]), 0.85).unwrap();
        assert_eq!(name, "tencent");
        assert!(score >= 0.85);
        let (name, _) = fuzzy_domain_match("acme.com", &set(&["acme", "ACME"]), 0.85).unwrap();
        assert_eq!(name, "ACME");
    }

    #[test]
    fn config_validation() {
        let both = "[whitelist.official]\ndomains=[\"a.com\"]\n[whitelist.financial_news]\ndomains=[\"A.com\"]\n";
        assert!(matches!(CredibilityConfig::from_toml_str(both), Err(CredibilityError::Config(_))));
        assert!(CredibilityConfig::from_toml_str("fuzzy_threshold = 0.0").is_err());
        assert!(CredibilityConfig::from_toml_str("fuzzy_threshold = 1.5").is_err());
        assert!(CredibilityConfig::from_toml_str("[keywords]\nterms=[\"News\"]").is_err());
        assert!(CredibilityConfig::from_toml_str("bogus = 1").is_err());
        let cfg = CredibilityConfig::from_toml_str("phase_order = \"fuzzy_first\"").unwrap();
        assert_eq!(cfg.fuzzy_threshold, 0.85);
        assert_eq!(cfg.phase_order, PhaseOrder::FuzzyFirst);
    }

    #[test]
    fn labeler_caches_consistently() {
        let a = aliases();
        let n = NameNormalizer::default();
        let c = CredibilityConfig::default();
        let mut l = TierLabeler::new(&a, &n, &c);
        let first = l.label("huawei.com", "x", "Huawei");
        assert_eq!(first, l.label("huawei.com", "x", "Huawei"));
        assert_eq!(first.tier, 1);
    }
}
