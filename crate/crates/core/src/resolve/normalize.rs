use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::ResolveError;

pub const DEFAULT_LEGAL_SUFFIXES: &[&str] = &[
    "股份有限公司",
    "有限责任公司",
    "有限公司",
    "集团",
    "inc",
    "inc.",
    "ltd",
    "ltd.",
    "co.",
    "corp",
    "corp.",
    "llc",
    "gmbh",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalizedName {
    pub text: String,
    pub original: String,
}

/// Name normalizer with a configurable legal-suffix list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameNormalizer {
    /// Normalized suffixes, longest first.
    suffixes: Vec<String>,
}

impl Default for NameNormalizer {
    fn default() -> Self {
        Self::new(DEFAULT_LEGAL_SUFFIXES.iter().copied())
    }
}

impl NameNormalizer {
    pub fn new<'a>(suffixes: impl IntoIterator<Item = &'a str>) -> Self {
        let mut list: Vec<String> = suffixes
            .into_iter()
            .map(|s| strip_edges(&fold(s)).to_string())
            .filter(|s| !s.is_empty())
            .collect();
        list.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then_with(|| a.cmp(b)));
        list.dedup();
        Self { suffixes: list }
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    /// Compatibility-normalize, fold full-width forms, lowercase, trim edge
    /// punctuation and strip legal suffixes until none applies.
    pub fn normalize(&self, raw: &str) -> Result<NormalizedName, ResolveError> {
        let mut text = strip_edges(&fold(raw)).to_string();
        while let Some(rest) = self.strip_one_suffix(&text) {
            text = strip_edges(rest).to_string();
        }
        if text.is_empty() {
            return Err(ResolveError::EmptyAfterNormalize(raw.to_string()));
        }
        Ok(NormalizedName {
            text,
            original: raw.to_string(),
        })
    }

    fn strip_one_suffix<'a>(&self, text: &'a str) -> Option<&'a str> {
        self.suffixes.iter().find_map(|suffix| {
            let rest = text.strip_suffix(suffix.as_str())?;
            let word_like = suffix.chars().next().is_some_and(|c| c.is_ascii_alphanumeric());
            if word_like && rest.chars().next_back().is_some_and(|c| c.is_ascii_alphanumeric()) {
                return None;
            }
            Some(rest)
        })
    }
}

pub fn normalize_name(raw: &str) -> Result<NormalizedName, ResolveError> {
    NameNormalizer::default().normalize(raw)
}

fn fold(raw: &str) -> String {
    let compat: String = raw.nfkc().map(fold_width).collect();
    let lowered = compat.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.nfkc().collect::<String>().split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn fold_width(c: char) -> char {
    match c as u32 {
        0xFF01..=0xFF5E => char::from_u32(c as u32 - 0xFEE0).unwrap_or(c),
        0x3000 => ' ',
        _ => c,
    }
}

fn is_edge_junk(c: char) -> bool {
    c.is_whitespace()
        || (c.is_ascii_punctuation() && !matches!(c, '(' | ')' | '[' | ']' | '&'))
        || matches!(
            c,
            '、' | '。' | '「' | '」' | '『' | '』' | '《' | '》' | '【' | '】' | '“' | '”' | '‘' | '’' | '·' | '・' | '…' | '—' | '–'
        )
}

/// Trim punctuation and whitespace at both ends. Brackets are only
/// trimmed when unbalanced, so `华为(深圳)` keeps its closing paren.
fn strip_edges(s: &str) -> &str {
    let mut s = s;
    loop {
        let before = s.len();
        s = s.trim_matches(is_edge_junk);
        for (open, close) in [('(', ')'), ('[', ']')] {
            if s.ends_with(close) && !s.contains(open) {
                s = &s[..s.len() - 1];
            }
            if s.starts_with(open) && !s.contains(close) {
                s = &s[1..];
            }
            if s.starts_with(open) && s.ends_with(close) && s.len() >= 2 && s[1..].find(close) == Some(s.len() - 2) {
                s = &s[1..s.len() - 1];
            }
        }
        if s.starts_with('&') {
            s = &s[1..];
        }
        if s.ends_with('&') {
            s = &s[..s.len() - 1];
        }
        if s.len() == before {
            return s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(s: &str) -> String {
        normalize_name(s).unwrap().text
    }

    #[test]
    fn chinese_limited_company_suffix() {
        assert_eq!(n("华为技术有限公司"), "华为技术");
        assert_eq!(n("比亚迪股份有限公司"), "比亚迪");
        assert_eq!(n("中国石油集团有限公司"), "中国石油");
    }

    #[test]
    fn latin_suffixes_and_case() {
        assert_eq!(n("Acme Inc."), "acme");
        assert_eq!(n("acme"), "acme");
        assert_eq!(n("Huawei Technologies Co., Ltd."), "huawei technologies");
        assert_eq!(n("  ACME   Corp "), "acme");
    }

    #[test]
    fn suffixes_need_a_word_boundary() {
        assert_eq!(n("Zinc"), "zinc");
        assert_eq!(n("Costco"), "costco");
    }

    #[test]
    fn full_width_forms_fold() {
        assert_eq!(n("ＡＣＭＥ　Ｉｎｃ．"), "acme");
        assert_eq!(n("华为（深圳）有限公司"), "华为(深圳)");
    }

    #[test]
    fn empty_after_normalize() {
        assert!(matches!(normalize_name("有限公司"), Err(ResolveError::EmptyAfterNormalize(_))));
        assert!(matches!(normalize_name("   "), Err(ResolveError::EmptyAfterNormalize(_))));
        assert!(matches!(normalize_name("..."), Err(ResolveError::EmptyAfterNormalize(_))));
    }

    #[test]
    fn custom_suffix_list() {
        let norm = NameNormalizer::new(["ag", "se"]);
        assert_eq!(norm.normalize("BASF SE").unwrap().text, "basf");
        assert_eq!(norm.normalize("Acme Inc").unwrap().text, "acme inc");
    }

    proptest! {
        #[test]
        fn idempotent(raw in "\\PC{1,40}") {
            if let Ok(once) = normalize_name(&raw) {
                let twice = normalize_name(&once.text).unwrap();
                prop_assert_eq!(&twice.text, &once.text);
                prop_assert_eq!(once.text.trim(), once.text.as_str());
            }
        }

        #[test]
        fn idempotent_on_name_like_input(
            stem in "[A-Za-z华为比亚迪中国 ]{1,12}",
            suffix in prop::sample::select(vec!["", " Inc.", "有限公司", " Co., Ltd.", "集团", " corp"]),
        ) {
            let raw = format!("{stem}{suffix}");
            if let Ok(once) = normalize_name(&raw) {
                prop_assert_eq!(normalize_name(&once.text).unwrap().text, once.text);
            }
        }
    }
}
