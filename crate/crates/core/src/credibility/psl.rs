use std::collections::HashSet;

use super::CredibilityError;

const BUNDLED: &str = include_str!("../../data/public_suffix.dat");

/// Public-suffix rules: plain, `*.` wildcard and `!` exception entries.
/// Rules are stored in ASCII (punycode) form to match parsed URL hosts.
#[derive(Debug, Clone, Default)]
pub struct PublicSuffixList {
    rules: HashSet<String>,
    wildcards: HashSet<String>,
    exceptions: HashSet<String>,
}

fn ascii_label(label: &str) -> Option<String> {
    if label.is_ascii() {
        return Some(label.to_ascii_lowercase());
    }
    match url::Host::parse(label).ok()? {
        url::Host::Domain(d) => Some(d),
        _ => None,
    }
}

fn ascii_rule(rule: &str) -> Option<String> {
    rule.split('.')
        .map(|l| if l == "*" { Some("*".to_string()) } else { ascii_label(l) })
        .collect::<Option<Vec<_>>>()
        .map(|v| v.join("."))
}

impl PublicSuffixList {
    pub fn bundled() -> &'static PublicSuffixList {
        static LIST: std::sync::OnceLock<PublicSuffixList> = std::sync::OnceLock::new();
        LIST.get_or_init(|| PublicSuffixList::parse(BUNDLED).expect("bundled suffix list parses"))
    }

    pub fn parse(text: &str) -> Result<Self, CredibilityError> {
        let mut list = Self::default();
        for (i, line) in text.lines().enumerate() {
            let rule = line.split_whitespace().next().unwrap_or("");
            if rule.is_empty() || rule.starts_with("//") {
                continue;
            }
            let bad = |message: &str| CredibilityError::SuffixList {
                line: i + 1,
                message: message.to_string(),
            };
            if let Some(rest) = rule.strip_prefix('!') {
                let r = ascii_rule(rest).ok_or_else(|| bad("invalid exception rule"))?;
                if r.contains('*') || !r.contains('.') {
                    return Err(bad("exception rule must be a plain multi-label name"));
                }
                list.exceptions.insert(r);
            } else if let Some(rest) = rule.strip_prefix("*.") {
                let r = ascii_rule(rest).ok_or_else(|| bad("invalid wildcard rule"))?;
                if r.contains('*') {
                    return Err(bad("only a leading wildcard label is supported"));
                }
                list.wildcards.insert(r);
            } else {
                let r = ascii_rule(rule).ok_or_else(|| bad("invalid rule"))?;
                if r.contains('*') {
                    return Err(bad("only a leading wildcard label is supported"));
                }
                list.rules.insert(r);
            }
        }
        Ok(list)
    }

    pub fn len(&self) -> usize {
        self.rules.len() + self.wildcards.len() + self.exceptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of trailing labels of `host` forming its public suffix.
    fn suffix_labels(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        let joined = |k: usize| labels[n - k..].join(".");
        // an exception rule wins and yields its parent as the suffix
        for k in (2..=n).rev() {
            if self.exceptions.contains(&joined(k)) {
                return k - 1;
            }
        }
        let mut best = 1;
        for k in 1..=n {
            let tail = joined(k);
            if self.rules.contains(&tail) {
                best = best.max(k);
            }
            if k < n && self.wildcards.contains(&tail) {
                best = best.max(k + 1);
            }
        }
        best
    }

    /// Public suffix plus one label, or the host itself when the host is
    /// a bare suffix.
    pub fn registrable_domain(&self, host: &str) -> String {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        let labels: Vec<&str> = host.split('.').collect();
        if labels.iter().any(|l| l.is_empty()) {
            return host;
        }
        let k = self.suffix_labels(&labels);
        if k >= labels.len() {
            return host;
        }
        labels[labels.len() - k - 1..].join(".")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(host: &str) -> String {
        PublicSuffixList::bundled().registrable_domain(host)
    }

    #[test]
    fn plain_and_multi_label_suffixes() {
        assert_eq!(reg("news.sse.com.cn"), "sse.com.cn");
        assert_eq!(reg("finance.eastmoney.com"), "eastmoney.com");
        assert_eq!(reg("www.miit.gov.cn"), "miit.gov.cn");
        assert_eq!(reg("bbc.co.uk"), "bbc.co.uk");
        assert_eq!(reg("example.com"), "example.com");
    }

    #[test]
    fn unknown_tld_uses_default_rule() {
        assert_eq!(reg("a.b.example.zz"), "example.zz");
    }

    #[test]
    fn suffix_only_is_returned_as_is() {
        assert_eq!(reg("com.cn"), "com.cn");
        assert_eq!(reg("gov.cn"), "gov.cn");
        assert_eq!(reg("localhost"), "localhost");
    }

    #[test]
    fn wildcard_and_exception() {
        assert_eq!(reg("a.b.kawasaki.jp"), "a.b.kawasaki.jp");
        assert_eq!(reg("x.a.b.kawasaki.jp"), "a.b.kawasaki.jp");
        assert_eq!(reg("city.kawasaki.jp"), "city.kawasaki.jp");
        assert_eq!(reg("www.city.kawasaki.jp"), "city.kawasaki.jp");
        assert_eq!(reg("www.ck"), "www.ck");
        assert_eq!(reg("shop.foo.ck"), "shop.foo.ck");
    }

    #[test]
    fn unicode_rules_become_punycode() {
        let host = match url::Host::parse("例子.中国").unwrap() {
            url::Host::Domain(d) => d,
            _ => unreachable!(),
        };
        assert_eq!(reg(&format!("www.{host}")), host);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            PublicSuffixList::parse("com\n!com\n"),
            Err(CredibilityError::SuffixList { line: 2, .. })
        ));
        assert!(PublicSuffixList::parse("a.*.b").is_err());
    }
}
