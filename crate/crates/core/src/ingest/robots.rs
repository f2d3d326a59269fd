//! Minimal `robots.txt` evaluation for the live fetcher.

/// Allow/disallow rules that apply to one user agent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RobotsRules {
    rules: Vec<(bool, String)>,
}

impl RobotsRules {
    /// Parse `robots.txt` and keep the group for `agent`, falling back to `*`.
    pub fn parse(text: &str, agent: &str) -> Self {
        let agent = agent.to_ascii_lowercase();
        let mut specific = Vec::new();
        let mut wildcard = Vec::new();
        let mut group_agents: Vec<String> = Vec::new();
        let mut in_rules = false;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let Some((key, value)) = line.split_once(':') else {
                continue;
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "user-agent" => {
                    if in_rules {
                        group_agents.clear();
                        in_rules = false;
                    }
                    group_agents.push(value.to_ascii_lowercase());
                }
                "allow" | "disallow" => {
                    in_rules = true;
                    if value.is_empty() {
                        continue;
                    }
                    let rule = (key == "allow", value.to_string());
                    if group_agents.iter().any(|a| a != "*" && agent.contains(a.as_str())) {
                        specific.push(rule.clone());
                    }
                    if group_agents.iter().any(|a| a == "*") {
                        wildcard.push(rule);
                    }
                }
                _ => {}
            }
        }
        Self {
            rules: if specific.is_empty() { wildcard } else { specific },
        }
    }

    /// Longest matching prefix wins; ties go to allow.
    pub fn is_allowed(&self, path: &str) -> bool {
        let mut best: Option<(usize, bool)> = None;
        for (allow, prefix) in &self.rules {
            if path_matches(prefix, path) {
                let len = prefix.len();
                match best {
                    Some((l, a)) if l > len || (l == len && a) => {}
                    _ => best = Some((len, *allow)),
                }
            }
        }
        best.is_none_or(|(_, allow)| allow)
    }
}

fn path_matches(pattern: &str, path: &str) -> bool {
    let (pattern, anchored) = match pattern.strip_suffix('$') {
        Some(p) => (p, true),
        None => (pattern, false),
    };
    let parts: Vec<&str> = pattern.split('*').collect();
    let last = parts.len() - 1;
    if !path.starts_with(parts[0]) {
        return false;
    }
    if last == 0 {
        return !anchored || path.len() == parts[0].len();
    }
    let mut pos = parts[0].len();
    for (i, part) in parts.iter().enumerate().skip(1) {
        if i == last && anchored {
            return path.len() >= pos + part.len() && path.ends_with(part);
        }
        match path[pos..].find(part) {
            Some(j) => pos += j + part.len(),
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disallow_prefix() {
        let r = RobotsRules::parse("User-agent: *\nDisallow: /private\nAllow: /private/ok\n", "sckg");
        assert!(r.is_allowed("/public"));
        assert!(!r.is_allowed("/private/x"));
        assert!(r.is_allowed("/private/ok/1"));
    }

    #[test]
    fn specific_agent_group_wins() {
        let text = "User-agent: *\nDisallow: /\n\nUser-agent: sckg\nDisallow: /admin\n";
        let r = RobotsRules::parse(text, "sckg-bot/0.1");
        assert!(r.is_allowed("/news"));
        assert!(!r.is_allowed("/admin"));
    }

    #[test]
    fn wildcards_and_anchors() {
        let r = RobotsRules::parse("User-agent: *\nDisallow: /*.pdf$\n", "x");
        assert!(!r.is_allowed("/a/b.pdf"));
        assert!(r.is_allowed("/a/b.pdf.html"));
        assert!(!r.is_allowed("/x.pdf/y.pdf"));
    }

    #[test]
    fn empty_disallow_allows_everything() {
        let r = RobotsRules::parse("User-agent: *\nDisallow:\n", "x");
        assert!(r.is_allowed("/anything"));
        assert!(RobotsRules::parse("garbage\n::\n", "x").is_allowed("/"));
    }
}
