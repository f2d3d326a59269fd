use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// A search seed firm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub listed: bool,
}

pub fn load_targets(path: &Path) -> Result<Vec<Target>, IngestError> {
    let text = fs::read_to_string(path)?;
    parse_targets(&text, path)
}

/// Parse a target list: tab-separated `target_id`, `name`, `listed_flag`
/// with a header row. Order of the file is preserved.
pub fn parse_targets(text: &str, path: &Path) -> Result<Vec<Target>, IngestError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| IngestError::Fixture {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if i == 0 {
            if !line.starts_with("target_id") {
                return Err(err("expected header `target_id\\tname\\tlisted_flag`".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(err(format!("expected at least 2 columns, found {}", cols.len())));
        }
        let id = cols[0].trim();
        let name = cols[1].trim();
        if id.is_empty() || name.is_empty() {
            return Err(err("empty target id or name".into()));
        }
        let listed = match cols.get(2).map(|s| s.trim()) {
            None | Some("") => false,
            Some(flag) => parse_flag(flag).ok_or_else(|| err(format!("bad listed flag `{flag}`")))?,
        };
        if !seen.insert(id.to_string()) {
            return Err(err(format!("duplicate target id `{id}`")));
        }
        out.push(Target {
            id: id.to_string(),
            name: name.to_string(),
            listed,
        });
    }
    Ok(out)
}

pub fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_targets() {
        let text = "target_id\tname\tlisted_flag\nT1\t华为\t0\nT2\tBYD\t1\n";
        let t = parse_targets(text, Path::new("t.tsv")).unwrap();
        assert_eq!(t.len(), 2);
        assert!(!t[0].listed);
        assert!(t[1].listed);
    }

    #[test]
    fn rejects_duplicates_and_missing_header() {
        assert!(parse_targets("T1\tX\t0\n", Path::new("t")).is_err());
        let dup = "target_id\tname\nT1\tX\nT1\tY\n";
        assert!(matches!(
            parse_targets(dup, Path::new("t")),
            Err(IngestError::Fixture { line: 3, .. })
        ));
    }
}
