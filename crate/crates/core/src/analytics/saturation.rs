use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalyticsError;

/// One (relation, template) observation with the rank of its search item.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RankedItem {
    pub template: String,
    pub relation_key: String,
    pub rank: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub n: u32,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    /// template -> [(N, yield fraction)]
    pub per_template: BTreeMap<String, Vec<(u32, f64)>>,
    /// Mean and min-max across templates at each N.
    pub band: Vec<BandPoint>,
}

/// A relation counts at level N when its best (smallest) rank is at most N.
/// Yields are normalized by the count at the largest N. Templates with no
/// relation at the largest N are left out.
pub fn saturation_curve(items: &[RankedItem], n_values: &[u32]) -> Result<SaturationReport, AnalyticsError> {
    let ns: BTreeSet<u32> = n_values.iter().copied().filter(|&n| n > 0).collect();
    let Some(&n_max) = ns.iter().next_back() else {
        return Err(AnalyticsError::Empty("N values"));
    };
    let mut best: BTreeMap<&str, BTreeMap<&str, u32>> = BTreeMap::new();
    for item in items {
        let rank = item.rank.ok_or_else(|| AnalyticsError::MissingRank {
            template: item.template.clone(),
            relation: item.relation_key.clone(),
        })?;
        let slot = best
            .entry(item.template.as_str())
            .or_default()
            .entry(item.relation_key.as_str())
            .or_insert(rank);
        *slot = (*slot).min(rank);
    }
    let mut per_template = BTreeMap::new();
    for (template, relations) in best {
        let total = relations.values().filter(|&&r| r <= n_max).count();
        if total == 0 {
            continue;
        }
        let curve = ns
            .iter()
            .map(|&n| {
                let hit = relations.values().filter(|&&r| r <= n).count();
                (n, if n == n_max { 1.0 } else { hit as f64 / total as f64 })
            })
            .collect();
        per_template.insert(template.to_string(), curve);
    }
    let band = ns
        .iter()
        .enumerate()
        .filter(|_| !per_template.is_empty())
        .map(|(i, &n)| {
            let ys: Vec<f64> = per_template.values().map(|c: &Vec<(u32, f64)>| c[i].1).collect();
            BandPoint {
                n,
                mean: ys.iter().sum::<f64>() / ys.len() as f64,
                min: ys.iter().copied().fold(f64::INFINITY, f64::min),
                max: ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Ok(SaturationReport { per_template, band })
}
