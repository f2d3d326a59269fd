//! Network statistics, degree distributions, saturation curves, cost
//! tables and benchmark coverage.

mod cost;
mod coverage;
mod degree;
mod saturation;

pub use cost::{cost_report, ArmLedger, ArmReport, CostReport, RatioColumn};
pub use coverage::{coverage_compare, BenchmarkGraph, Coverage};
pub use degree::{
    ccdf, degrees, fit_slope, network_stats, top_degree_table, CcdfPoint, DegreeRow, NetworkStats, SlopeFit,
};
pub use saturation::{saturation_curve, BandPoint, RankedItem, SaturationReport};

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("need at least {needed} points in range, found {found}")]
    InsufficientData { found: usize, needed: usize },
    #[error("relation `{relation}` under template `{template}` has no rank")]
    MissingRank { template: String, relation: String },
    #[error("benchmark line {line}: {message}")]
    Benchmark { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
