pub mod analytics;
pub mod credibility;
pub mod extract;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod resolve;
