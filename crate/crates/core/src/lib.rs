pub mod error;
pub mod graph;
pub mod ingestion;
pub mod oracle;
pub mod par;
pub mod centrality;
pub mod longitudinal;
pub mod stats;
pub mod simulation;
pub mod report;
pub mod selftest;
