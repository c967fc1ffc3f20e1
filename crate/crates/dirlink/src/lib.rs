//! Directed k-disjoint paths with vertex congestion.

pub mod cli;
pub mod dp;
pub mod dtw;
pub mod format;
pub mod generators;
pub mod graph;
pub mod hardness;
pub mod oracle;
pub mod pipeline;
pub mod menger;
pub mod separation;
pub mod special;
pub mod uncross;
