//! Finite-scale coarse geometry: metric families, decomposition witnesses
//! and chains, exhaustive and heuristic decomposition search, group windows
//! with relative Cayley graphs, and certificate pipelines for free products.

pub mod coarse;
pub mod generate;
pub mod groups;
pub mod metric;
pub mod witness;
pub mod search;
pub mod io;
pub mod pipeline;
pub mod dot;
pub mod cli;
