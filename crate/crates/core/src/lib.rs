//! Exclusivity-graph analysis of bipartite Bell inequalities whose events
//! form a pentagon.

pub mod cli;
pub mod error;
pub mod graphs;
pub mod numerics;
pub mod quantum;
pub mod report;
pub mod scenarios;
pub mod simkit;
pub mod theta;

pub use error::{Error, Result};
