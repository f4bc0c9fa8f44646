//! Experiment harness: identity residuals, order fits, studies and reports.

pub mod fit;
pub mod identities;
pub mod config;
pub mod criteria;
pub mod experiments;
pub mod report;

pub use experiments::configure_threads;
