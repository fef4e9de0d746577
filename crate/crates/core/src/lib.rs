//! Univariate data-drift detection: two-sample methods, threshold and alarm
//! rules, chunked evaluation, synthetic scenarios and a measurement harness.

pub mod bench;
pub mod chunking;
pub mod dataset;
pub mod decision;
pub mod error;
pub mod methods;
pub mod par;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
