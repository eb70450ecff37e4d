//! Experiment harness for the qsmpc simulator: scenario files, trial
//! runners, fixture replay and reports.

pub mod error;
pub mod experiments;
pub mod fixture;
pub mod report;
pub mod scenario;
pub mod stats;

pub use error::HarnessError;
pub use report::Report;
pub use scenario::Scenario;
