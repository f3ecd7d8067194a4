//! Batch harness around `truthlab-core`: instance loading, mechanism runs,
//! property checks and bound reproduction with machine-readable reports.

pub mod check;
pub mod input;
pub mod report;
pub mod reproduce;
pub mod run;
