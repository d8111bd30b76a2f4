//! Experiment orchestration: configuration files, the verification suite, norm scaling
//! studies with exponent fits, and report emission.

mod config;
mod report;
mod scaling;
mod verify;

pub use config::{ExperimentConfig, Family, Growth, NormSpec, Output, ReportFormat, Truncation};
pub use report::{emit_report, Render};
pub use scaling::{run_scaling, Fit, GroupFit, ScalingReport, ScalingRow};
pub use verify::{run_verification_suite, CheckEntry, Relation, VerificationReport};
