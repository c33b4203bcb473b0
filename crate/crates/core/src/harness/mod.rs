//! Instance generators, experiment runner, privacy audit and invariant
//! suites.

pub mod audit;
pub mod experiment;
pub mod instances;
pub mod suites;

pub use audit::{adversarial_pairs, audit_pairs, audit_privacy, AuditReport, AuditSpec};
pub use experiment::{run_experiment, ExperimentResult, ExperimentSpec, QuantileSummary, Scenario, TrialRecord};
pub use instances::{
    conditioned_gap_spectrum, gen_conditioned_gap_instance, gen_projection_instance, gen_wishart_instance, gen_wishart_instance_with,
    WishartNorm,
};
pub use suites::{selftest, SelftestReport, SuiteResult};
