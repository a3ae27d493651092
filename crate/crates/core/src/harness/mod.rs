//! Tampering experiments, distances and encoder oracles.

mod dist;
mod experiment;
mod oracle;
mod tamper;

pub use dist::{tv_distance, Dist, Distance};
pub use experiment::{
    confidence_radius, run_experiment, run_experiment_t, ComponentReport, ExperimentReport, MessageReport,
    CHUNK_TRIALS, MAX_FAILURE_RATE, MAX_OUTPUT_BITS, MIN_TRIALS,
};
pub use oracle::{
    brute_force_oracle, brute_force_preimages, compare_with_oracle, default_projections, Feature, MessageOracle,
    OracleReport, Projection, ProjectionRow, BRUTE_FORCE_MAX_BITS,
};
pub use tamper::{tamper_apply, TamperFamily, TamperSpec, LOOKUP_MAX_BITS};
