//! Configuration, orchestration and persistence for the vortex pipeline.

pub mod compare;
pub mod config;
pub mod pipeline;
pub mod stages;

pub use compare::{compare_baseline, CompareError, Tolerances, Verdict};
pub use config::{ConfigError, RunConfig};
pub use pipeline::{run_pipeline, PipelineError, RunManifest};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const STAGE: i32 = 3;
    pub const MISMATCH: i32 = 4;
}
