//! Run configuration, artifact writers and the batch commands.

pub mod commands;
pub mod config;
pub mod writers;

pub use commands::{
    bounds, field, load_design, monotonicity, optimize, verify, verify_samples, BoundsOutcome, FieldOutcome,
    MonotonicityOutcome, OptimizeOutcome, RunMetadata, VerifyOutcome, VerifyReport,
};
pub use config::{
    FilterConfig, LoadConfig, MeshConfig, ObjectiveConfig, OutputConfig, PeriodicConfig, RunConfig, SampleConfig,
    UncertaintyConfig, VerifyConfig,
};
pub use writers::{
    bounds_toml, density_csv, density_pgm, distribution_envelopes, ecdf, envelopes_csv, history_csv, kde,
    ks_distance, read_density_csv, read_history_csv, silverman_bandwidth, write_density_outputs, write_history,
    Envelopes, HISTORY_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_VERIFY_FAILED: i32 = 5;
