//! Patient-level hospital case-cost estimation.
//!
//! Five financial models assign each inpatient case a cost estimate:
//! two weight-based models (`pac_riw * cpwc`, and a variant that repairs
//! CMGs whose PAC weights are all identical), a weight-based model
//! normalized to the benchmark total, and two per-diem models (plain length
//! of stay, and stay-type differentiated with coefficients `k1..k3`).
//! Estimates are aggregated per CMG, compared against a benchmark of actual
//! costs, and summarized as bucketed relative errors plus averaged absolute
//! errors. A hybrid takes totals from the normalized weight model and
//! min/max from the stay-type model, and an exhaustive grid search tunes
//! `k1..k3` under lexicographic criteria.
//!
//! See the crate's `examples/` directory for runnable walkthroughs.

pub mod aggregate;
pub mod cli;
pub mod domain;
pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod models;
pub mod optimize;
pub mod pipeline;
pub mod report;
pub mod synthetic;

pub use aggregate::{aggregate, hybrid_combine, StatsMap, StdevMode};
pub use domain::{
    validate_case, Bucket, Buckets, CaseId, CaseRecord, CmgCode, CmgStats, ErrorRecord, HospitalCostParams,
    ModelConfig, ModelId, PerformanceTable, Severity, StayCoefficients, Violation,
};
pub use error::{Error, Result};
pub use evaluate::{bucketize, compute_errors, mean_abs_errors, performance_table};
pub use ingest::{load_dataset, load_dataset_dir, write_dataset, Dataset};
pub use models::{compute_pac_mod, estimate, CaseEstimate, Estimation, WeightMap};
pub use optimize::{
    criterion_vector, grid_search, lex_better, CriterionVector, GridResult, GridSpec, Range, SearchOptions,
};
pub use pipeline::{run_model, ModelRun};
pub use synthetic::{generate_synthetic, CostProcess, SyntheticData, SyntheticSpec};
