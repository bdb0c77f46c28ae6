//! Estimate, aggregate, compare and summarize one model over a dataset.

use crate::aggregate::{aggregate_with, hybrid_combine, StatsMap, StdevMode};
use crate::domain::{ErrorRecord, ModelConfig, ModelId, PerformanceTable, Violation};
use crate::error::Result;
use crate::evaluate::{compute_errors, performance_table};
use crate::ingest::Dataset;
use crate::models::{estimate, CaseEstimate};

#[derive(Debug, Clone)]
pub struct ModelRun {
    pub model: ModelId,
    /// Empty for the hybrid, which has no per-case values.
    pub estimates: Vec<CaseEstimate>,
    pub stats: StatsMap,
    pub errors: Vec<ErrorRecord>,
    pub table: PerformanceTable,
    pub warnings: Vec<Violation>,
}

pub fn run_model(dataset: &Dataset, config: &ModelConfig) -> Result<ModelRun> {
    run_model_with(dataset, config, StdevMode::Sample)
}

pub fn run_model_with(dataset: &Dataset, config: &ModelConfig, mode: StdevMode) -> Result<ModelRun> {
    let (estimates, stats, warnings) = match config.model {
        ModelId::Hybrid => {
            let m3 = estimate(ModelId::M3, dataset, config)?;
            let m5 = estimate(ModelId::M5, dataset, config)?;
            let combined = hybrid_combine(
                &aggregate_with(&m3.estimates, mode),
                &aggregate_with(&m5.estimates, mode),
            )?;
            let mut warnings = m5.warnings;
            warnings.push(Violation::warning(
                "HYBRID",
                "stdev is Model 3's and is not consistent with the borrowed min/max",
            ));
            warnings.extend(combined.warnings);
            (Vec::new(), combined.stats, warnings)
        }
        model => {
            let est = estimate(model, dataset, config)?;
            let stats = aggregate_with(&est.estimates, mode);
            (est.estimates, stats, est.warnings)
        }
    };
    let errors = compute_errors(&stats, dataset.benchmark())?;
    let table = performance_table(config.model, &errors, &config.buckets);
    Ok(ModelRun {
        model: config.model,
        estimates,
        stats,
        errors,
        table,
        warnings,
    })
}
