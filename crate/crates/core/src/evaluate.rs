//! Estimated-versus-actual comparison per CMG and the bucketed performance
//! summary.

use crate::aggregate::{check_same_cmgs, StatsMap};
use crate::domain::{Buckets, ErrorRecord, ModelId, PerformanceTable};
use crate::error::{Error, Result};

/// Signed errors (estimate minus actual) for every CMG, in CMG order.
pub fn compute_errors(estimated: &StatsMap, actual: &StatsMap) -> Result<Vec<ErrorRecord>> {
    check_same_cmgs(estimated, actual)?;
    estimated
        .iter()
        .map(|(cmg, e)| {
            let a = &actual[cmg];
            if a.total == 0.0 {
                return Err(Error::ZeroActualTotal(cmg.clone()));
            }
            let e_total = e.total - a.total;
            Ok(ErrorRecord {
                cmg: cmg.clone(),
                e_total,
                e_avg: e.average - a.average,
                e_stdev: e.stdev - a.stdev,
                e_min: e.min - a.min,
                e_max: e.max - a.max,
                rel_total: e_total / a.total,
            })
        })
        .collect()
}

/// Number of CMGs per bucket, by `|rel_total|` in percent.
pub fn bucket_counts(errors: &[ErrorRecord], buckets: &Buckets) -> Vec<u64> {
    let mut counts = vec![0u64; buckets.len()];
    for e in errors {
        counts[buckets.index_of(e.rel_total * 100.0)] += 1;
    }
    counts
}

/// Percentage of CMGs per bucket (`100 * n_ab / n`). All zeros for an
/// empty error list.
pub fn bucketize(errors: &[ErrorRecord], buckets: &Buckets) -> Vec<f64> {
    to_percent(&bucket_counts(errors, buckets), errors.len())
}

pub(crate) fn to_percent(counts: &[u64], n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| 100.0 * c as f64 / n as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanAbsErrors {
    pub avg: f64,
    pub min: f64,
    pub max: f64,
    pub stdev: f64,
}

pub fn mean_abs_errors(errors: &[ErrorRecord]) -> MeanAbsErrors {
    let n = errors.len().max(1) as f64;
    let mean = |f: fn(&ErrorRecord) -> f64| errors.iter().map(|e| f(e).abs()).sum::<f64>() / n;
    MeanAbsErrors {
        avg: mean(|e| e.e_avg),
        min: mean(|e| e.e_min),
        max: mean(|e| e.e_max),
        stdev: mean(|e| e.e_stdev),
    }
}

pub fn performance_table(model: ModelId, errors: &[ErrorRecord], buckets: &Buckets) -> PerformanceTable {
    let counts = bucket_counts(errors, buckets);
    let m = mean_abs_errors(errors);
    PerformanceTable {
        model,
        buckets: buckets.clone(),
        p_ab: to_percent(&counts, errors.len()),
        counts,
        mean_abs_e_avg: m.avg,
        mean_abs_e_min: m.min,
        mean_abs_e_max: m.max,
        mean_abs_e_stdev: m.stdev,
        n_groups: errors.len() as u64,
    }
}
