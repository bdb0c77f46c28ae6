//! Per-CMG aggregation of case estimates and the hybrid combination of two
//! models' statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{CmgCode, CmgStats, Violation};
use crate::error::{Error, Result};
use crate::models::CaseEstimate;

/// Divisor used for the standard deviation. Sample (n - 1) is the default;
/// a singleton group always has stdev 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdevMode {
    #[default]
    Sample,
    Population,
}

pub type StatsMap = BTreeMap<CmgCode, CmgStats>;

/// Summary statistics of one group of costs, summed in the order given.
pub fn summarize(cmg: CmgCode, values: &[f64], mode: StdevMode) -> CmgStats {
    let n = values.len();
    let total: f64 = values.iter().sum();
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if n == 0 {
        return CmgStats {
            cmg,
            case_count: 0,
            total: 0.0,
            average: 0.0,
            stdev: 0.0,
            min: 0.0,
            max: 0.0,
        };
    }
    // total / n can land an ulp outside [min, max] for constant groups
    let average = (total / n as f64).clamp(min, max);
    let divisor = match mode {
        StdevMode::Sample => n.saturating_sub(1),
        StdevMode::Population => n,
    };
    let stdev = if n < 2 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - average).powi(2)).sum();
        (ss / divisor as f64).sqrt()
    };
    CmgStats {
        cmg,
        case_count: n as u64,
        total,
        average,
        stdev,
        min,
        max,
    }
}

pub fn aggregate(estimates: &[CaseEstimate]) -> StatsMap {
    aggregate_with(estimates, StdevMode::Sample)
}

pub fn aggregate_with(estimates: &[CaseEstimate], mode: StdevMode) -> StatsMap {
    let mut groups: BTreeMap<&CmgCode, Vec<f64>> = BTreeMap::new();
    for e in estimates {
        groups.entry(&e.cmg).or_default().push(e.cce);
    }
    groups
        .into_iter()
        .map(|(cmg, values)| (cmg.clone(), summarize(cmg.clone(), &values, mode)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridStats {
    pub stats: StatsMap,
    pub warnings: Vec<Violation>,
}

/// Takes total, average, stdev and count from `primary` and min/max from
/// `minmax`. Where the borrowed min or max would exclude the average, it is
/// widened to the average and a warning is recorded.
pub fn hybrid_combine(primary: &StatsMap, minmax: &StatsMap) -> Result<HybridStats> {
    check_same_cmgs(primary, minmax)?;
    let mut warnings = Vec::new();
    let mut stats = StatsMap::new();
    for (cmg, p) in primary {
        let m = &minmax[cmg];
        let mut min = m.min;
        let mut max = m.max;
        if min > p.average {
            warnings.push(Violation::warning(
                format!("CMG {cmg}"),
                format!("hybrid min {min:.2} above average {:.2}; widened", p.average),
            ));
            min = p.average;
        }
        if max < p.average {
            warnings.push(Violation::warning(
                format!("CMG {cmg}"),
                format!("hybrid max {max:.2} below average {:.2}; widened", p.average),
            ));
            max = p.average;
        }
        stats.insert(cmg.clone(), CmgStats { min, max, ..p.clone() });
    }
    Ok(HybridStats { stats, warnings })
}

pub(crate) fn check_same_cmgs(a: &StatsMap, b: &StatsMap) -> Result<()> {
    let only_a: Vec<String> = a.keys().filter(|k| !b.contains_key(*k)).map(|k| k.0.clone()).collect();
    let only_b: Vec<String> = b.keys().filter(|k| !a.contains_key(*k)).map(|k| k.0.clone()).collect();
    if only_a.is_empty() && only_b.is_empty() {
        return Ok(());
    }
    Err(Error::Coverage(format!(
        "only in first: [{}]; only in second: [{}]",
        only_a.join(", "),
        only_b.join(", ")
    )))
}
