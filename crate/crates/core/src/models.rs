//! Per-case cost estimates under the five financial models.
//!
//! * M1: `pac_riw * cpwc`
//! * M2: `pac_mod * cpwc`, where `pac_mod` repairs CMGs whose PAC weights
//!   are all identical by redistributing their PAC total in proportion to RIW
//! * M3: M2 scaled so the dataset total matches the benchmark total
//! * M4: `los_total * cpd`, normalized the same way
//! * M5: stay-type weighted days `(acute - sc) * k1 + alc * k2 + sc * k3`,
//!   times `cpd`, normalized
//!
//! The normalized models make two passes: raw values first, then a single
//! factor computed from the complete raw sum.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::aggregate::StatsMap;
use crate::domain::{
    CaseId, CaseRecord, CmgCode, HospitalCostParams, ModelConfig, ModelId, StayCoefficients, Violation,
};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseEstimate {
    pub case_id: CaseId,
    pub cmg: CmgCode,
    pub cce: f64,
}

impl CaseEstimate {
    fn for_case(case: &CaseRecord, cce: f64) -> Self {
        CaseEstimate {
            case_id: case.case_id.clone(),
            cmg: case.cmg.clone(),
            cce,
        }
    }
}

/// Repaired PAC weight per case.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightMap {
    weights: HashMap<CaseId, f64>,
    redistributed: BTreeSet<CmgCode>,
}

impl WeightMap {
    pub fn get(&self, id: &CaseId) -> Option<f64> {
        self.weights.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// CMGs whose weights were rebuilt from RIW.
    pub fn redistributed(&self) -> &BTreeSet<CmgCode> {
        &self.redistributed
    }
}

fn all_equal(values: impl Iterator<Item = f64>) -> bool {
    let mut it = values;
    match it.next() {
        None => true,
        Some(first) => it.all(|v| v == first),
    }
}

fn group_indices(cases: &[CaseRecord]) -> BTreeMap<&CmgCode, Vec<usize>> {
    let mut groups: BTreeMap<&CmgCode, Vec<usize>> = BTreeMap::new();
    for (i, c) in cases.iter().enumerate() {
        groups.entry(&c.cmg).or_default().push(i);
    }
    groups
}

/// Builds the repaired weights. Within a CMG, weights stay as `pac_riw`
/// unless every PAC weight is identical while RIW values differ; then each
/// case gets `riw * (sum pac_riw / sum riw)`. Ties are exact comparisons.
pub fn compute_pac_mod(cases: &[CaseRecord]) -> Result<WeightMap> {
    let mut map = WeightMap {
        weights: HashMap::with_capacity(cases.len()),
        redistributed: BTreeSet::new(),
    };
    for (cmg, idx) in group_indices(cases) {
        let members = || idx.iter().map(|&i| &cases[i]);
        let pac_flat = all_equal(members().map(|c| c.pac_riw));
        let riw_flat = all_equal(members().map(|c| c.riw));
        if pac_flat && !riw_flat {
            let pac_sum: f64 = members().map(|c| c.pac_riw).sum();
            let riw_sum: f64 = members().map(|c| c.riw).sum();
            if riw_sum <= 0.0 {
                return Err(Error::ZeroRiwSum { cmg: cmg.clone() });
            }
            let ratio = pac_sum / riw_sum;
            for c in members() {
                map.weights.insert(c.case_id.clone(), c.riw * ratio);
            }
            map.redistributed.insert(cmg.clone());
        } else {
            for c in members() {
                map.weights.insert(c.case_id.clone(), c.pac_riw);
            }
        }
    }
    Ok(map)
}

pub fn estimate_m1(case: &CaseRecord, params: &HospitalCostParams) -> CaseEstimate {
    CaseEstimate::for_case(case, case.pac_riw * params.cpwc)
}

pub fn estimate_m2(case: &CaseRecord, weights: &WeightMap, params: &HospitalCostParams) -> Result<CaseEstimate> {
    let w = weights
        .get(&case.case_id)
        .ok_or_else(|| Error::MissingWeight(case.case_id.clone()))?;
    Ok(CaseEstimate::for_case(case, w * params.cpwc))
}

/// Ratio of the benchmark total (average times count, summed over CMGs) to
/// the sum of the raw estimates.
pub fn normalization_factor(raw: &[CaseEstimate], benchmark: &StatsMap) -> Result<f64> {
    let covered: BTreeSet<&CmgCode> = raw.iter().map(|e| &e.cmg).collect();
    let expected: BTreeSet<&CmgCode> = benchmark.keys().collect();
    if covered != expected {
        let missing: Vec<&str> = expected.difference(&covered).map(|c| c.as_str()).collect();
        let extra: Vec<&str> = covered.difference(&expected).map(|c| c.as_str()).collect();
        return Err(Error::Coverage(format!(
            "benchmark CMGs without estimates: [{}]; estimated CMGs without benchmark: [{}]",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    let raw_sum: f64 = raw.iter().map(|e| e.cce).sum();
    normalization_ratio(benchmark_target(benchmark), raw_sum)
}

pub(crate) fn benchmark_target(benchmark: &StatsMap) -> f64 {
    benchmark.values().map(|s| s.average * s.case_count as f64).sum()
}

pub(crate) fn normalization_ratio(target: f64, raw_sum: f64) -> Result<f64> {
    if !raw_sum.is_finite() || raw_sum <= 0.0 {
        return Err(Error::ZeroDenominator("sum of raw estimates"));
    }
    Ok(target / raw_sum)
}

fn normalize(mut raw: Vec<CaseEstimate>, benchmark: &StatsMap) -> Result<Vec<CaseEstimate>> {
    let factor = normalization_factor(&raw, benchmark)?;
    for e in &mut raw {
        e.cce *= factor;
    }
    Ok(raw)
}

pub fn estimate_m3(
    cases: &[CaseRecord],
    weights: &WeightMap,
    params: &HospitalCostParams,
    benchmark: &StatsMap,
) -> Result<Vec<CaseEstimate>> {
    let raw = cases
        .iter()
        .map(|c| estimate_m2(c, weights, params))
        .collect::<Result<Vec<_>>>()?;
    normalize(raw, benchmark)
}

pub fn estimate_m4(
    cases: &[CaseRecord],
    params: &HospitalCostParams,
    benchmark: &StatsMap,
) -> Result<Vec<CaseEstimate>> {
    let raw = cases
        .iter()
        .map(|c| CaseEstimate::for_case(c, c.los_total.max(0) as f64 * params.cpd_total))
        .collect();
    normalize(raw, benchmark)
}

/// Stay-type weighted days for one case. Acute days net of special-care
/// time clamp at zero.
pub fn stay_units(case: &CaseRecord, k: &StayCoefficients) -> f64 {
    let sc = case.sc_days();
    let acute = (case.los_acute as f64 - sc).max(0.0);
    acute * k.k1 + case.los_alc.max(0) as f64 * k.k2 + sc * k.k3
}

pub fn estimate_m5(
    cases: &[CaseRecord],
    params: &HospitalCostParams,
    k: &StayCoefficients,
    benchmark: &StatsMap,
) -> Result<Vec<CaseEstimate>> {
    k.validate()?;
    let raw = cases
        .iter()
        .map(|c| CaseEstimate::for_case(c, stay_units(c, k) * params.cpd_total))
        .collect();
    normalize(raw, benchmark)
}

/// Warnings attached to the per-diem models: zero-day stays (which get a
/// zero estimate) and special-care time exceeding acute days.
pub fn per_diem_warnings(cases: &[CaseRecord], model: ModelId) -> Vec<Violation> {
    let mut out = Vec::new();
    for c in cases {
        let subject = format!("case {}", c.case_id);
        let zero = match model {
            ModelId::M4 => c.los_total == 0,
            ModelId::M5 => c.los_acute == 0 && c.los_alc == 0 && c.sc_hours == 0.0,
            _ => false,
        };
        if zero {
            out.push(Violation::warning(
                &subject,
                format!("zero length of stay; {model} estimate is 0"),
            ));
        }
        if model == ModelId::M5 && c.sc_days() > c.los_acute as f64 {
            out.push(Violation::warning(
                &subject,
                format!(
                    "special-care time {:.2} days exceeds {} acute days; acute term clamped to 0",
                    c.sc_days(),
                    c.los_acute
                ),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimation {
    pub model: ModelId,
    pub estimates: Vec<CaseEstimate>,
    pub warnings: Vec<Violation>,
}

impl Estimation {
    pub fn total(&self) -> f64 {
        self.estimates.iter().map(|e| e.cce).sum()
    }
}

/// Runs one per-case model over a dataset. The hybrid works on per-CMG
/// statistics and is rejected here.
pub fn estimate(model: ModelId, dataset: &Dataset, config: &ModelConfig) -> Result<Estimation> {
    let cases = dataset.cases();
    let params = dataset.params();
    let bench = dataset.benchmark();
    let estimates = match model {
        ModelId::M1 => cases.iter().map(|c| estimate_m1(c, params)).collect(),
        ModelId::M2 => {
            let w = compute_pac_mod(cases)?;
            cases
                .iter()
                .map(|c| estimate_m2(c, &w, params))
                .collect::<Result<_>>()?
        }
        ModelId::M3 => estimate_m3(cases, &compute_pac_mod(cases)?, params, bench)?,
        ModelId::M4 => estimate_m4(cases, params, bench)?,
        ModelId::M5 => estimate_m5(cases, params, &config.coefficients, bench)?,
        ModelId::Hybrid => return Err(Error::HybridPerCase),
    };
    Ok(Estimation {
        model,
        estimates,
        warnings: per_diem_warnings(cases, model),
    })
}
