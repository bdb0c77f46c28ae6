//! Seeded synthetic datasets with known per-case true costs.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, which produces the same stream on every platform.
//! Uniform draws use `rand` 0.9's `random_range`.
//!
//! Generation order, per CMG in code order:
//! 1. case count, base intensity and LOS scale, stay-mix probabilities;
//! 2. per case: total LOS, ALC/acute split, special-care hours (always within
//!    the acute days, so every record is LOS-consistent), latent intensity;
//! 3. true costs from the chosen [`CostProcess`];
//! 4. published weights (rounded to 4 decimals, like real RIW tables),
//!    including the degenerate PAC patterns.
//!
//! The benchmark is the exact aggregation of the true costs.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::{summarize, StatsMap, StdevMode};
use crate::domain::{CaseId, CaseRecord, CmgCode, HospitalCostParams, StayCoefficients};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// How true per-case costs are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostProcess {
    /// `cpwc * pac_riw`; in CMGs with a single shared PAC weight, the CMG's
    /// PAC total is split in proportion to RIW instead.
    ProportionalToRiw,
    /// `cpd_total * los_total`.
    ProportionalToLos,
    /// `cpd_total * stay_units(k)`, the per-diem-by-stay-type form.
    StayType(StayCoefficients),
    /// Half weight-driven, half stay-driven (default coefficients), with
    /// +/-15% multiplicative noise.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_cmgs: usize,
    /// Inclusive range of cases per CMG.
    pub cases_per_cmg: (usize, usize),
    pub cost_process: CostProcess,
    /// Fraction of CMGs whose PAC weights share one value while RIW varies.
    pub degenerate_pac_fraction: f64,
    /// Fraction of CMGs where both PAC and RIW weights are single-valued.
    pub degenerate_both_fraction: f64,
    pub cpwc: f64,
    pub cpd_total: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_cmgs: 163,
            cases_per_cmg: (10, 80),
            cost_process: CostProcess::Mixed,
            degenerate_pac_fraction: 0.025,
            degenerate_both_fraction: 0.045,
            cpwc: 6000.0,
            cpd_total: 1600.0,
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleSpec(m));
        if self.n_cmgs == 0 {
            return bad("n_cmgs must be at least 1".into());
        }
        let (lo, hi) = self.cases_per_cmg;
        if lo == 0 || hi < lo {
            return bad(format!("cases_per_cmg range {lo}..={hi} is empty or includes 0"));
        }
        for (name, f) in [
            ("degenerate_pac_fraction", self.degenerate_pac_fraction),
            ("degenerate_both_fraction", self.degenerate_both_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("{name} must be in [0, 1], got {f}"));
            }
        }
        let (p, b) = self.degenerate_counts();
        if p + b > self.n_cmgs {
            return bad(format!(
                "{p} PAC-degenerate plus {b} fully degenerate CMGs exceed {} CMGs",
                self.n_cmgs
            ));
        }
        if !(self.cpwc > 0.0 && self.cpd_total > 0.0) {
            return bad("cpwc and cpd_total must be positive".into());
        }
        if let CostProcess::StayType(k) = self.cost_process {
            k.validate().map_err(|e| Error::InfeasibleSpec(e.to_string()))?;
        }
        Ok(())
    }

    /// Number of PAC-only and fully degenerate CMGs realized.
    pub fn degenerate_counts(&self) -> (usize, usize) {
        let n = self.n_cmgs as f64;
        (
            (self.degenerate_pac_fraction * n).round() as usize,
            (self.degenerate_both_fraction * n).round() as usize,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPattern {
    Regular,
    /// One PAC value for the whole CMG, varying RIW.
    FlatPac,
    /// One PAC value and one RIW value.
    FlatBoth,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub ground_truth: BTreeMap<CaseId, f64>,
    pub patterns: BTreeMap<CmgCode, WeightPattern>,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

struct Draft {
    id: CaseId,
    los_total: i64,
    los_acute: i64,
    los_alc: i64,
    sc_hours: f64,
    intensity: f64,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let (n_pac, n_both) = spec.degenerate_counts();
    let mut order: Vec<usize> = (0..spec.n_cmgs).collect();
    order.shuffle(&mut rng);
    let mut pattern_of = vec![WeightPattern::Regular; spec.n_cmgs];
    for &g in &order[..n_pac] {
        pattern_of[g] = WeightPattern::FlatPac;
    }
    for &g in &order[n_pac..n_pac + n_both] {
        pattern_of[g] = WeightPattern::FlatBoth;
    }

    let mixed_k = StayCoefficients::default();
    let mut cases = Vec::new();
    let mut truth = BTreeMap::new();
    let mut patterns = BTreeMap::new();
    let mut benchmark = StatsMap::new();
    let mut next_case = 1usize;

    for (g, &pattern) in pattern_of.iter().enumerate() {
        let cmg = CmgCode(format!("{:03}", g + 1));
        let (lo, hi) = spec.cases_per_cmg;
        let mut n = rng.random_range(lo..=hi);
        if pattern == WeightPattern::FlatPac {
            n = n.max(2);
        }
        let base = rng.random_range(0.3..3.0);
        let los_scale: f64 = rng.random_range(2.0..12.0);
        // Stay mix differs strongly between CMGs: some are dominated by ALC
        // days, some by special-care hours, most by plain acute days.
        let profile = rng.random_range(0..4u8);
        let share = |rng: &mut ChaCha8Rng, heavy: bool| {
            if heavy {
                rng.random_range(0.6..0.95)
            } else {
                rng.random_range(0.0..0.15)
            }
        };
        let p_alc: f64 = share(&mut rng, profile == 1);
        let p_sc: f64 = share(&mut rng, profile == 2);
        let riw_scale: f64 = rng.random_range(0.8..1.25);

        let drafts: Vec<Draft> = (0..n)
            .map(|_| {
                let los_total = rng.random_range(1..=(2.0 * los_scale).ceil() as i64);
                let los_alc = if los_total > 1 && rng.random_bool(p_alc) {
                    rng.random_range((los_total + 1) / 2..los_total)
                } else {
                    0
                };
                let los_acute = los_total - los_alc;
                let sc_hours = if rng.random_bool(p_sc) {
                    rng.random_range(1..=24 * los_acute) as f64
                } else {
                    0.0
                };
                let intensity = base * (0.6 + 0.4 * los_total as f64 / los_scale) * rng.random_range(0.85..1.15);
                let id = CaseId(format!("C{next_case:06}"));
                next_case += 1;
                Draft {
                    id,
                    los_total,
                    los_acute,
                    los_alc,
                    sc_hours,
                    intensity,
                }
            })
            .collect();

        let stay = |d: &Draft, k: &StayCoefficients| {
            let sc = d.sc_hours / 24.0;
            ((d.los_acute as f64 - sc).max(0.0) * k.k1 + d.los_alc as f64 * k.k2 + sc * k.k3) * spec.cpd_total
        };

        // Weight-driven processes set costs from the published weights, so
        // weights come first; the others calibrate weights to costs.
        let (pac, riw, costs): (Vec<f64>, Vec<f64>, Vec<f64>) = match spec.cost_process {
            CostProcess::ProportionalToRiw => {
                let latent: Vec<f64> = drafts.iter().map(|d| d.intensity).collect();
                let (pac, riw) = publish_weights(&latent, pattern, riw_scale, &mut rng);
                let costs = riw_costs(&pac, &riw, pattern, spec.cpwc);
                (pac, riw, costs)
            }
            process => {
                let costs: Vec<f64> = drafts
                    .iter()
                    .map(|d| match process {
                        CostProcess::ProportionalToLos => d.los_total as f64 * spec.cpd_total,
                        CostProcess::StayType(k) => stay(d, &k),
                        _ => {
                            let weight_part = spec.cpwc * d.intensity;
                            let stay_part = stay(d, &mixed_k);
                            0.5 * (weight_part + stay_part) * rng.random_range(0.85..1.15)
                        }
                    })
                    .collect();
                let intensity_sum: f64 = drafts.iter().map(|d| d.intensity).sum();
                let calib = costs.iter().sum::<f64>() / (spec.cpwc * intensity_sum);
                let latent: Vec<f64> = drafts.iter().map(|d| d.intensity * calib).collect();
                let (pac, riw) = publish_weights(&latent, pattern, riw_scale, &mut rng);
                (pac, riw, costs)
            }
        };

        let mut group_costs = Vec::with_capacity(n);
        for (i, d) in drafts.into_iter().enumerate() {
            truth.insert(d.id.clone(), costs[i]);
            group_costs.push(costs[i]);
            cases.push(CaseRecord {
                case_id: d.id,
                cmg: cmg.clone(),
                pac_riw: pac[i],
                riw: riw[i],
                los_total: d.los_total,
                los_acute: d.los_acute,
                los_alc: d.los_alc,
                sc_hours: d.sc_hours,
            });
        }
        benchmark.insert(cmg.clone(), summarize(cmg.clone(), &group_costs, StdevMode::Sample));
        patterns.insert(cmg, pattern);
    }

    let total_days: i64 = cases.iter().map(|c| c.los_total).sum();
    let total_cost: f64 = truth.values().sum();
    let direct = (spec.cpd_total * 0.7 * 100.0).round() / 100.0;
    let params = HospitalCostParams {
        cpwc: spec.cpwc,
        cpd_total: spec.cpd_total,
        cpd_direct: Some(direct),
        cpd_overhead: Some(spec.cpd_total - direct),
        acute_expenses: Some(total_cost),
        total_patient_days: Some(total_days as u64),
    };
    let dataset = Dataset::new(cases, params, benchmark)?;
    Ok(SyntheticData {
        dataset,
        ground_truth: truth,
        patterns,
    })
}

/// Rounds latent intensities into published (pac_riw, riw) columns
/// following the CMG's weight pattern. In flat-PAC groups RIW values are
/// made pairwise distinct.
fn publish_weights(
    latent: &[f64],
    pattern: WeightPattern,
    riw_scale: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>) {
    let floor = |x: f64| round4(x).max(1e-4);
    let mean = latent.iter().sum::<f64>() / latent.len() as f64;
    match pattern {
        WeightPattern::Regular => {
            let pac: Vec<f64> = latent.iter().map(|&w| floor(w)).collect();
            let riw = latent
                .iter()
                .map(|&w| floor(w * riw_scale * rng.random_range(0.9..1.1)))
                .collect();
            (pac, riw)
        }
        WeightPattern::FlatPac => {
            let pac = vec![floor(mean); latent.len()];
            let mut seen = HashSet::new();
            let riw = latent
                .iter()
                .map(|&w| {
                    let mut r = floor(w * riw_scale);
                    while !seen.insert(r.to_bits()) {
                        r = round4(r + 1e-4);
                    }
                    r
                })
                .collect();
            (pac, riw)
        }
        WeightPattern::FlatBoth => (
            vec![floor(mean); latent.len()],
            vec![floor(mean * riw_scale); latent.len()],
        ),
    }
}

/// True costs for the weight-driven process. In a flat-PAC CMG the group's
/// PAC budget is spread by RIW.
fn riw_costs(pac: &[f64], riw: &[f64], pattern: WeightPattern, cpwc: f64) -> Vec<f64> {
    match pattern {
        WeightPattern::FlatPac => {
            let budget = cpwc * pac.iter().sum::<f64>();
            let riw_sum: f64 = riw.iter().sum();
            riw.iter().map(|r| budget * r / riw_sum).collect()
        }
        _ => pac.iter().map(|p| cpwc * p).collect(),
    }
}
