#![allow(dead_code)]

use std::collections::BTreeMap;

use casecost::{generate_synthetic, CaseEstimate, CmgCode, CostProcess, Dataset, SyntheticData, SyntheticSpec};

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn small_spec(seed: u64, process: CostProcess) -> SyntheticSpec {
    SyntheticSpec {
        n_cmgs: 12,
        cases_per_cmg: (1, 15),
        cost_process: process,
        degenerate_pac_fraction: 0.25,
        degenerate_both_fraction: 0.25,
        seed,
        ..SyntheticSpec::default()
    }
}

pub fn small(seed: u64, process: CostProcess) -> SyntheticData {
    generate_synthetic(&small_spec(seed, process)).expect("generate")
}

/// At least 10,000 cases over 163 CMGs.
pub fn large(seed: u64, process: CostProcess) -> SyntheticData {
    let data = generate_synthetic(&SyntheticSpec {
        cases_per_cmg: (40, 100),
        cost_process: process,
        seed,
        ..SyntheticSpec::default()
    })
    .expect("generate");
    assert!(data.dataset.cases().len() >= 10_000, "{}", data.dataset.cases().len());
    data
}

/// Per-CMG totals, summed in case order.
pub fn group_totals(estimates: &[CaseEstimate]) -> BTreeMap<CmgCode, f64> {
    let mut out = BTreeMap::new();
    for e in estimates {
        *out.entry(e.cmg.clone()).or_insert(0.0) += e.cce;
    }
    out
}

pub fn total(estimates: &[CaseEstimate]) -> f64 {
    estimates.iter().map(|e| e.cce).sum()
}

pub fn benchmark_sum(ds: &Dataset) -> f64 {
    ds.benchmark().values().map(|s| s.total).sum()
}

/// Mean and sample standard deviation by the two-pass formula.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
