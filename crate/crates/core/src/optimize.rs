//! Exhaustive grid search over the stay-type coefficients.
//!
//! Each grid point is scored by a [`CriterionVector`] built from the
//! relative-total-error buckets, and points are ranked lexicographically:
//! fewer large errors (over 30%), then fewer very large errors (over 50%),
//! then more small errors (10% or less). Remaining ties go to the smallest
//! `(k1, k2, k3)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Buckets, ModelConfig, ModelId, PerformanceTable, StayCoefficients};
use crate::error::{Error, Result};
use crate::evaluate::to_percent;
use crate::ingest::Dataset;
use crate::models::{benchmark_target, normalization_ratio};
use crate::pipeline::run_model;

pub const DEFAULT_GRID_CAP: u64 = 1_000_000;

/// Inclusive arithmetic range `lo:hi:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let r = Range { lo, hi, step };
        r.validate()?;
        Ok(r)
    }

    pub fn single(v: f64) -> Self {
        Range {
            lo: v,
            hi: v,
            step: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let Range { lo, hi, step } = *self;
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::Config(format!("non-finite range {self}")));
        }
        if lo <= 0.0 {
            return Err(Error::Config(format!("range {self}: lower bound must be positive")));
        }
        if hi < lo {
            return Err(Error::Config(format!("range {self}: upper bound below lower bound")));
        }
        if step <= 0.0 {
            return Err(Error::Config(format!("range {self}: step must be positive")));
        }
        Ok(())
    }

    pub fn len(&self) -> u64 {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as u64 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid values. Each is snapped to 10 decimal places so that e.g.
    /// `1.0 + 3 * 0.1` comes out as exactly `1.3`.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                if i == 0 {
                    self.lo
                } else {
                    ((self.lo + i as f64 * self.step) * 1e10).round() / 1e10
                }
            })
            .collect()
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

impl FromStr for Range {
    type Err = Error;

    /// `lo:hi:step`, or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{p}` in range `{s}`")))
        };
        let r = match parts.as_slice() {
            [v] => Range::single(num(v)?),
            [lo, hi, step] => Range {
                lo: num(lo)?,
                hi: num(hi)?,
                step: num(step)?,
            },
            _ => {
                return Err(Error::Config(format!(
                    "range `{s}` must be lo:hi:step or a single value"
                )))
            }
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub k1: Range,
    pub k2: Range,
    pub k3: Range,
    pub cap: u64,
}

impl GridSpec {
    pub fn new(k1: Range, k2: Range, k3: Range) -> Self {
        GridSpec {
            k1,
            k2,
            k3,
            cap: DEFAULT_GRID_CAP,
        }
    }

    pub fn singleton(k: StayCoefficients) -> Self {
        GridSpec::new(Range::single(k.k1), Range::single(k.k2), Range::single(k.k3))
    }

    pub fn size(&self) -> u64 {
        self.k1
            .len()
            .saturating_mul(self.k2.len())
            .saturating_mul(self.k3.len())
    }

    pub fn validate(&self) -> Result<()> {
        for r in [&self.k1, &self.k2, &self.k3] {
            r.validate()?;
        }
        let points = self.size();
        if points == 0 {
            return Err(Error::EmptyGrid);
        }
        if points > self.cap {
            return Err(Error::GridTooLarge { points, cap: self.cap });
        }
        Ok(())
    }

    /// All points, `k1` outermost and `k3` innermost.
    pub fn points(&self) -> Result<Vec<StayCoefficients>> {
        self.validate()?;
        let (a, b, c) = (self.k1.values(), self.k2.values(), self.k3.values());
        let mut out = Vec::with_capacity(self.size() as usize);
        for &k1 in &a {
            for &k2 in &b {
                for &k3 in &c {
                    out.push(StayCoefficients { k1, k2, k3 });
                }
            }
        }
        Ok(out)
    }
}

/// Bucket percentages folded into the three ranking criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionVector {
    /// Share of CMGs with error above 30% (minimize).
    pub large_err_pct: f64,
    /// Share above 50% (minimize).
    pub very_large_err_pct: f64,
    /// Share at or below 10% (maximize).
    pub small_err_pct: f64,
}

impl CriterionVector {
    /// From percentages over the default seven buckets.
    fn from_default_buckets(p: &[f64]) -> Self {
        CriterionVector {
            large_err_pct: p[5] + p[6],
            very_large_err_pct: p[6],
            small_err_pct: p[0] + p[1],
        }
    }
}

/// Criteria are tied to the default bucket edges; other layouts are
/// rejected.
pub fn criterion_vector(table: &PerformanceTable) -> Result<CriterionVector> {
    if table.buckets != Buckets::default() || table.p_ab.len() != table.buckets.len() {
        return Err(Error::Config(
            "optimization criteria require the default buckets 0/5/10/15/20/30/50".into(),
        ));
    }
    Ok(CriterionVector::from_default_buckets(&table.p_ab))
}

fn cmp_within(a: f64, b: f64, tolerance: f64) -> Ordering {
    if (a - b).abs() <= tolerance {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// `Less` when `a` ranks ahead of `b`.
pub fn lex_better(a: &CriterionVector, b: &CriterionVector, tolerance: f64) -> Ordering {
    cmp_within(a.large_err_pct, b.large_err_pct, tolerance)
        .then_with(|| cmp_within(a.very_large_err_pct, b.very_large_err_pct, tolerance))
        .then_with(|| cmp_within(b.small_err_pct, a.small_err_pct, tolerance))
}

fn cmp_coefficients(a: &StayCoefficients, b: &StayCoefficients) -> Ordering {
    a.k1.total_cmp(&b.k1)
        .then_with(|| a.k2.total_cmp(&b.k2))
        .then_with(|| a.k3.total_cmp(&b.k3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub k: StayCoefficients,
    pub criterion: CriterionVector,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub model: ModelId,
    /// Criterion differences up to this much count as ties.
    pub tolerance: f64,
    /// Worker threads; `None` uses all available.
    pub threads: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            model: ModelId::M5,
            tolerance: 0.0,
            threads: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub model: ModelId,
    pub best: StayCoefficients,
    pub criterion: CriterionVector,
    pub table: PerformanceTable,
    /// One entry per grid point, in grid order.
    pub trace: Vec<TracePoint>,
}

/// Per-dataset data reused at every grid point. Produces the same numbers
/// as the full estimate/aggregate/compare chain, summed in the same order,
/// without allocating per-case estimates.
struct Evaluator<'a> {
    acute_net: Vec<f64>,
    alc: Vec<f64>,
    sc: Vec<f64>,
    cpd: f64,
    target: f64,
    groups: Vec<&'a [usize]>,
    actual_totals: Vec<f64>,
    buckets: Buckets,
    /// For the hybrid, totals come from M3 and do not depend on `k`.
    fixed: Option<CriterionVector>,
}

impl<'a> Evaluator<'a> {
    fn new(ds: &'a Dataset, model: ModelId) -> Result<Self> {
        let cases = ds.cases();
        let buckets = Buckets::default();
        let fixed = match model {
            ModelId::M5 => None,
            ModelId::Hybrid => {
                let run = run_model(ds, &ModelConfig::new(ModelId::M3))?;
                Some(criterion_vector(&run.table)?)
            }
            other => {
                return Err(Error::Config(format!(
                    "grid search applies to M5 or HYBRID, not {other}"
                )))
            }
        };
        Ok(Evaluator {
            acute_net: cases
                .iter()
                .map(|c| (c.los_acute as f64 - c.sc_days()).max(0.0))
                .collect(),
            alc: cases.iter().map(|c| c.los_alc.max(0) as f64).collect(),
            sc: cases.iter().map(|c| c.sc_days()).collect(),
            cpd: ds.params().cpd_total,
            target: benchmark_target(ds.benchmark()),
            groups: ds.groups().values().map(Vec::as_slice).collect(),
            actual_totals: ds.benchmark().values().map(|s| s.total).collect(),
            buckets,
            fixed,
        })
    }

    fn criterion(&self, k: &StayCoefficients) -> Result<CriterionVector> {
        if let Some(c) = self.fixed {
            return Ok(c);
        }
        let raw: Vec<f64> = (0..self.acute_net.len())
            .map(|i| (self.acute_net[i] * k.k1 + self.alc[i] * k.k2 + self.sc[i] * k.k3) * self.cpd)
            .collect();
        let factor = normalization_ratio(self.target, raw.iter().sum())?;
        let mut counts = vec![0u64; self.buckets.len()];
        for (members, &actual) in self.groups.iter().zip(&self.actual_totals) {
            let total: f64 = members.iter().map(|&i| raw[i] * factor).sum();
            let rel = (total - actual) / actual;
            counts[self.buckets.index_of(rel * 100.0)] += 1;
        }
        Ok(CriterionVector::from_default_buckets(&to_percent(
            &counts,
            self.groups.len(),
        )))
    }
}

/// Scores every grid point and returns the lexicographic optimum.
pub fn grid_search(dataset: &Dataset, grid: &GridSpec, opts: &SearchOptions) -> Result<GridResult> {
    let points = grid.points()?;
    if let Some(a) = dataset.benchmark().values().find(|s| s.total == 0.0) {
        return Err(Error::ZeroActualTotal(a.cmg.clone()));
    }
    let eval = Evaluator::new(dataset, opts.model)?;

    let score = |k: &StayCoefficients| eval.criterion(k).map(|criterion| TracePoint { k: *k, criterion });
    let trace: Vec<TracePoint> = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| points.par_iter().map(score).collect::<Result<_>>())?,
        None => points.par_iter().map(score).collect::<Result<_>>()?,
    };

    let best = trace
        .iter()
        .copied()
        .reduce(|best, p| {
            let ord =
                lex_better(&p.criterion, &best.criterion, opts.tolerance).then_with(|| cmp_coefficients(&p.k, &best.k));
            if ord == Ordering::Less {
                p
            } else {
                best
            }
        })
        .ok_or(Error::EmptyGrid)?;

    let config = ModelConfig::new(opts.model).with_coefficients(best.k);
    let table = run_model(dataset, &config)?.table;
    Ok(GridResult {
        model: opts.model,
        best: best.k,
        criterion: best.criterion,
        table,
        trace,
    })
}

/// Criterion for one coefficient triple through the full pipeline.
pub fn evaluate_point(dataset: &Dataset, model: ModelId, k: StayCoefficients) -> Result<CriterionVector> {
    let run = run_model(dataset, &ModelConfig::new(model).with_coefficients(k))?;
    criterion_vector(&run.table)
}
