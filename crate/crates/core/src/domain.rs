//! Domain value types shared by every stage of the pipeline.
//!
//! Everything here is an immutable value once constructed. Monetary amounts
//! are `f64` dollars; rounding to cents only happens when values are written
//! out (see [`round_cents`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Case mix group code. Kept as an opaque string so that leading zeros and
/// alphanumeric schemes survive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CmgCode(pub String);

impl CmgCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CmgCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl From<&str> for CmgCode {
    fn from(s: &str) -> Self {
        CmgCode(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseId(pub String);

impl CaseId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl From<&str> for CaseId {
    fn from(s: &str) -> Self {
        CaseId(s.to_owned())
    }
}

/// Rounds a dollar amount to cents, ties to even.
pub fn round_cents(x: f64) -> f64 {
    (x * 100.0).round_ties_even() / 100.0
}

/// Cent-rounded decimal text, never `-0.00`.
pub fn fmt_cents(x: f64) -> String {
    let r = round_cents(x);
    format!("{:.2}", if r == 0.0 { 0.0 } else { r })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// A data-quality finding. Warnings never stop the pipeline; errors do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

impl Violation {
    pub fn warning(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            severity: Severity::Warning,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn error(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            severity: Severity::Error,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}: {}", self.subject, self.message)
    }
}

/// One patient-level discharge record, reduced to the fields the cost
/// models consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: CaseId,
    pub cmg: CmgCode,
    /// Weight stored in the PAC_RIW_WT field.
    pub pac_riw: f64,
    /// CIHI resource intensity weight (RIW_val).
    pub riw: f64,
    /// Total length of stay in days (TotalL).
    pub los_total: i64,
    /// Acute days (AcuteL).
    pub los_acute: i64,
    /// Alternate-level-of-care days (ALClen).
    pub los_alc: i64,
    /// Hours spent in a special care unit (TotHRS).
    pub sc_hours: f64,
}

impl CaseRecord {
    pub fn los_consistent(&self) -> bool {
        self.los_acute + self.los_alc == self.los_total
    }

    /// Special-care time expressed in days.
    pub fn sc_days(&self) -> f64 {
        self.sc_hours / 24.0
    }
}

/// Checks a case against the record invariants. Negative or non-finite
/// values are errors; a length-of-stay split that does not add up, or
/// special-care time exceeding acute days, are warnings.
pub fn validate_case(record: &CaseRecord) -> Vec<Violation> {
    let subject = format!("case {}", record.case_id);
    let mut out = Vec::new();

    for (name, v) in [
        ("pac_riw", record.pac_riw),
        ("riw", record.riw),
        ("sc_hours", record.sc_hours),
    ] {
        if !v.is_finite() {
            out.push(Violation::error(&subject, format!("{name} is not a finite number")));
        } else if v < 0.0 {
            out.push(Violation::error(&subject, format!("negative {name} ({v})")));
        }
    }
    for (name, v) in [
        ("los_total", record.los_total),
        ("los_acute", record.los_acute),
        ("los_alc", record.los_alc),
    ] {
        if v < 0 {
            out.push(Violation::error(&subject, format!("negative {name} ({v})")));
        }
    }
    if record.case_id.0.is_empty() {
        out.push(Violation::error(&subject, "empty case id"));
    }
    if record.cmg.0.is_empty() {
        out.push(Violation::error(&subject, "empty CMG code"));
    }
    if out.iter().any(Violation::is_error) {
        return out;
    }

    if !record.los_consistent() {
        out.push(Violation::warning(
            &subject,
            format!(
                "LOS sum mismatch: acute {} + alc {} != total {}",
                record.los_acute, record.los_alc, record.los_total
            ),
        ));
    }
    if record.sc_days() > record.los_acute as f64 {
        out.push(Violation::warning(
            &subject,
            format!(
                "special-care time {:.2} days exceeds {} acute days; acute term clamps to 0",
                record.sc_days(),
                record.los_acute
            ),
        ));
    }
    out
}

/// Annual hospital-level cost parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HospitalCostParams {
    /// Cost per weighted case.
    pub cpwc: f64,
    /// Acute total cost per diem.
    pub cpd_total: f64,
    pub cpd_direct: Option<f64>,
    pub cpd_overhead: Option<f64>,
    pub acute_expenses: Option<f64>,
    pub total_patient_days: Option<u64>,
}

impl HospitalCostParams {
    /// Parameters with only the two required rates set.
    pub fn new(cpwc: f64, cpd_total: f64) -> Result<Self> {
        let p = HospitalCostParams {
            cpwc,
            cpd_total,
            cpd_direct: None,
            cpd_overhead: None,
            acute_expenses: None,
            total_patient_days: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.cpwc) {
            out.push(Violation::error(
                "params",
                format!("cpwc must be positive, got {}", self.cpwc),
            ));
        }
        if !positive(self.cpd_total) {
            out.push(Violation::error(
                "params",
                format!("cpd_total must be positive, got {}", self.cpd_total),
            ));
        }
        for (name, v) in [
            ("cpd_direct", self.cpd_direct),
            ("cpd_overhead", self.cpd_overhead),
            ("acute_expenses", self.acute_expenses),
        ] {
            if let Some(v) = v {
                if !positive(v) {
                    out.push(Violation::error("params", format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.total_patient_days == Some(0) {
            out.push(Violation::error("params", "total_patient_days must be positive"));
        }
        if let (Some(d), Some(o)) = (self.cpd_direct, self.cpd_overhead) {
            if (d + o - self.cpd_total).abs() > 0.01 + 1e-9 {
                out.push(Violation::error(
                    "params",
                    format!("cpd_direct {d} + cpd_overhead {o} != cpd_total {}", self.cpd_total),
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid {
                context: "hospital cost parameters".into(),
                violations: v,
            })
        }
    }
}

/// Half a cent: the slack allowed when checking statistics that may have
/// been rounded to cents independently.
const STATS_SLACK: f64 = 0.005;

/// Per-CMG summary statistics. Used both for the benchmark (actual costs)
/// and for aggregated estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmgStats {
    pub cmg: CmgCode,
    pub case_count: u64,
    pub total: f64,
    pub average: f64,
    pub stdev: f64,
    pub min: f64,
    pub max: f64,
}

impl CmgStats {
    pub fn violations(&self) -> Vec<Violation> {
        let subject = format!("CMG {}", self.cmg);
        let mut out = Vec::new();
        let fields = [self.total, self.average, self.stdev, self.min, self.max];
        if fields.iter().any(|v| !v.is_finite()) {
            out.push(Violation::error(&subject, "non-finite statistic"));
            return out;
        }
        if self.case_count == 0 {
            out.push(Violation::error(&subject, "case_count must be positive"));
            return out;
        }
        if self.stdev < 0.0 {
            out.push(Violation::error(&subject, format!("negative stdev {}", self.stdev)));
        }
        if self.min > self.average + STATS_SLACK || self.average > self.max + STATS_SLACK {
            out.push(Violation::error(
                &subject,
                format!(
                    "expected min <= average <= max, got {} / {} / {}",
                    self.min, self.average, self.max
                ),
            ));
        }
        let n = self.case_count as f64;
        if (self.total - self.average * n).abs() > 0.01 * n + 1e-9 * self.total.abs() {
            out.push(Violation::error(
                &subject,
                format!(
                    "total {} inconsistent with average {} x {} cases",
                    self.total, self.average, self.case_count
                ),
            ));
        }
        if self.case_count == 1
            && (self.stdev > STATS_SLACK
                || (self.min - self.average).abs() > STATS_SLACK
                || (self.max - self.average).abs() > STATS_SLACK)
        {
            out.push(Violation::error(
                &subject,
                "single-case group must have stdev 0 and min = max = average",
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid {
                context: format!("statistics for CMG {}", self.cmg),
                violations: v,
            })
        }
    }

    /// Copy with every monetary field rounded to cents.
    pub fn rounded(&self) -> CmgStats {
        CmgStats {
            cmg: self.cmg.clone(),
            case_count: self.case_count,
            total: round_cents(self.total),
            average: round_cents(self.average),
            stdev: round_cents(self.stdev),
            min: round_cents(self.min),
            max: round_cents(self.max),
        }
    }
}

/// Signed estimation errors (estimate minus actual) for one CMG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub cmg: CmgCode,
    pub e_total: f64,
    pub e_avg: f64,
    pub e_stdev: f64,
    pub e_min: f64,
    pub e_max: f64,
    /// `e_total` divided by the actual total.
    pub rel_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelId {
    M1,
    M2,
    M3,
    M4,
    M5,
    #[serde(rename = "HYBRID")]
    Hybrid,
}

impl ModelId {
    pub const PER_CASE: [ModelId; 5] = [ModelId::M1, ModelId::M2, ModelId::M3, ModelId::M4, ModelId::M5];

    pub fn label(self) -> &'static str {
        match self {
            ModelId::M1 => "M1",
            ModelId::M2 => "M2",
            ModelId::M3 => "M3",
            ModelId::M4 => "M4",
            ModelId::M5 => "M5",
            ModelId::Hybrid => "HYBRID",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.label())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m1" | "1" => Ok(ModelId::M1),
            "m2" | "2" => Ok(ModelId::M2),
            "m3" | "3" => Ok(ModelId::M3),
            "m4" | "4" => Ok(ModelId::M4),
            "m5" | "5" => Ok(ModelId::M5),
            "hybrid" => Ok(ModelId::Hybrid),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Per-diem multipliers for acute, alternate-level and special-care days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StayCoefficients {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl StayCoefficients {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        let k = StayCoefficients { k1, k2, k3 };
        k.validate()?;
        Ok(k)
    }

    pub fn uniform(k: f64) -> Self {
        StayCoefficients { k1: k, k2: k, k3: k }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn as_tuple(&self) -> (f64, f64, f64) {
        (self.k1, self.k2, self.k3)
    }
}

impl Default for StayCoefficients {
    fn default() -> Self {
        StayCoefficients {
            k1: 1.3,
            k2: 0.5,
            k3: 2.85,
        }
    }
}

/// Percent interval `(lower, upper]`; `upper == None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl Bucket {
    pub const fn new(lower: f64, upper: Option<f64>) -> Self {
        Bucket { lower, upper }
    }
}

/// Ordered, contiguous relative-error buckets starting at 0 and ending
/// unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Buckets(Vec<Bucket>);

impl Buckets {
    pub fn new(buckets: Vec<Bucket>) -> Result<Self> {
        let Some(first) = buckets.first() else {
            return Err(Error::Config("at least one bucket is required".into()));
        };
        if first.lower != 0.0 {
            return Err(Error::Config(format!(
                "first bucket must start at 0, starts at {}",
                first.lower
            )));
        }
        for (i, b) in buckets.iter().enumerate() {
            let last = i + 1 == buckets.len();
            match b.upper {
                None if !last => return Err(Error::Config("only the last bucket may be unbounded".into())),
                Some(_) if last => return Err(Error::Config("the last bucket must be unbounded".into())),
                Some(u) if u.is_nan() || u <= b.lower => {
                    return Err(Error::Config(format!("bucket ({}, {u}] is empty", b.lower)))
                }
                _ => {}
            }
            if let Some(next) = buckets.get(i + 1) {
                if b.upper != Some(next.lower) {
                    return Err(Error::Config(format!(
                        "buckets are not contiguous at {:?} -> {}",
                        b.upper, next.lower
                    )));
                }
            }
        }
        Ok(Buckets(buckets))
    }

    pub fn as_slice(&self) -> &[Bucket] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the bucket holding an absolute relative error given in
    /// percent. The first bucket is closed at 0.
    pub fn index_of(&self, pct: f64) -> usize {
        let pct = pct.abs();
        self.0
            .iter()
            .position(|b| b.upper.is_none_or(|u| pct <= u))
            .unwrap_or(self.0.len() - 1)
    }
}

impl Default for Buckets {
    fn default() -> Self {
        let edges = [0.0, 5.0, 10.0, 15.0, 20.0, 30.0, 50.0];
        let mut v: Vec<Bucket> = edges.windows(2).map(|w| Bucket::new(w[0], Some(w[1]))).collect();
        v.push(Bucket::new(50.0, None));
        Buckets(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: ModelId,
    pub coefficients: StayCoefficients,
    pub buckets: Buckets,
}

impl ModelConfig {
    pub fn new(model: ModelId) -> Self {
        ModelConfig {
            model,
            coefficients: StayCoefficients::default(),
            buckets: Buckets::default(),
        }
    }

    pub fn with_coefficients(mut self, k: StayCoefficients) -> Self {
        self.coefficients = k;
        self
    }
}

/// Bucketed relative-total-error distribution and averaged absolute errors
/// for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceTable {
    pub model: ModelId,
    pub buckets: Buckets,
    /// Percentage of CMGs per bucket.
    pub p_ab: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean_abs_e_avg: f64,
    pub mean_abs_e_min: f64,
    pub mean_abs_e_max: f64,
    /// Not part of the standard table; reported only on request.
    pub mean_abs_e_stdev: f64,
    pub n_groups: u64,
}
