//! Report emitters. Every CSV has a JSON mirror with the same content.
//! Dollar amounts are written rounded to cents, percentages to two places.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::aggregate::StatsMap;
use crate::domain::{fmt_cents, round_cents, CaseId, ModelId, PerformanceTable};
use crate::error::{Error, Result};
use crate::ingest::create;
use crate::models::CaseEstimate;
use crate::optimize::{GridResult, TracePoint};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    /// `dir/stem.csv` or `dir/stem.json`.
    pub fn path(self, dir: &Path, stem: &str) -> PathBuf {
        dir.join(format!("{stem}.{}", self.extension()))
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

fn pct(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    format!("{:.2}", if r == 0.0 { 0.0 } else { r })
}

fn round_pct(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut dst: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut dst, value)?;
    writeln!(dst).map_err(|e| Error::io("<json>", e))?;
    Ok(())
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv>", e))
}

#[derive(Serialize)]
struct EstimateRow<'a> {
    case_id: &'a str,
    cmg: &'a str,
    model: &'static str,
    cce: f64,
}

pub fn write_estimates<W: Write>(model: ModelId, estimates: &[CaseEstimate], format: Format, dst: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(dst);
            w.write_record(["case_id", "cmg", "model", "cce"])?;
            for e in estimates {
                w.write_record([e.case_id.as_str(), e.cmg.as_str(), model.label(), &fmt_cents(e.cce)])?;
            }
            finish(w)
        }
        Format::Json => {
            let rows: Vec<_> = estimates
                .iter()
                .map(|e| EstimateRow {
                    case_id: e.case_id.as_str(),
                    cmg: e.cmg.as_str(),
                    model: model.label(),
                    cce: round_cents(e.cce),
                })
                .collect();
            write_json(&rows, dst)
        }
    }
}

#[derive(Serialize)]
struct StatsRow<'a> {
    cmg: &'a str,
    model: &'static str,
    case_count: u64,
    total: f64,
    average: f64,
    stdev: f64,
    min: f64,
    max: f64,
}

/// Per-CMG statistics for one or more models, model-major.
pub fn write_cmg_stats<W: Write>(runs: &[(ModelId, &StatsMap)], format: Format, dst: W) -> Result<()> {
    let rows: Vec<StatsRow> = runs
        .iter()
        .flat_map(|(model, stats)| {
            stats.iter().map(move |(cmg, s)| {
                let s = s.rounded();
                StatsRow {
                    cmg: cmg.as_str(),
                    model: model.label(),
                    case_count: s.case_count,
                    total: s.total,
                    average: s.average,
                    stdev: s.stdev,
                    min: s.min,
                    max: s.max,
                }
            })
        })
        .collect();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(dst);
            w.write_record(["cmg", "model", "case_count", "total", "average", "stdev", "min", "max"])?;
            for r in &rows {
                w.write_record([
                    r.cmg.to_string(),
                    r.model.to_string(),
                    r.case_count.to_string(),
                    fmt_cents(r.total),
                    fmt_cents(r.average),
                    fmt_cents(r.stdev),
                    fmt_cents(r.min),
                    fmt_cents(r.max),
                ])?;
            }
            finish(w)
        }
        Format::Json => write_json(&rows, dst),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub measure: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub values: Vec<f64>,
}

/// Side-by-side model comparison: averaged absolute errors, then one row
/// per relative-error bucket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceReport {
    pub columns: Vec<String>,
    pub n_groups: Vec<u64>,
    pub rows: Vec<ReportRow>,
}

pub const ROW_MEAN_ABS_AVG: &str = "mean_abs_e_avg";
pub const ROW_MEAN_ABS_MIN: &str = "mean_abs_e_min";
pub const ROW_MEAN_ABS_MAX: &str = "mean_abs_e_max";
pub const ROW_MEAN_ABS_STDEV: &str = "mean_abs_e_stdev_ext";
pub const ROW_BUCKET: &str = "p_ab";

impl PerformanceReport {
    /// `include_stdev` adds the averaged stdev error as an extra row after
    /// the three standard ones.
    pub fn new(tables: &[PerformanceTable], include_stdev: bool) -> Result<Self> {
        let Some(first) = tables.first() else {
            return Err(Error::Config("no models to report".into()));
        };
        if tables.iter().any(|t| t.buckets != first.buckets) {
            return Err(Error::Config(
                "all models in a report must share one bucket layout".into(),
            ));
        }
        let money = |name: &str, f: fn(&PerformanceTable) -> f64| ReportRow {
            measure: name.into(),
            a: None,
            b: None,
            values: tables.iter().map(|t| round_cents(f(t))).collect(),
        };
        let mut rows = vec![
            money(ROW_MEAN_ABS_AVG, |t| t.mean_abs_e_avg),
            money(ROW_MEAN_ABS_MIN, |t| t.mean_abs_e_min),
            money(ROW_MEAN_ABS_MAX, |t| t.mean_abs_e_max),
        ];
        if include_stdev {
            rows.push(money(ROW_MEAN_ABS_STDEV, |t| t.mean_abs_e_stdev));
        }
        for (i, b) in first.buckets.as_slice().iter().enumerate() {
            rows.push(ReportRow {
                measure: ROW_BUCKET.into(),
                a: Some(b.lower),
                b: b.upper,
                values: tables.iter().map(|t| round_pct(t.p_ab[i])).collect(),
            });
        }
        Ok(PerformanceReport {
            columns: tables.iter().map(|t| t.model.label().to_string()).collect(),
            n_groups: tables.iter().map(|t| t.n_groups).collect(),
            rows,
        })
    }

    pub fn write<W: Write>(&self, format: Format, dst: W) -> Result<()> {
        match format {
            Format::Json => write_json(self, dst),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(dst);
                let mut header = vec!["measure".to_string(), "a".into(), "b".into()];
                header.extend(self.columns.iter().cloned());
                w.write_record(&header)?;
                let bound = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                for r in &self.rows {
                    let mut rec = vec![r.measure.clone(), bound(r.a), bound(r.b)];
                    let is_bucket = r.measure == ROW_BUCKET;
                    rec.extend(r.values.iter().map(|&v| if is_bucket { pct(v) } else { fmt_cents(v) }));
                    w.write_record(&rec)?;
                }
                finish(w)
            }
        }
    }
}

#[derive(Serialize)]
struct TraceRow {
    k1: f64,
    k2: f64,
    k3: f64,
    large: f64,
    very_large: f64,
    small: f64,
}

impl From<&TracePoint> for TraceRow {
    fn from(p: &TracePoint) -> Self {
        TraceRow {
            k1: p.k.k1,
            k2: p.k.k2,
            k3: p.k.k3,
            large: round_pct(p.criterion.large_err_pct),
            very_large: round_pct(p.criterion.very_large_err_pct),
            small: round_pct(p.criterion.small_err_pct),
        }
    }
}

fn write_trace_rows<W: Write>(points: &[TracePoint], format: Format, dst: W) -> Result<()> {
    let rows: Vec<TraceRow> = points.iter().map(TraceRow::from).collect();
    match format {
        Format::Json => write_json(&rows, dst),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(dst);
            w.write_record(["k1", "k2", "k3", "large", "very_large", "small"])?;
            for r in &rows {
                w.write_record([
                    r.k1.to_string(),
                    r.k2.to_string(),
                    r.k3.to_string(),
                    pct(r.large),
                    pct(r.very_large),
                    pct(r.small),
                ])?;
            }
            finish(w)
        }
    }
}

/// Every evaluated grid point with its criteria.
pub fn write_trace<W: Write>(result: &GridResult, format: Format, dst: W) -> Result<()> {
    write_trace_rows(&result.trace, format, dst)
}

/// The winning coefficients and their criteria, one row.
pub fn write_best<W: Write>(result: &GridResult, format: Format, dst: W) -> Result<()> {
    write_trace_rows(
        &[TracePoint {
            k: result.best,
            criterion: result.criterion,
        }],
        format,
        dst,
    )
}

pub fn write_ground_truth<W: Write>(truth: &BTreeMap<CaseId, f64>, format: Format, dst: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(dst);
            w.write_record(["case_id", "cost"])?;
            for (id, cost) in truth {
                w.write_record([id.as_str(), &fmt_cents(*cost)])?;
            }
            finish(w)
        }
        Format::Json => {
            let rounded: BTreeMap<&str, f64> = truth.iter().map(|(k, v)| (k.as_str(), round_cents(*v))).collect();
            write_json(&rounded, dst)
        }
    }
}

/// Creates `dir/stem.<ext>` and hands the file to `f`.
pub fn emit<F>(dir: &Path, stem: &str, format: Format, f: F) -> Result<PathBuf>
where
    F: FnOnce(std::io::BufWriter<std::fs::File>) -> Result<()>,
{
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = format.path(dir, stem);
    f(std::io::BufWriter::new(create(&path)?))?;
    Ok(path)
}
