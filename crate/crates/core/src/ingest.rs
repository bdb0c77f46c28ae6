//! Loading, validating and writing the three input tables.
//!
//! ```text
//! cases.csv      case_id,cmg,pac_riw,riw,los_total,los_acute,los_alc,sc_hours
//! params.csv     cpwc,cpd_total,cpd_direct,cpd_overhead,acute_expenses,total_patient_days
//! benchmark.csv  cmg,case_count,total,average,stdev,min,max
//! ```
//!
//! Headers are mandatory. Unknown extra columns are ignored with a warning.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::aggregate::StatsMap;
use crate::domain::{fmt_cents, validate_case, CaseRecord, CmgCode, CmgStats, HospitalCostParams, Violation};
use crate::error::{Error, Result};

pub const CASES_FILE: &str = "cases.csv";
pub const PARAMS_FILE: &str = "params.csv";
pub const BENCHMARK_FILE: &str = "benchmark.csv";

const CASE_COLUMNS: [&str; 8] = [
    "case_id",
    "cmg",
    "pac_riw",
    "riw",
    "los_total",
    "los_acute",
    "los_alc",
    "sc_hours",
];
const PARAM_COLUMNS: [&str; 6] = [
    "cpwc",
    "cpd_total",
    "cpd_direct",
    "cpd_overhead",
    "acute_expenses",
    "total_patient_days",
];
const BENCHMARK_COLUMNS: [&str; 7] = ["cmg", "case_count", "total", "average", "stdev", "min", "max"];

/// Cases, hospital parameters and the per-CMG actual-cost benchmark, checked
/// for consistency with each other.
#[derive(Debug, Clone)]
pub struct Dataset {
    cases: Vec<CaseRecord>,
    params: HospitalCostParams,
    benchmark: StatsMap,
    groups: BTreeMap<CmgCode, Vec<usize>>,
    warnings: Vec<Violation>,
}

impl Dataset {
    pub fn new(cases: Vec<CaseRecord>, params: HospitalCostParams, benchmark: StatsMap) -> Result<Self> {
        params.validate()?;

        let mut warnings = Vec::new();
        let mut errors = Vec::new();
        let mut seen = HashSet::with_capacity(cases.len());
        let mut groups: BTreeMap<CmgCode, Vec<usize>> = BTreeMap::new();
        for (i, c) in cases.iter().enumerate() {
            for v in validate_case(c) {
                if v.is_error() {
                    errors.push(v);
                } else {
                    warnings.push(v);
                }
            }
            if !seen.insert(&c.case_id) {
                return Err(Error::DuplicateCase(c.case_id.clone()));
            }
            groups.entry(c.cmg.clone()).or_default().push(i);
        }
        if !errors.is_empty() {
            return Err(Error::Invalid {
                context: "case records".into(),
                violations: errors,
            });
        }

        for (cmg, stats) in &benchmark {
            if &stats.cmg != cmg {
                return Err(Error::CrossTable {
                    cmg: cmg.clone(),
                    detail: format!("benchmark entry is keyed under a different code ({})", stats.cmg),
                });
            }
            stats.validate()?;
            let Some(members) = groups.get(cmg) else {
                return Err(Error::CrossTable {
                    cmg: cmg.clone(),
                    detail: "listed in the benchmark but has no cases".into(),
                });
            };
            if members.len() as u64 != stats.case_count {
                return Err(Error::CrossTable {
                    cmg: cmg.clone(),
                    detail: format!(
                        "benchmark case_count {} but {} case records",
                        stats.case_count,
                        members.len()
                    ),
                });
            }
        }
        if let Some(cmg) = groups.keys().find(|k| !benchmark.contains_key(*k)) {
            return Err(Error::CrossTable {
                cmg: cmg.clone(),
                detail: "has cases but no benchmark entry".into(),
            });
        }

        Ok(Dataset {
            cases,
            params,
            benchmark,
            groups,
            warnings,
        })
    }

    pub fn cases(&self) -> &[CaseRecord] {
        &self.cases
    }

    pub fn params(&self) -> &HospitalCostParams {
        &self.params
    }

    pub fn benchmark(&self) -> &StatsMap {
        &self.benchmark
    }

    /// Case indices per CMG, in input order.
    pub fn groups(&self) -> &BTreeMap<CmgCode, Vec<usize>> {
        &self.groups
    }

    pub fn warnings(&self) -> &[Violation] {
        &self.warnings
    }

    /// Same dataset with different hospital parameters.
    pub fn with_params(&self, params: HospitalCostParams) -> Result<Dataset> {
        params.validate()?;
        Ok(Dataset { params, ..self.clone() })
    }

    /// Same dataset with a different benchmark (re-validated).
    pub fn with_benchmark(&self, benchmark: StatsMap) -> Result<Dataset> {
        Dataset::new(self.cases.clone(), self.params.clone(), benchmark)
    }

    /// Sum over CMGs of benchmark average times case count.
    pub fn benchmark_total(&self) -> f64 {
        self.benchmark.values().map(|s| s.average * s.case_count as f64).sum()
    }

    fn push_warnings(&mut self, w: Vec<Violation>) {
        self.warnings.extend(w);
    }
}

/// Column lookup for one CSV file.
struct Columns<'a> {
    file: &'a str,
    index: HashMap<&'static str, usize>,
}

impl<'a> Columns<'a> {
    fn new(
        file: &'a str,
        headers: &csv::StringRecord,
        required: &[&'static str],
        warnings: &mut Vec<Violation>,
    ) -> Result<Self> {
        let mut index = HashMap::new();
        for &name in required {
            match headers.iter().position(|h| h.trim() == name) {
                Some(i) => {
                    index.insert(name, i);
                }
                None => {
                    return Err(Error::MissingColumn {
                        file: file.into(),
                        column: name.into(),
                    })
                }
            }
        }
        for h in headers.iter() {
            if !required.contains(&h.trim()) {
                warnings.push(Violation::warning(file, format!("ignoring unknown column `{h}`")));
            }
        }
        Ok(Columns { file, index })
    }

    fn raw<'r>(&self, rec: &'r csv::StringRecord, name: &'static str) -> Result<&'r str> {
        let i = self.index[name];
        rec.get(i)
            .map(str::trim)
            .ok_or_else(|| self.err(rec, name, "missing field"))
    }

    fn parse<T: std::str::FromStr>(&self, rec: &csv::StringRecord, name: &'static str) -> Result<T> {
        let s = self.raw(rec, name)?;
        s.parse()
            .map_err(|_| self.err(rec, name, &format!("cannot parse `{s}`")))
    }

    fn parse_opt<T: std::str::FromStr>(&self, rec: &csv::StringRecord, name: &'static str) -> Result<Option<T>> {
        if self.raw(rec, name)?.is_empty() {
            Ok(None)
        } else {
            self.parse(rec, name).map(Some)
        }
    }

    fn err(&self, rec: &csv::StringRecord, column: &str, message: &str) -> Error {
        Error::Parse {
            file: self.file.into(),
            line: rec.position().map_or(0, |p| p.line()),
            column: column.into(),
            message: message.into(),
        }
    }
}

fn reader<R: Read>(src: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(src)
}

fn wrap_csv(file: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        file: file.into(),
        line,
        column: String::new(),
        message: e.to_string(),
    }
}

pub fn read_cases<R: Read>(src: R, warnings: &mut Vec<Violation>) -> Result<Vec<CaseRecord>> {
    let mut rdr = reader(src);
    let headers = rdr.headers().map_err(|e| wrap_csv(CASES_FILE, e))?.clone();
    let cols = Columns::new(CASES_FILE, &headers, &CASE_COLUMNS, warnings)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| wrap_csv(CASES_FILE, e))?;
        out.push(CaseRecord {
            case_id: cols.raw(&rec, "case_id")?.into(),
            cmg: cols.raw(&rec, "cmg")?.into(),
            pac_riw: cols.parse(&rec, "pac_riw")?,
            riw: cols.parse(&rec, "riw")?,
            los_total: cols.parse(&rec, "los_total")?,
            los_acute: cols.parse(&rec, "los_acute")?,
            los_alc: cols.parse(&rec, "los_alc")?,
            sc_hours: cols.parse(&rec, "sc_hours")?,
        });
    }
    Ok(out)
}

pub fn read_params<R: Read>(src: R, warnings: &mut Vec<Violation>) -> Result<HospitalCostParams> {
    let mut rdr = reader(src);
    let headers = rdr.headers().map_err(|e| wrap_csv(PARAMS_FILE, e))?.clone();
    let cols = Columns::new(PARAMS_FILE, &headers, &PARAM_COLUMNS, warnings)?;
    let rows: Vec<csv::StringRecord> = rdr
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| wrap_csv(PARAMS_FILE, e))?;
    if rows.len() != 1 {
        return Err(Error::RowCount {
            file: PARAMS_FILE.into(),
            found: rows.len(),
        });
    }
    let rec = &rows[0];
    Ok(HospitalCostParams {
        cpwc: cols.parse(rec, "cpwc")?,
        cpd_total: cols.parse(rec, "cpd_total")?,
        cpd_direct: cols.parse_opt(rec, "cpd_direct")?,
        cpd_overhead: cols.parse_opt(rec, "cpd_overhead")?,
        acute_expenses: cols.parse_opt(rec, "acute_expenses")?,
        total_patient_days: cols.parse_opt(rec, "total_patient_days")?,
    })
}

pub fn read_benchmark<R: Read>(src: R, warnings: &mut Vec<Violation>) -> Result<StatsMap> {
    let mut rdr = reader(src);
    let headers = rdr.headers().map_err(|e| wrap_csv(BENCHMARK_FILE, e))?.clone();
    let cols = Columns::new(BENCHMARK_FILE, &headers, &BENCHMARK_COLUMNS, warnings)?;
    let mut out = StatsMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| wrap_csv(BENCHMARK_FILE, e))?;
        let cmg: CmgCode = cols.raw(&rec, "cmg")?.into();
        let stats = CmgStats {
            cmg: cmg.clone(),
            case_count: cols.parse(&rec, "case_count")?,
            total: cols.parse(&rec, "total")?,
            average: cols.parse(&rec, "average")?,
            stdev: cols.parse(&rec, "stdev")?,
            min: cols.parse(&rec, "min")?,
            max: cols.parse(&rec, "max")?,
        };
        if out.insert(cmg.clone(), stats).is_some() {
            return Err(cols.err(&rec, "cmg", &format!("duplicate CMG {cmg}")));
        }
    }
    Ok(out)
}

pub fn load_dataset<C: Read, P: Read, B: Read>(cases: C, params: P, benchmark: B) -> Result<Dataset> {
    let mut warnings = Vec::new();
    let cases = read_cases(cases, &mut warnings)?;
    let params = read_params(params, &mut warnings)?;
    let benchmark = read_benchmark(benchmark, &mut warnings)?;
    let mut ds = Dataset::new(cases, params, benchmark)?;
    warnings.extend(std::mem::take(&mut ds.warnings));
    ds.push_warnings(warnings);
    Ok(ds)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Loads `cases.csv`, `params.csv` and `benchmark.csv` from a directory.
pub fn load_dataset_dir(dir: &Path) -> Result<Dataset> {
    load_dataset(
        open(&dir.join(CASES_FILE))?,
        open(&dir.join(PARAMS_FILE))?,
        open(&dir.join(BENCHMARK_FILE))?,
    )
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_cases<W: Write>(cases: &[CaseRecord], dst: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    w.write_record(CASE_COLUMNS)?;
    for c in cases {
        w.write_record([
            c.case_id.as_str(),
            c.cmg.as_str(),
            &c.pac_riw.to_string(),
            &c.riw.to_string(),
            &c.los_total.to_string(),
            &c.los_acute.to_string(),
            &c.los_alc.to_string(),
            &c.sc_hours.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(CASES_FILE, e))?;
    Ok(())
}

pub fn write_params<W: Write>(p: &HospitalCostParams, dst: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    w.write_record(PARAM_COLUMNS)?;
    w.write_record([
        fmt_cents(p.cpwc),
        fmt_cents(p.cpd_total),
        opt(p.cpd_direct.map(fmt_cents)),
        opt(p.cpd_overhead.map(fmt_cents)),
        opt(p.acute_expenses.map(fmt_cents)),
        opt(p.total_patient_days),
    ])?;
    w.flush().map_err(|e| Error::io(PARAMS_FILE, e))?;
    Ok(())
}

pub fn write_benchmark<W: Write>(benchmark: &StatsMap, dst: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    w.write_record(BENCHMARK_COLUMNS)?;
    for s in benchmark.values() {
        w.write_record([
            s.cmg.to_string(),
            s.case_count.to_string(),
            fmt_cents(s.total),
            fmt_cents(s.average),
            fmt_cents(s.stdev),
            fmt_cents(s.min),
            fmt_cents(s.max),
        ])?;
    }
    w.flush().map_err(|e| Error::io(BENCHMARK_FILE, e))?;
    Ok(())
}

pub(crate) fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes the three dataset files into `dir`, creating it if needed.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_cases(ds.cases(), create(&dir.join(CASES_FILE))?)?;
    write_params(ds.params(), create(&dir.join(PARAMS_FILE))?)?;
    write_benchmark(ds.benchmark(), create(&dir.join(BENCHMARK_FILE))?)?;
    Ok(())
}
