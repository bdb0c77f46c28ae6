//! One line per acceptance criterion, then a single pass/fail verdict.
//!
//! Run with `cargo test -p casecost --test acceptance` to see the report.

mod common;

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use casecost::domain::{fmt_cents, round_cents};
use casecost::models::estimate_m1;
use casecost::optimize::{evaluate_point, Range};
use casecost::report::{write_trace, Format, PerformanceReport};
use casecost::{
    aggregate, compute_errors, compute_pac_mod, criterion_vector, estimate, generate_synthetic, grid_search, run_model,
    Buckets, CaseId, CaseRecord, CostProcess, CriterionVector, Dataset, GridSpec, HospitalCostParams, ModelConfig,
    ModelId, PerformanceTable, SearchOptions, StayCoefficients, SyntheticSpec,
};
use common::{group_totals, large, rel, total};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run(model: ModelId, ds: &Dataset, k: StayCoefficients) -> Vec<casecost::CaseEstimate> {
    estimate(model, ds, &ModelConfig::new(model).with_coefficients(k))
        .unwrap()
        .estimates
}

fn column(p: [f64; 7]) -> PerformanceTable {
    PerformanceTable {
        model: ModelId::M1,
        buckets: Buckets::default(),
        p_ab: p.to_vec(),
        counts: vec![0; 7],
        mean_abs_e_avg: 0.0,
        mean_abs_e_min: 0.0,
        mean_abs_e_max: 0.0,
        mean_abs_e_stdev: 0.0,
        n_groups: 163,
    }
}

fn formula_fidelity() -> Outcome {
    let case = CaseRecord {
        case_id: CaseId::from("1"),
        cmg: "232".into(),
        pac_riw: 0.9002,
        riw: 0.9002,
        los_total: 1,
        los_acute: 1,
        los_alc: 0,
        sc_hours: 0.0,
    };
    let params = HospitalCostParams::new(6000.0, 1600.0).unwrap();
    let cce = estimate_m1(&case, &params).cce;
    check(
        round_cents(cce) == 5401.20 && fmt_cents(cce) == "5401.20",
        format!("m1 = {cce}"),
    )?;

    let m1 = criterion_vector(&column([20.0, 22.0, 13.0, 13.0, 15.0, 11.0, 7.0])).unwrap();
    let m5 = criterion_vector(&column([7.0, 6.0, 6.0, 6.0, 18.0, 26.0, 31.0])).unwrap();
    let want = |a, b, c| CriterionVector {
        large_err_pct: a,
        very_large_err_pct: b,
        small_err_pct: c,
    };
    check(m1 == want(18.0, 7.0, 42.0), format!("model 1 column -> {m1:?}"))?;
    check(m5 == want(57.0, 31.0, 13.0), format!("model 5 column -> {m5:?}"))?;
    Ok("5401.20; (18, 7, 42); (57, 31, 13)".into())
}

fn conservation() -> Outcome {
    let start = Instant::now();
    let data = large(2024, CostProcess::Mixed);
    let ds = &data.dataset;
    let target = common::benchmark_sum(ds);
    let k = StayCoefficients::default();
    let mut worst: f64 = 0.0;
    for model in [ModelId::M3, ModelId::M4, ModelId::M5] {
        let r = rel(total(&run(model, ds, k)), target);
        check(r <= 1e-9, format!("{model} total off by {r:e}"))?;
        worst = worst.max(r);
    }

    let w = compute_pac_mod(ds.cases()).unwrap();
    for members in ds.groups().values() {
        let a: f64 = members.iter().map(|&i| ds.cases()[i].pac_riw).sum();
        let b: f64 = members.iter().map(|&i| w.get(&ds.cases()[i].case_id).unwrap()).sum();
        check(rel(a, b) <= 1e-9, format!("weight sum {a} vs {b}"))?;
        worst = worst.max(rel(a, b));
    }
    let s1 = aggregate(&run(ModelId::M1, ds, k));
    let s2 = aggregate(&run(ModelId::M2, ds, k));
    for (cmg, a) in &s1 {
        let b = &s2[cmg];
        let r = rel(a.total, b.total).max(rel(a.average, b.average));
        check(r <= 1e-9, format!("{cmg}: m1/m2 differ by {r:e}"))?;
        worst = worst.max(r);
    }
    let t1 = group_totals(&run(ModelId::M1, ds, k));
    check(t1.len() >= 150, format!("{} CMGs", t1.len()))?;
    let elapsed = start.elapsed();
    check(elapsed <= Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} cases, {} CMGs, worst relative deviation {worst:.1e}, {elapsed:.2?}",
        ds.cases().len(),
        t1.len()
    ))
}

fn reduction_identity() -> Outcome {
    let ds = large(7, CostProcess::Mixed).dataset;
    check(ds.cases().iter().all(CaseRecord::los_consistent), "inconsistent LOS")?;
    let m4 = run(ModelId::M4, &ds, StayCoefficients::default());
    let mut worst: f64 = 0.0;
    for k in [0.5, 1.0, 2.85] {
        let m5 = run(ModelId::M5, &ds, StayCoefficients::uniform(k));
        for (a, b) in m4.iter().zip(&m5) {
            worst = worst.max(rel(a.cce, b.cce));
        }
    }
    check(worst <= 1e-9, format!("worst {worst:e}"))?;
    Ok(format!("{} cases, worst relative gap {worst:.1e}", m4.len()))
}

fn scale_invariance() -> Outcome {
    let ds = large(11, CostProcess::Mixed).dataset;
    let mut p = ds.params().clone();
    p.cpd_total *= 10.0;
    p.cpd_direct = None;
    p.cpd_overhead = None;
    let cpd10 = ds.with_params(p).unwrap();
    let mut p = ds.params().clone();
    p.cpwc *= 10.0;
    let cpwc10 = ds.with_params(p).unwrap();

    let k = StayCoefficients::default();
    let mut worst: f64 = 0.0;
    for (model, other) in [(ModelId::M4, &cpd10), (ModelId::M5, &cpd10), (ModelId::M3, &cpwc10)] {
        for (a, b) in run(model, &ds, k).iter().zip(run(model, other, k)) {
            worst = worst.max(rel(a.cce, b.cce));
        }
    }
    check(worst <= 1e-12, format!("worst {worst:e}"))?;
    Ok(format!("worst relative change {worst:.1e}"))
}

fn pathology_remediation() -> Outcome {
    let mut lines = Vec::new();
    for seed in [232, 884, 1, 2, 3] {
        let ds = generate_synthetic(&SyntheticSpec {
            n_cmgs: 1,
            cases_per_cmg: (9, 9),
            cost_process: CostProcess::ProportionalToRiw,
            degenerate_pac_fraction: 1.0,
            degenerate_both_fraction: 0.0,
            seed,
            ..SyntheticSpec::default()
        })
        .unwrap()
        .dataset;
        let pac = ds.cases()[0].pac_riw;
        check(ds.cases().len() == 9, "nine cases")?;
        check(ds.cases().iter().all(|c| c.pac_riw == pac), "one shared PAC weight")?;
        let mut riw: Vec<f64> = ds.cases().iter().map(|c| c.riw).collect();
        riw.sort_by(f64::total_cmp);
        riw.dedup();
        check(riw.len() == 9, "distinct RIW values")?;

        let err = |m| {
            compute_errors(&aggregate(&run(m, &ds, StayCoefficients::default())), ds.benchmark()).unwrap()[0].clone()
        };
        let (e1, e2) = (err(ModelId::M1), err(ModelId::M2));
        check(
            e2.e_min.abs() < e1.e_min.abs(),
            format!("|e_min| {} -> {}", e1.e_min, e2.e_min),
        )?;
        check(
            e2.e_max.abs() < e1.e_max.abs(),
            format!("|e_max| {} -> {}", e1.e_max, e2.e_max),
        )?;
        check(
            (e1.e_total - e2.e_total).abs() <= 1e-9 * ds.benchmark_total(),
            format!("e_total {} -> {}", e1.e_total, e2.e_total),
        )?;
        lines.push(format!(
            "e_min {:.2}->{:.2}, e_max {:.2}->{:.2}",
            e1.e_min, e2.e_min, e1.e_max, e2.e_max
        ));
    }
    Ok(lines[0].clone() + &format!(" (and {} more seeds)", lines.len() - 1))
}

fn bias_property() -> Outcome {
    let data = generate_synthetic(&SyntheticSpec {
        cost_process: CostProcess::ProportionalToLos,
        degenerate_pac_fraction: 0.0,
        degenerate_both_fraction: 1.0,
        seed: 6,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let ds = &data.dataset;
    let errors = compute_errors(
        &aggregate(&run(ModelId::M1, ds, StayCoefficients::default())),
        ds.benchmark(),
    )
    .unwrap();
    let mut spread = 0;
    for e in &errors {
        let b = &ds.benchmark()[&e.cmg];
        if b.max > b.min {
            spread += 1;
            check(
                e.e_min > 0.0 && e.e_max < 0.0,
                format!("{}: e_min {} e_max {}", e.cmg, e.e_min, e.e_max),
            )?;
        }
    }
    check(spread >= 100, format!("only {spread} CMGs with spread"))?;
    Ok(format!("{spread} of {} CMGs with spread all biased", errors.len()))
}

fn oracle_equivalence() -> Outcome {
    let truth = StayCoefficients::default();
    let pairs = [
        (CostProcess::ProportionalToRiw, ModelId::M2),
        (CostProcess::ProportionalToRiw, ModelId::M3),
        (CostProcess::ProportionalToLos, ModelId::M4),
        (CostProcess::StayType(truth), ModelId::M5),
    ];
    for (process, model) in pairs {
        let ds = generate_synthetic(&SyntheticSpec {
            cost_process: process,
            ..SyntheticSpec::default()
        })
        .unwrap()
        .dataset;
        let table = run_model(&ds, &ModelConfig::new(model).with_coefficients(truth))
            .unwrap()
            .table;
        check(
            table.p_ab[0] == 100.0,
            format!("{model}: first bucket {}", table.p_ab[0]),
        )?;
        let errors = compute_errors(&aggregate(&run(model, &ds, truth)), ds.benchmark()).unwrap();
        for e in &errors {
            let scale = ds.benchmark()[&e.cmg].average;
            for v in [e.e_total, e.e_avg, e.e_stdev, e.e_min, e.e_max] {
                check(v.abs() <= 1e-9 * scale, format!("{model} {}: error {v}", e.cmg))?;
            }
        }
    }

    let mut found = Vec::new();
    for seed in [42, 43] {
        let ds = generate_synthetic(&SyntheticSpec {
            cost_process: CostProcess::StayType(truth),
            seed,
            ..SyntheticSpec::default()
        })
        .unwrap()
        .dataset;
        let grid = GridSpec::new(
            Range::new(0.8, 1.8, 0.5).unwrap(),
            Range::new(0.2, 0.8, 0.3).unwrap(),
            Range::new(1.85, 3.85, 1.0).unwrap(),
        );
        check(
            grid.points().unwrap().contains(&truth),
            "grid lacks the generating triple",
        )?;
        let best = grid_search(&ds, &grid, &SearchOptions::default()).unwrap().best;
        check(best == truth, format!("seed {seed}: found {:?}", best.as_tuple()))?;
        found.push(best.as_tuple());
    }
    Ok(format!("zero errors for M2/M3/M4/M5; optimizer found {:?}", found[0]))
}

/// Ranking written out directly: fewer large, then fewer very large, then
/// more small errors, then the smallest (k1, k2, k3).
fn better(a: &(StayCoefficients, CriterionVector), b: &(StayCoefficients, CriterionVector)) -> bool {
    let key = |x: &(StayCoefficients, CriterionVector)| {
        (
            x.1.large_err_pct,
            x.1.very_large_err_pct,
            -x.1.small_err_pct,
            x.0.k1,
            x.0.k2,
            x.0.k3,
        )
    };
    key(a) < key(b)
}

fn optimizer_correctness() -> Outcome {
    let grids = [
        ([0.8, 1.3, 1.8], [0.2, 0.5, 0.8], [1.85, 2.85, 3.85]),
        ([1.0, 1.2, 1.4], [0.3, 0.4, 0.5], [2.0, 2.5, 3.0]),
        ([0.25, 2.0, 3.75], [0.1, 0.6, 1.1], [1.0, 4.0, 7.0]),
    ];
    let mut n = 0;
    for (i, process) in [CostProcess::Mixed, CostProcess::ProportionalToRiw]
        .into_iter()
        .enumerate()
    {
        let ds = generate_synthetic(&SyntheticSpec {
            cost_process: process,
            seed: 100 + i as u64,
            ..SyntheticSpec::default()
        })
        .unwrap()
        .dataset;
        for (k1, k2, k3) in &grids {
            let mut best: Option<(StayCoefficients, CriterionVector)> = None;
            for &a in k1 {
                for &b in k2 {
                    for &c in k3 {
                        let k = StayCoefficients::new(a, b, c).unwrap();
                        let cand = (k, evaluate_point(&ds, ModelId::M5, k).unwrap());
                        if best.as_ref().is_none_or(|cur| better(&cand, cur)) {
                            best = Some(cand);
                        }
                    }
                }
            }
            let (bk, bc) = best.unwrap();
            let r = |v: &[f64; 3]| Range::new(v[0], v[2], v[1] - v[0]).unwrap();
            let got = grid_search(&ds, &GridSpec::new(r(k1), r(k2), r(k3)), &SearchOptions::default()).unwrap();
            check(got.trace.len() == 27, "27 points")?;
            check(
                got.best == bk && got.criterion == bc,
                format!("search {:?} vs enumeration {:?}", got.best.as_tuple(), bk.as_tuple()),
            )?;
            n += 1;
        }
    }

    let ds = large(3, CostProcess::Mixed).dataset;
    let grid = GridSpec::new(
        Range::new(1.0, 2.0, 0.1).unwrap(),
        Range::new(0.3, 0.7, 0.1).unwrap(),
        Range::new(2.0, 3.0, 0.05).unwrap(),
    );
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, threads) in [None, Some(1)].into_iter().enumerate() {
        let opts = SearchOptions {
            threads,
            ..SearchOptions::default()
        };
        let r = grid_search(&ds, &grid, &opts).unwrap();
        let path = dir.path().join(format!("trace{i}.csv"));
        write_trace(&r, Format::Csv, std::fs::File::create(&path).unwrap()).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    check(files[0] == files[1], "trace files differ between runs")?;
    Ok(format!(
        "{n} grids match enumeration; {}-byte traces identical",
        files[0].len()
    ))
}

fn report_structure() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let bin = env!("CARGO_BIN_EXE_casecost");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = status(&["generate", "--cmgs", "163", "-o", d]);
    check(out.status.success(), "generate failed")?;
    let out = status(&["-q", "report", "--models", "m1,m2,m3,m4,m5", "--hybrid", d]);
    check(out.status.success(), String::from_utf8_lossy(&out.stderr))?;

    let text = std::fs::read_to_string(dir.path().join("performance.csv")).unwrap();
    let mut lines = text.lines();
    check(
        lines.next() == Some("measure,a,b,M1,M2,M3,M4,M5,HYBRID"),
        "header with six model columns",
    )?;
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let labels: Vec<String> = rows.iter().map(|r| format!("{}:{}:{}", r[0], r[1], r[2])).collect();
    let expected = [
        "mean_abs_e_avg::",
        "mean_abs_e_min::",
        "mean_abs_e_max::",
        "p_ab:0:5",
        "p_ab:5:10",
        "p_ab:10:15",
        "p_ab:15:20",
        "p_ab:20:30",
        "p_ab:30:50",
        "p_ab:50:",
    ];
    check(labels == expected, format!("rows {labels:?}"))?;
    let mut worst: f64 = 0.0;
    for col in 3..9 {
        let sum: f64 = rows[3..].iter().map(|r| r[col].parse::<f64>().unwrap()).sum();
        worst = worst.max((sum - 100.0).abs());
    }
    check(worst <= 0.1, format!("bucket column off by {worst}"))?;
    Ok(format!("10 rows x 6 models, bucket sums within {worst:.2} of 100"))
}

fn end_to_end_performance() -> Outcome {
    let start = Instant::now();
    let data = large(10, CostProcess::Mixed);
    let ds = &data.dataset;
    let mut tables = Vec::new();
    for model in ModelId::PER_CASE.into_iter().chain([ModelId::Hybrid]) {
        tables.push(run_model(ds, &ModelConfig::new(model)).unwrap().table);
    }
    let mut sink = Vec::new();
    PerformanceReport::new(&tables, false)
        .unwrap()
        .write(Format::Csv, &mut sink)
        .unwrap();
    let pipeline = start.elapsed();
    check(
        pipeline < Duration::from_secs(10),
        format!("pipeline took {pipeline:?}"),
    )?;

    let grid = GridSpec::new(
        Range::new(0.5, 2.4, 0.1).unwrap(),
        Range::new(0.05, 1.0, 0.05).unwrap(),
        Range::new(1.0, 4.6, 0.15).unwrap(),
    );
    check(grid.size() == 10_000, format!("grid has {} points", grid.size()))?;
    let start = Instant::now();
    let r = grid_search(ds, &grid, &SearchOptions::default()).unwrap();
    let search = start.elapsed();
    check(r.trace.len() == 10_000, "trace length")?;
    check(search < Duration::from_secs(60), format!("grid search took {search:?}"))?;
    Ok(format!(
        "{} cases: pipeline {pipeline:.2?}, 10,000-point search {search:.2?} on {} threads",
        ds.cases().len(),
        rayon::current_num_threads()
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("formula fidelity", formula_fidelity),
        ("conservation", conservation),
        ("reduction identity", reduction_identity),
        ("scale invariance", scale_invariance),
        ("pathology remediation", pathology_remediation),
        ("bias property", bias_property),
        ("oracle equivalence", oracle_equivalence),
        ("optimizer correctness", optimizer_correctness),
        ("report structure", report_structure),
        ("end-to-end performance", end_to_end_performance),
    ];
    // Written to the real stdout so the report shows without --nocapture.
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let line = match f() {
            Ok(detail) => format!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed.push(*name);
                format!("FAIL {:>2} {name}: {detail}", i + 1)
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
