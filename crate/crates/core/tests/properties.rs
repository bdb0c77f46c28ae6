mod common;

use casecost::aggregate::summarize;
use casecost::evaluate::bucket_counts;
use casecost::{
    aggregate, bucketize, compute_errors, compute_pac_mod, estimate, load_dataset_dir, mean_abs_errors, run_model,
    write_dataset, Buckets, CaseEstimate, CmgCode, CostProcess, Dataset, ModelConfig, ModelId, StayCoefficients,
    StdevMode,
};
use common::{rel, small, total};
use proptest::prelude::*;

fn process() -> impl Strategy<Value = CostProcess> {
    prop_oneof![
        Just(CostProcess::ProportionalToRiw),
        Just(CostProcess::ProportionalToLos),
        Just(CostProcess::Mixed),
        coefficients().prop_map(CostProcess::StayType),
    ]
}

fn coefficients() -> impl Strategy<Value = StayCoefficients> {
    (0.1..5.0f64, 0.1..5.0f64, 0.1..5.0f64).prop_map(|(a, b, c)| StayCoefficients::new(a, b, c).unwrap())
}

fn run(model: ModelId, ds: &Dataset, k: StayCoefficients) -> Vec<CaseEstimate> {
    estimate(model, ds, &ModelConfig::new(model).with_coefficients(k))
        .unwrap()
        .estimates
}

fn scaled(ds: &Dataset, cpwc: f64, cpd: f64) -> Dataset {
    let mut p = ds.params().clone();
    p.cpwc *= cpwc;
    p.cpd_total *= cpd;
    p.cpd_direct = None;
    p.cpd_overhead = None;
    ds.with_params(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pac_mod_preserves_cmg_weight_sums(seed in any::<u64>(), p in process()) {
        let ds = small(seed, p).dataset;
        let w = compute_pac_mod(ds.cases()).unwrap();
        for members in ds.groups().values() {
            let pac: f64 = members.iter().map(|&i| ds.cases()[i].pac_riw).sum();
            let modded: f64 = members.iter().map(|&i| w.get(&ds.cases()[i].case_id).unwrap()).sum();
            prop_assert!(rel(pac, modded) <= 1e-9, "{pac} vs {modded}");
        }
    }

    #[test]
    fn m2_matches_m1_cmg_totals(seed in any::<u64>(), p in process()) {
        let ds = small(seed, p).dataset;
        let k = StayCoefficients::default();
        let s1 = aggregate(&run(ModelId::M1, &ds, k));
        let s2 = aggregate(&run(ModelId::M2, &ds, k));
        for (cmg, a) in &s1 {
            let b = &s2[cmg];
            prop_assert!(rel(a.total, b.total) <= 1e-9);
            prop_assert!(rel(a.average, b.average) <= 1e-9);
        }
    }

    #[test]
    fn normalized_models_conserve_benchmark_total(seed in any::<u64>(), p in process(), k in coefficients()) {
        let ds = small(seed, p).dataset;
        let target = common::benchmark_sum(&ds);
        for model in [ModelId::M3, ModelId::M4, ModelId::M5] {
            let t = total(&run(model, &ds, k));
            prop_assert!(rel(t, target) <= 1e-9, "{model}: {t} vs {target}");
        }
    }

    #[test]
    fn per_diem_rate_cancels(seed in any::<u64>(), p in process(), k in coefficients(), f in 0.01..100.0f64) {
        let ds = small(seed, p).dataset;
        let other = scaled(&ds, 1.0, f);
        for model in [ModelId::M4, ModelId::M5] {
            for (a, b) in run(model, &ds, k).iter().zip(run(model, &other, k)) {
                prop_assert!(rel(a.cce, b.cce) <= 1e-12, "{model}: {} vs {}", a.cce, b.cce);
            }
        }
    }

    #[test]
    fn cpwc_cancels_in_m3(seed in any::<u64>(), p in process(), f in 0.01..100.0f64) {
        let ds = small(seed, p).dataset;
        let other = scaled(&ds, f, 1.0);
        let k = StayCoefficients::default();
        for (a, b) in run(ModelId::M3, &ds, k).iter().zip(run(ModelId::M3, &other, k)) {
            prop_assert!(rel(a.cce, b.cce) <= 1e-12);
        }
    }

    #[test]
    fn equal_coefficients_reduce_m5_to_m4(seed in any::<u64>(), p in process(), k in 0.05..20.0f64) {
        let ds = small(seed, p).dataset;
        let m4 = run(ModelId::M4, &ds, StayCoefficients::default());
        let m5 = run(ModelId::M5, &ds, StayCoefficients::uniform(k));
        for (a, b) in m4.iter().zip(&m5) {
            prop_assert!(rel(a.cce, b.cce) <= 1e-9, "{} vs {}", a.cce, b.cce);
        }
    }

    #[test]
    fn m4_is_monotone_in_stay_length(seed in any::<u64>(), p in process()) {
        let ds = small(seed, p).dataset;
        let est = run(ModelId::M4, &ds, StayCoefficients::default());
        let mut pairs: Vec<(i64, f64)> = ds.cases().iter().map(|c| c.los_total).zip(est.iter().map(|e| e.cce)).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for w in pairs.windows(2) {
            prop_assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn aggregation_ignores_case_order(seed in any::<u64>(), p in process(), shuffle_seed in any::<u64>()) {
        let ds = small(seed, p).dataset;
        let est = run(ModelId::M5, &ds, StayCoefficients::default());
        let mut shuffled = est.clone();
        let n = shuffled.len();
        let mut state = shuffle_seed | 1;
        for i in (1..n).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let (a, b) = (aggregate(&est), aggregate(&shuffled));
        for (cmg, x) in &a {
            let y = &b[cmg];
            prop_assert_eq!(x.case_count, y.case_count);
            prop_assert_eq!((x.min, x.max), (y.min, y.max));
            prop_assert!(rel(x.total, y.total) <= 1e-12);
            prop_assert!(rel(x.average, y.average) <= 1e-12);
            prop_assert!((x.stdev - y.stdev).abs() <= 1e-9 * x.average.max(1.0));
        }
    }

    #[test]
    fn aggregated_totals_add_up(seed in any::<u64>(), p in process()) {
        let ds = small(seed, p).dataset;
        let est = run(ModelId::M2, &ds, StayCoefficients::default());
        let stats = aggregate(&est);
        let by_group: f64 = stats.values().map(|s| s.total).sum();
        prop_assert!(rel(by_group, total(&est)) <= 1e-12);
        let counts: u64 = stats.values().map(|s| s.case_count).sum();
        prop_assert_eq!(counts as usize, est.len());
        for s in stats.values() {
            prop_assert!(s.min <= s.average && s.average <= s.max);
            prop_assert!(s.stdev >= 0.0);
        }
    }

    #[test]
    fn errors_are_antisymmetric(seed in any::<u64>(), p in process()) {
        let ds = small(seed, p).dataset;
        let est = aggregate(&run(ModelId::M4, &ds, StayCoefficients::default()));
        let fwd = compute_errors(&est, ds.benchmark()).unwrap();
        let back = compute_errors(ds.benchmark(), &est).unwrap();
        for (f, b) in fwd.iter().zip(&back) {
            prop_assert_eq!(f.e_total, -b.e_total);
            prop_assert_eq!(f.e_avg, -b.e_avg);
            prop_assert_eq!(f.e_stdev, -b.e_stdev);
            prop_assert_eq!(f.e_min, -b.e_min);
            prop_assert_eq!(f.e_max, -b.e_max);
        }
        let same = compute_errors(ds.benchmark(), ds.benchmark()).unwrap();
        prop_assert!(same.iter().all(|e| e.e_total == 0.0 && e.rel_total == 0.0));
    }

    #[test]
    fn mean_abs_errors_ignore_order_and_sign(seed in any::<u64>(), p in process()) {
        let ds = small(seed, p).dataset;
        let est = aggregate(&run(ModelId::M1, &ds, StayCoefficients::default()));
        let errors = compute_errors(&est, ds.benchmark()).unwrap();
        let mut reversed = errors.clone();
        reversed.reverse();
        let negated = compute_errors(ds.benchmark(), &est).unwrap();
        let m = mean_abs_errors(&errors);
        for other in [mean_abs_errors(&reversed), mean_abs_errors(&negated)] {
            prop_assert!(rel(m.avg, other.avg) <= 1e-12);
            prop_assert!(rel(m.min, other.min) <= 1e-12);
            prop_assert!(rel(m.max, other.max) <= 1e-12);
        }
    }

    #[test]
    fn bucket_shares_sum_to_100(seed in any::<u64>(), p in process(), k in coefficients()) {
        let ds = small(seed, p).dataset;
        let est = aggregate(&run(ModelId::M5, &ds, k));
        let errors = compute_errors(&est, ds.benchmark()).unwrap();
        let shares = bucketize(&errors, &Buckets::default());
        prop_assert!((shares.iter().sum::<f64>() - 100.0).abs() <= 1e-9);
        let counts = bucket_counts(&errors, &Buckets::default());
        prop_assert_eq!(counts.iter().sum::<u64>() as usize, errors.len());
    }

    #[test]
    fn hybrid_borrows_totals_and_extremes(seed in any::<u64>(), p in process(), k in coefficients()) {
        let ds = small(seed, p).dataset;
        let config = |m| ModelConfig::new(m).with_coefficients(k);
        let h = run_model(&ds, &config(ModelId::Hybrid)).unwrap();
        let m3 = run_model(&ds, &config(ModelId::M3)).unwrap();
        let m5 = run_model(&ds, &config(ModelId::M5)).unwrap();
        for (cmg, s) in &h.stats {
            let (a, b) = (&m3.stats[cmg], &m5.stats[cmg]);
            prop_assert_eq!((s.total, s.average, s.stdev, s.case_count), (a.total, a.average, a.stdev, a.case_count));
            prop_assert_eq!(s.min, b.min.min(a.average));
            prop_assert_eq!(s.max, b.max.max(a.average));
        }
        prop_assert_eq!(h.table.p_ab, m3.table.p_ab);
    }

    #[test]
    fn generated_benchmark_is_the_truth_aggregate(seed in any::<u64>(), p in process()) {
        let data = small(seed, p);
        let mut by_cmg: std::collections::BTreeMap<CmgCode, Vec<f64>> = Default::default();
        for c in data.dataset.cases() {
            by_cmg.entry(c.cmg.clone()).or_default().push(data.ground_truth[&c.case_id]);
        }
        prop_assert_eq!(by_cmg.len(), data.dataset.benchmark().len());
        for (cmg, xs) in &by_cmg {
            let b = &data.dataset.benchmark()[cmg];
            let (mean, sd) = common::mean_sd(xs);
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(b.case_count as usize, xs.len());
            prop_assert!(rel(b.total, xs.iter().sum()) <= 1e-9);
            prop_assert!(rel(b.average, mean) <= 1e-9);
            prop_assert!((b.stdev - sd).abs() <= 1e-9 * mean);
            prop_assert_eq!((b.min, b.max), (lo, hi));
        }
    }

    #[test]
    fn generated_records_are_consistent(seed in any::<u64>(), p in process()) {
        let data = small(seed, p);
        for c in data.dataset.cases() {
            prop_assert!(c.los_consistent());
            prop_assert!(c.sc_hours <= 24.0 * c.los_acute as f64);
            prop_assert!(c.pac_riw >= 0.0 && c.riw >= 0.0);
        }
    }

    #[test]
    fn generated_model_equivalences(seed in any::<u64>(), k in coefficients()) {
        let cases = [
            (CostProcess::ProportionalToRiw, ModelId::M3),
            (CostProcess::ProportionalToLos, ModelId::M4),
            (CostProcess::StayType(k), ModelId::M5),
        ];
        for (process, model) in cases {
            let ds = small(seed, process).dataset;
            let est = aggregate(&run(model, &ds, k));
            for e in compute_errors(&est, ds.benchmark()).unwrap() {
                prop_assert!(e.rel_total.abs() <= 1e-9, "{model} {}: {}", e.cmg, e.rel_total);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn csv_round_trip_preserves_data(seed in any::<u64>(), p in process()) {
        let ds = small(seed, p).dataset;
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset_dir(dir.path()).unwrap();
        prop_assert_eq!(back.cases(), ds.cases());
        prop_assert_eq!(back.params().cpwc, ds.params().cpwc);
        prop_assert_eq!(back.params().cpd_total, ds.params().cpd_total);
        for (cmg, a) in ds.benchmark() {
            let b = &back.benchmark()[cmg];
            prop_assert_eq!(a.case_count, b.case_count);
            for (x, y) in [(a.total, b.total), (a.average, b.average), (a.stdev, b.stdev), (a.min, b.min), (a.max, b.max)] {
                prop_assert!((x - y).abs() <= 0.005 + 1e-9 * x.abs());
            }
        }
    }
}

#[test]
fn population_stdev_is_never_larger() {
    let xs = [2000.0, 6000.0, 3500.0];
    let s = summarize("1".into(), &xs, StdevMode::Sample);
    let p = summarize("1".into(), &xs, StdevMode::Population);
    assert!(p.stdev < s.stdev);
    assert!(rel(s.stdev * s.stdev * 2.0, p.stdev * p.stdev * 3.0) < 1e-12);
}
