// A CMG where every case carries the same PAC weight although the
// RIW values differ. Model 1 gives every case the same cost; Model 2
// redistributes the group's PAC total by RIW and recovers the spread
// without changing the group total.
//
//     cargo run -p casecost --example pac_weight_repair

use casecost::{
    aggregate, compute_errors, compute_pac_mod, estimate, generate_synthetic, CostProcess, ModelConfig, ModelId,
    SyntheticSpec,
};

pub fn run() -> casecost::Result<String> {
    let spec = SyntheticSpec {
        n_cmgs: 1,
        cases_per_cmg: (9, 9),
        cost_process: CostProcess::ProportionalToRiw,
        degenerate_pac_fraction: 1.0,
        degenerate_both_fraction: 0.0,
        seed: 232,
        ..SyntheticSpec::default()
    };
    let ds = generate_synthetic(&spec)?.dataset;
    let weights = compute_pac_mod(ds.cases())?;

    let mut out = String::new();
    out.push_str("case      pac_riw   riw      pac_mod\n");
    for c in ds.cases() {
        let w = weights.get(&c.case_id).unwrap_or_default();
        out.push_str(&format!("{:<9} {:<9} {:<8} {w:.4}\n", c.case_id, c.pac_riw, c.riw));
    }

    out.push_str("\nmodel  e_total    e_stdev    e_min      e_max\n");
    for model in [ModelId::M1, ModelId::M2] {
        let est = estimate(model, &ds, &ModelConfig::new(model))?;
        let e = &compute_errors(&aggregate(&est.estimates), ds.benchmark())?[0];
        out.push_str(&format!(
            "{model:<6} {:<10.2} {:<10.2} {:<10.2} {:.2}\n",
            e.e_total, e.e_stdev, e.e_min, e.e_max
        ));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> casecost::Result<()> {
    print!("{}", run()?);
    Ok(())
}
