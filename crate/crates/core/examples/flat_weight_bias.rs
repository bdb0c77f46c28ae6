// When every case in a CMG has the same weight but true costs grow with
// length of stay, Model 1 overestimates the cheapest case and
// underestimates the most expensive one in every group.
//
//     cargo run -p casecost --example flat_weight_bias

use casecost::{
    aggregate, compute_errors, estimate, generate_synthetic, CostProcess, ModelConfig, ModelId, SyntheticSpec,
};

pub fn run() -> casecost::Result<String> {
    let ds = generate_synthetic(&SyntheticSpec {
        n_cmgs: 12,
        cost_process: CostProcess::ProportionalToLos,
        degenerate_pac_fraction: 0.0,
        degenerate_both_fraction: 1.0,
        ..SyntheticSpec::default()
    })?
    .dataset;
    let est = estimate(ModelId::M1, &ds, &ModelConfig::new(ModelId::M1))?;
    let errors = compute_errors(&aggregate(&est.estimates), ds.benchmark())?;

    let mut out = String::from("cmg  e_min      e_max\n");
    for e in &errors {
        out.push_str(&format!("{:<4} {:<+10.2} {:+.2}\n", e.cmg, e.e_min, e.e_max));
    }
    let biased = errors.iter().filter(|e| e.e_min > 0.0 && e.e_max < 0.0).count();
    out.push_str(&format!(
        "{biased} of {} CMGs overestimate min and underestimate max\n",
        errors.len()
    ));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> casecost::Result<()> {
    print!("{}", run()?);
    Ok(())
}
