// Combine Model 3 totals and averages with Model 5 minimum and maximum
// estimates per CMG.
//
//     cargo run -p casecost --example hybrid_model

use casecost::{generate_synthetic, run_model, ModelConfig, ModelId, SyntheticSpec};

pub fn run() -> casecost::Result<String> {
    let ds = generate_synthetic(&SyntheticSpec::default())?.dataset;
    let mut out = String::from("model   E_avg      E_min      E_max\n");
    for model in [ModelId::M3, ModelId::M5, ModelId::Hybrid] {
        let t = run_model(&ds, &ModelConfig::new(model))?.table;
        out.push_str(&format!(
            "{:<7} {:<10.2} {:<10.2} {:.2}\n",
            model.label(),
            t.mean_abs_e_avg,
            t.mean_abs_e_min,
            t.mean_abs_e_max
        ));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> casecost::Result<()> {
    print!("{}", run()?);
    Ok(())
}
