// The two per-diem models. With equal stay-type coefficients Model 5
// collapses to Model 4, and the per-diem rate itself cancels in the
// normalization.
//
//     cargo run -p casecost --example per_diem_models

use casecost::{
    estimate, generate_synthetic, HospitalCostParams, ModelConfig, ModelId, StayCoefficients, SyntheticSpec,
};

pub fn run() -> casecost::Result<String> {
    let ds = generate_synthetic(&SyntheticSpec {
        n_cmgs: 20,
        ..SyntheticSpec::default()
    })?
    .dataset;

    let m4 = estimate(ModelId::M4, &ds, &ModelConfig::new(ModelId::M4))?;
    let flat = ModelConfig::new(ModelId::M5).with_coefficients(StayCoefficients::uniform(1.0));
    let m5_flat = estimate(ModelId::M5, &ds, &flat)?;
    let m5 = estimate(ModelId::M5, &ds, &ModelConfig::new(ModelId::M5))?;

    let worst = m4
        .estimates
        .iter()
        .zip(&m5_flat.estimates)
        .map(|(a, b)| ((a.cce - b.cce) / a.cce).abs())
        .fold(0.0, f64::max);

    let mut p = ds.params().clone();
    p.cpd_total *= 10.0;
    p.cpd_direct = None;
    p.cpd_overhead = None;
    let scaled = ds.with_params(HospitalCostParams { ..p })?;
    let m4_scaled = estimate(ModelId::M4, &scaled, &ModelConfig::new(ModelId::M4))?;
    let cpd_shift = m4
        .estimates
        .iter()
        .zip(&m4_scaled.estimates)
        .map(|(a, b)| ((a.cce - b.cce) / a.cce).abs())
        .fold(0.0, f64::max);

    Ok(format!(
        "benchmark total {:.2}\nM4 total {:.2}\nM5 total {:.2}\n\
         max relative gap M5(k=1,1,1) vs M4: {worst:.1e}\n\
         max relative change of M4 under cpd x10: {cpd_shift:.1e}\n",
        ds.benchmark_total(),
        m4.total(),
        m5.total()
    ))
}

#[allow(dead_code)]
fn main() -> casecost::Result<()> {
    print!("{}", run()?);
    Ok(())
}
