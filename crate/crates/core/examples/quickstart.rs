// Generate a synthetic hospital year, run all five models plus the hybrid,
// and print the side-by-side performance table.
//
//     cargo run -p casecost --example quickstart

use casecost::report::{Format, PerformanceReport};
use casecost::{generate_synthetic, run_model, ModelConfig, ModelId, SyntheticSpec};

pub fn run() -> casecost::Result<String> {
    let data = generate_synthetic(&SyntheticSpec::default())?;
    let ds = &data.dataset;

    let mut tables = Vec::new();
    for model in ModelId::PER_CASE.into_iter().chain([ModelId::Hybrid]) {
        tables.push(run_model(ds, &ModelConfig::new(model))?.table);
    }

    let mut out = Vec::new();
    PerformanceReport::new(&tables, false)?.write(Format::Csv, &mut out)?;
    let text = String::from_utf8(out).expect("csv is utf-8");
    Ok(format!(
        "{} cases in {} CMGs\n{text}",
        ds.cases().len(),
        ds.groups().len()
    ))
}

#[allow(dead_code)]
fn main() -> casecost::Result<()> {
    print!("{}", run()?);
    Ok(())
}
