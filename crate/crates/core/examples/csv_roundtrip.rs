// Write a dataset as the three input CSV files, load it back with full
// validation, and emit Model 1 estimates as estimates.csv.
//
//     cargo run -p casecost --example csv_roundtrip

use casecost::report::{emit, write_estimates, Format};
use casecost::{estimate, generate_synthetic, load_dataset_dir, write_dataset, ModelConfig, ModelId, SyntheticSpec};

pub fn run() -> casecost::Result<String> {
    let dir = std::env::temp_dir().join(format!("casecost-example-{}", std::process::id()));
    let data = generate_synthetic(&SyntheticSpec {
        n_cmgs: 5,
        ..SyntheticSpec::default()
    })?;
    write_dataset(&data.dataset, &dir)?;

    let loaded = load_dataset_dir(&dir)?;
    let est = estimate(ModelId::M1, &loaded, &ModelConfig::new(ModelId::M1))?;
    let path = emit(&dir, "estimates", Format::Csv, |w| {
        write_estimates(ModelId::M1, &est.estimates, Format::Csv, w)
    })?;
    let head: String = std::fs::read_to_string(&path)
        .map_err(|e| casecost::Error::Io {
            path: path.clone(),
            source: e,
        })?
        .lines()
        .take(4)
        .map(|l| format!("{l}\n"))
        .collect();
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "loaded {} cases, {} warnings\n{head}",
        loaded.cases().len(),
        loaded.warnings().len()
    ))
}

#[allow(dead_code)]
fn main() -> casecost::Result<()> {
    print!("{}", run()?);
    Ok(())
}
