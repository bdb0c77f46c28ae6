// Grid search for k1..k3 on data whose true costs follow the stay-type
// form with (1.3, 0.5, 2.85). The search recovers those coefficients.
//
// The criterion only sees bucketed CMG errors, so triples that are close
// to a multiple of the truth score the same; a coarse grid keeps the
// candidates apart.
//
//     cargo run -p casecost --release --example optimize_coefficients

use casecost::optimize::Range;
use casecost::{
    generate_synthetic, grid_search, CostProcess, GridSpec, SearchOptions, StayCoefficients, SyntheticSpec,
};

pub fn run() -> casecost::Result<String> {
    let truth = StayCoefficients::default();
    let ds = generate_synthetic(&SyntheticSpec {
        cost_process: CostProcess::StayType(truth),
        ..SyntheticSpec::default()
    })?
    .dataset;

    let grid = GridSpec::new(
        Range::new(0.8, 1.8, 0.5)?,
        Range::new(0.2, 0.8, 0.3)?,
        Range::new(1.85, 3.85, 1.0)?,
    );
    let result = grid_search(&ds, &grid, &SearchOptions::default())?;
    let c = result.criterion;
    Ok(format!(
        "{} points searched\nbest k = ({}, {}, {})\nlarge {:.1}%  very large {:.1}%  small {:.1}%\n",
        result.trace.len(),
        result.best.k1,
        result.best.k2,
        result.best.k3,
        c.large_err_pct,
        c.very_large_err_pct,
        c.small_err_pct
    ))
}

#[allow(dead_code)]
fn main() -> casecost::Result<()> {
    print!("{}", run()?);
    Ok(())
}
