// Policy behaviour as the target waiting time changes.

use ewt_reg::canonical_scenario;
use ewt_reg::experiments::{sweep_target, Solver};

pub fn run_example() -> ewt_reg::Result<()> {
    let (_, rows) = sweep_target(&canonical_scenario(), &[4.0, 5.0, 6.0], Solver::Edp)?;
    println!("target  mean_acceptance  deviation  baseline");
    for r in rows {
        println!(
            "{:>6} {:>16.5} {:>10.4} {:>9.4}",
            r.target, r.mean_acceptance, r.average_deviation, r.baseline_deviation
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ewt_reg::Result<()> {
    run_example()
}
