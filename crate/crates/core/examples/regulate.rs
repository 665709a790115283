// Exact dynamic program on the canonical scenario with a 5-minute target.

use ewt_reg::experiments::{simulate, Solver};
use ewt_reg::{canonical_scenario, TargetProfile};

pub fn run_example() -> ewt_reg::Result<()> {
    let scenario = canonical_scenario();
    let result = simulate(&scenario, &TargetProfile::constant(5.0)?, Solver::Edp)?;
    println!("  t   E[EWT]  baseline  target");
    for p in result.curve.iter().step_by(8) {
        println!("{:>4} {:>8.3} {:>9.3} {:>7}", p.t, p.expected_ewt, p.baseline_ewt, p.target);
    }
    println!(
        "average deviation {:.4} min (all-accept baseline {:.4} min)",
        result.average_deviation, result.baseline_deviation
    );
    let rates: Vec<String> = result.acceptance.per_passenger.iter().map(|a| format!("{a:.3}")).collect();
    println!("expected acceptance per passenger: [{}], mean {:.4}", rates.join(", "), result.acceptance.mean);
    Ok(())
}

#[allow(dead_code)]
fn main() -> ewt_reg::Result<()> {
    run_example()
}
