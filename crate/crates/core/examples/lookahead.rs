// Receding-horizon solves with 0..=N lookahead steps.

use ewt_reg::experiments::sweep_lookahead;
use ewt_reg::{canonical_scenario, TargetProfile};

pub fn run_example() -> ewt_reg::Result<()> {
    let scenario = canonical_scenario();
    let rows = sweep_lookahead(&scenario, &TargetProfile::constant(5.0)?, 0..=scenario.horizon())?;
    println!("lookahead  deviation  mean_acceptance  wall_time");
    for r in rows {
        println!(
            "{:>9} {:>10.5} {:>16.5} {:>9.4}s",
            r.lookahead, r.average_deviation, r.mean_acceptance, r.wall_time
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ewt_reg::Result<()> {
    run_example()
}
