// Target of 4 minutes that switches to 6 minutes at t = 20.

use ewt_reg::experiments::{time_varying, Solver};
use ewt_reg::{canonical_scenario, TargetProfile};

pub fn run_example() -> ewt_reg::Result<()> {
    let profile = TargetProfile::new(vec![(0.0, 4.0), (20.0, 6.0)])?;
    let r = time_varying(&canonical_scenario(), &profile, Solver::Edp)?;
    for p in r.curve.iter().step_by(8) {
        println!("t={:>4}  target {}  E[EWT] {:.3}  baseline {:.3}", p.t, p.target, p.expected_ewt, p.baseline_ewt);
    }
    println!("deviation {:.4} min, baseline {:.4} min", r.average_deviation, r.baseline_deviation);
    Ok(())
}

#[allow(dead_code)]
fn main() -> ewt_reg::Result<()> {
    run_example()
}
