// Backward induction checked against brute-force enumeration of every
// bang-bang policy on short horizons.

use ewt_reg::solver::{e_dp, exhaustive_policy_oracle};
use ewt_reg::{generate_scenario, ScenarioConfig, TargetProfile};

pub fn run_example() -> ewt_reg::Result<()> {
    let target = TargetProfile::constant(5.0)?;
    for seed in 0..5 {
        let scenario = generate_scenario(&ScenarioConfig { seed, n_sequential: 3, ..Default::default() })?;
        let (policy, tree) = e_dp(&scenario, &target)?;
        let root = tree.vertices[0][0].value;
        let oracle = exhaustive_policy_oracle(&tree)?;
        println!(
            "seed {seed}: backward induction {root:.9}, best of 128 policies {oracle:.9}, root action {}",
            policy.actions[0][0]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ewt_reg::Result<()> {
    run_example()
}
