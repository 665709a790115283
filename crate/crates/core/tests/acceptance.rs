//! Acceptance suite. Every criterion prints one `[PASS]`/`[FAIL]` line and
//! asserts at its stated tolerance.
//!
//! Run with `cargo test -p ewt-reg --test acceptance -- --nocapture
//! --test-threads=1` to see the report in order.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use ewt_reg::cli::{execute, Cli};
use ewt_reg::experiments::{self, regulation_csv, Solver};
use ewt_reg::mdp::Mdp;
use ewt_reg::rng::SplitMix64;
use ewt_reg::solver::{
    backward_induction, e_dp, evaluate_policy, exhaustive_policy_oracle, expected_acceptance_rates,
    expected_ewt_curve, h_dp, traverse, average_deviation, DecisionHistory, Policy,
};
use ewt_reg::{canonical_scenario, generate_scenario, ScenarioConfig, TargetProfile};
use clap::Parser;

fn report(id: &str, pass: bool, detail: String) {
    println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id} failed: {detail}");
}

fn seeds() -> impl Iterator<Item = u64> {
    (0..10u64).map(|i| 1000 + 7 * i)
}

fn small(seed: u64) -> ewt_reg::Scenario {
    generate_scenario(&ScenarioConfig { seed, n_sequential: 3, ..Default::default() }).unwrap()
}

#[test]
fn c01_oracle_optimality() {
    let target = TargetProfile::constant(5.0).unwrap();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in seeds() {
        let (_, tree) = e_dp(&small(seed), &target).unwrap();
        let root = tree.vertices[0][0].value;
        let oracle = exhaustive_policy_oracle(&tree).unwrap();
        worst = worst.max((root - oracle).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        "C1 oracle optimality",
        worst <= 1e-9 && secs < 5.0,
        format!("max |E-DP - oracle| = {worst:.3e} over 10 seeds (tol 1e-9), {secs:.2}s (limit 5s)"),
    );
}

#[test]
fn c02_bang_bang() {
    let target = TargetProfile::constant(5.0).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for seed in seeds() {
        let (policy, tree) = e_dp(&small(seed), &target).unwrap();
        let optimum = evaluate_policy(&tree, &policy);
        for k in 0..tree.horizon() {
            for h in 0..tree.vertices[k].len() {
                let b = tree.vertices[k][h].bounds;
                for i in 1..=5 {
                    let a = b.lower + (b.upper - b.lower) * i as f64 / 6.0;
                    let mut p = policy.clone();
                    p.actions[k][h] = a;
                    worst = worst.max(evaluate_policy(&tree, &p) - optimum);
                }
            }
        }
    }
    report(
        "C2 bang-bang optimality",
        worst <= 1e-9,
        format!("max interior gain over E-DP = {worst:.3e} (tol 1e-9)"),
    );
}

fn canonical_sweep() -> Vec<experiments::ExperimentResult> {
    let s = canonical_scenario();
    [4.0, 5.0, 6.0]
        .iter()
        .map(|&t| {
            let start = Instant::now();
            let r = experiments::simulate(&s, &TargetProfile::constant(t).unwrap(), Solver::Edp).unwrap();
            assert!(start.elapsed().as_secs_f64() < 60.0, "target {t} took too long");
            r
        })
        .collect()
}

#[test]
fn c03_regulation_beats_baseline() {
    let results = canonical_sweep();
    let detail = results
        .iter()
        .map(|r| {
            format!(
                "EWT*={}: {:.6} vs baseline {:.6}",
                r.metadata.target_segments[0].1, r.average_deviation, r.baseline_deviation
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let pass = results.iter().all(|r| r.average_deviation <= r.baseline_deviation);
    report("C3 regulation beats baseline", pass, detail);
}

#[test]
fn c04_acceptance_monotone_in_target() {
    let results = canonical_sweep();
    let means: Vec<f64> = results.iter().map(|r| r.acceptance.mean).collect();
    let pass = means.windows(2).all(|w| w[1] >= w[0]);
    report("C4 acceptance monotonicity", pass, format!("mean acceptance for EWT*=4,5,6: {means:?}"));
}

#[test]
fn c05_baseline_invariance() {
    let results = canonical_sweep();
    let columns: Vec<String> = results
        .iter()
        .map(|r| {
            regulation_csv(r)
                .unwrap()
                .lines()
                .skip(2)
                .map(|l| l.split(',').nth(2).unwrap().to_string())
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect();
    let pass = columns.windows(2).all(|w| w[0] == w[1]) && !columns[0].is_empty();
    report(
        "C5 baseline invariance",
        pass,
        format!("{} baseline samples byte-compared across EWT*=4,5,6", columns[0].lines().count()),
    );
}

#[test]
fn c06_heuristic_consistency() {
    let s = canonical_scenario();
    let target = TargetProfile::constant(5.0).unwrap();
    let (policy, tree) = e_dp(&s, &target).unwrap();
    let full = h_dp(&s, 8, &target).unwrap();
    let greedy = h_dp(&s, 0, &target).unwrap();
    let d_edp = average_deviation(&tree, &policy);
    let d_h0 = average_deviation(&tree, &greedy);
    report(
        "C6 heuristic consistency",
        full == policy && d_h0 >= d_edp,
        format!("H-DP(8) == E-DP: {}; deviation H-DP(0) {d_h0:.6} >= E-DP {d_edp:.6}", full == policy),
    );
}

#[test]
fn c07_time_varying_tracking() {
    let s = canonical_scenario();
    let profile = TargetProfile::new(vec![(0.0, 4.0), (20.0, 6.0)]).unwrap();
    let r = experiments::time_varying(&s, &profile, Solver::Edp).unwrap();
    report(
        "C7 time-varying tracking",
        r.average_deviation <= r.baseline_deviation,
        format!("deviation {:.6} vs baseline {:.6}", r.average_deviation, r.baseline_deviation),
    );
}

#[test]
fn c08_transition_laws() {
    let mdp = Mdp::default();
    let mut rng = SplitMix64::new(8080);
    let mut failures = 0;
    for k in 0..1000u32 {
        let s = common::random_state(&mut rng, &mdp);
        s.validate().unwrap();
        let (t1, t2) = (rng.next_f64() * 10.0, rng.next_f64() * 10.0);
        let two = mdp.advance(&mdp.advance(&s, t1), t2);
        let one = mdp.advance(&s, t1 + t2);
        let composed = two.route.vehicle_position.distance(&one.route.vehicle_position) < 1e-9
            && two.route.stops == one.route.stops
            && two.route.onboard == one.route.onboard
            && two.statuses == one.statuses
            && (two.time - one.time).abs() < 1e-12;
        let req = common::random_request(&mut rng, 10_000 + k, s.time);
        let back = mdp.transition_reject(&mdp.receive_request(&s, req).unwrap()).unwrap();
        let identity = back.route == s.route && back.time == s.time;
        if !(composed && identity) {
            failures += 1;
        }
    }
    report(
        "C8 transition laws",
        failures == 0,
        format!("{failures} violations of advance composition / reject identity in 1000 random states"),
    );
}

#[test]
fn c09_numerical_integration() {
    let mut rng = SplitMix64::new(99);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for seed in 0..25 {
        let s = generate_scenario(&ScenarioConfig { seed: 500 + seed, ..Default::default() }).unwrap();
        let target = TargetProfile::constant(3.0 + 4.0 * rng.next_f64()).unwrap();
        let tree = traverse(&s, &target).unwrap();
        let mdp = s.mdp();
        // Four post-decision states per scenario along random paths.
        for _ in 0..4 {
            let k = (rng.next_u64() % tree.horizon() as u64) as usize;
            let e = (rng.next_u64() % (2u64 << k)) as usize;
            let post = &tree.edges[k][e].post_state;
            let coarse = mdp.branch_reward_with(post, 4.0, &target, 16);
            let fine = mdp.branch_reward_with(post, 4.0, &target, 1024);
            worst = worst.max((coarse - fine).abs());
            count += 1;
        }
    }
    report(
        "C9 numerical integration",
        count == 100 && worst < 0.05,
        format!("max |r16 - r1024| = {worst:.5} min over {count} states (tol 0.05)"),
    );
}

#[test]
fn c10_expectations_match_monte_carlo() {
    let s = canonical_scenario();
    let target = TargetProfile::constant(5.0).unwrap();
    let (policy, tree) = e_dp(&s, &target).unwrap();
    let mdp = tree.mdp;
    let n = tree.horizon();
    let interval = tree.interval;

    // Probe times: the middle of every decision interval.
    let times: Vec<f64> = (0..n).map(|k| tree.first_decision_time() + (k as f64 + 0.5) * interval).collect();
    let analytic_curve = expected_ewt_curve(&tree, &policy, interval / 2.0);
    let analytic: Vec<f64> = times
        .iter()
        .map(|t| analytic_curve.iter().find(|p| (p.t - t).abs() < 1e-9).unwrap().ewt)
        .collect();
    // EWT at the probe time of level k on every edge of that level.
    let edge_ewt: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            tree.edges[k]
                .iter()
                .map(|e| mdp.estimate_ewt_route(&e.post_state.route.advance(interval / 2.0, &mdp.travel)))
                .collect()
        })
        .collect();
    let rates = expected_acceptance_rates(&tree, &policy);

    let samples = 100_000;
    let mut rng = SplitMix64::new(424242);
    let mut ewt_sum = vec![0.0; n];
    let mut ewt_sq = vec![0.0; n];
    let mut act_sum = vec![0.0; n];
    let mut act_sq = vec![0.0; n];
    for _ in 0..samples {
        let mut h = DecisionHistory::EMPTY;
        for k in 0..n {
            let a = policy.action(h);
            act_sum[k] += a;
            act_sq[k] += a * a;
            h = h.push(rng.next_f64() < a);
            let e = edge_ewt[k][h.index()];
            ewt_sum[k] += e;
            ewt_sq[k] += e * e;
        }
    }
    let within = |sum: f64, sq: f64, expected: f64| {
        let m = sum / samples as f64;
        let var = (sq / samples as f64 - m * m).max(0.0);
        let se = (var / samples as f64).sqrt();
        let z = if se > 0.0 { (m - expected).abs() / se } else if (m - expected).abs() < 1e-9 { 0.0 } else { f64::INFINITY };
        (z, z <= 3.0)
    };
    let mut max_z: f64 = 0.0;
    let mut all_ok = true;
    for k in 0..n {
        for (z, ok) in [
            within(ewt_sum[k], ewt_sq[k], analytic[k]),
            within(act_sum[k], act_sq[k], rates.per_passenger[k]),
        ] {
            max_z = max_z.max(z);
            all_ok &= ok;
        }
    }
    report(
        "C10 expectation oracles",
        all_ok,
        format!("max |MC - analytic| / SE = {max_z:.2} over {n} curve points and {n} acceptance rates (limit 3)"),
    );
}

#[test]
fn c11_cli_determinism() {
    let commands: [&[&str]; 4] = [
        &["simulate", "--target", "5"],
        &["sweep-target", "--target", "4,5,6"],
        &["time-varying", "--target", "4", "--switch", "20:6"],
        &["sweep-lookahead", "--target", "5", "--lookahead", "0..8"],
    ];
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for cmd in commands {
        let mut outputs: Vec<BTreeMap<String, Vec<u8>>> = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let mut args = vec!["ewt-reg"];
            args.extend_from_slice(cmd);
            let out = dir.path().to_str().unwrap().to_string();
            args.extend_from_slice(&["--out", &out]);
            execute(&Cli::parse_from(&args)).unwrap();
            let files = std::fs::read_dir(dir.path())
                .unwrap()
                .map(|e| e.unwrap())
                .filter(|e| !e.file_name().to_string_lossy().contains("timing"))
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
                .collect();
            outputs.push(files);
        }
        for (name, bytes) in &outputs[0] {
            compared += 1;
            if outputs[1].get(name) != Some(bytes) {
                mismatches.push(format!("{} {name}", cmd[0]));
            }
        }
        if outputs[0].len() != outputs[1].len() {
            mismatches.push(format!("{}: file sets differ", cmd[0]));
        }
    }
    report(
        "C11 determinism",
        mismatches.is_empty() && compared > 0,
        format!("{compared} output files byte-compared across two runs; mismatches: {mismatches:?}"),
    );
}

#[test]
fn backup_is_bellman_consistent_on_canonical_tree() {
    let s = canonical_scenario();
    let mut tree = traverse(&s, &TargetProfile::constant(5.0).unwrap()).unwrap();
    let (policy, root) = backward_induction(&mut tree);
    assert_eq!(evaluate_policy(&tree, &policy), root);
    let all_upper = Policy::from_fn(8, |h| tree.vertex(h).bounds.upper);
    let all_lower = Policy::from_fn(8, |h| tree.vertex(h).bounds.lower);
    assert!(root >= evaluate_policy(&tree, &all_upper));
    assert!(root >= evaluate_policy(&tree, &all_lower));
}
