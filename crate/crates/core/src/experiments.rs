//! The three regulation experiments and their CSV/JSON outputs.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical_json;
use crate::error::{Error, Result};
use crate::mdp::TargetProfile;
use crate::scenario::{Scenario, ScenarioConfig};
use crate::solver::{
    all_accept, average_deviation, backward_induction, expected_acceptance_rates, expected_ewt_curve,
    h_dp, path_deviation, path_ewt_curve, traverse, AcceptanceRates, EpisodeTree, Policy,
};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Sampling step of the reported curves, in minutes.
pub const CURVE_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Edp,
    Hdp(usize),
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Solver::Edp => f.write_str("edp"),
            Solver::Hdp(k) => write!(f, "hdp:{k}"),
        }
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "edp" {
            return Ok(Solver::Edp);
        }
        s.strip_prefix("hdp:")
            .and_then(|k| k.parse().ok())
            .map(Solver::Hdp)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown solver `{s}` (expected edp or hdp:K)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub code_version: String,
    pub command: String,
    pub solver: String,
    pub target_segments: Vec<(f64, f64)>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegulationPoint {
    pub t: f64,
    pub expected_ewt: f64,
    pub baseline_ewt: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub metadata: Metadata,
    /// Regulation and baseline curves on a shared grid.
    pub curve: Vec<RegulationPoint>,
    pub acceptance: AcceptanceRates,
    pub average_deviation: f64,
    pub baseline_deviation: f64,
    pub policy: std::collections::BTreeMap<String, f64>,
}

impl ExperimentResult {
    pub fn regulation_curve(&self) -> Vec<(f64, f64)> {
        self.curve.iter().map(|p| (p.t, p.expected_ewt)).collect()
    }

    pub fn baseline_curve(&self) -> Vec<(f64, f64)> {
        self.curve.iter().map(|p| (p.t, p.baseline_ewt)).collect()
    }
}

fn metadata(command: &str, scenario: &Scenario, target: &TargetProfile, solver: Solver) -> Metadata {
    Metadata {
        schema_version: RESULT_SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        solver: solver.to_string(),
        target_segments: target.segments().to_vec(),
        config: scenario.config.clone(),
    }
}

/// Solves the scenario and returns the full-horizon tree with the policy.
pub fn solve(scenario: &Scenario, target: &TargetProfile, solver: Solver) -> Result<(EpisodeTree, Policy)> {
    let mut tree = traverse(scenario, target)?;
    let policy = match solver {
        Solver::Edp => backward_induction(&mut tree).0,
        Solver::Hdp(k) => h_dp(scenario, k, target)?,
    };
    Ok((tree, policy))
}

/// Regulation run against `target`; the baseline is the all-accept path.
pub fn run_regulation(
    command: &str,
    scenario: &Scenario,
    target: &TargetProfile,
    solver: Solver,
) -> Result<ExperimentResult> {
    let (tree, policy) = solve(scenario, target, solver)?;
    let expected = expected_ewt_curve(&tree, &policy, CURVE_STEP);
    let baseline = path_ewt_curve(&tree, all_accept(&tree), CURVE_STEP);
    let curve = expected
        .iter()
        .zip(&baseline)
        .map(|(e, b)| RegulationPoint {
            t: e.t,
            expected_ewt: e.ewt,
            baseline_ewt: b.ewt,
            target: target.at(e.t),
        })
        .collect();
    Ok(ExperimentResult {
        metadata: metadata(command, scenario, target, solver),
        curve,
        acceptance: expected_acceptance_rates(&tree, &policy),
        average_deviation: average_deviation(&tree, &policy),
        baseline_deviation: path_deviation(&tree, all_accept(&tree)),
        policy: policy.export(),
    })
}

pub fn simulate(scenario: &Scenario, target: &TargetProfile, solver: Solver) -> Result<ExperimentResult> {
    run_regulation("simulate", scenario, target, solver)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSweepRow {
    pub target: f64,
    pub mean_acceptance: f64,
    pub average_deviation: f64,
    pub baseline_deviation: f64,
}

pub fn sweep_target(
    scenario: &Scenario,
    targets: &[f64],
    solver: Solver,
) -> Result<(Vec<ExperimentResult>, Vec<TargetSweepRow>)> {
    if targets.len() < 2 {
        return Err(Error::InvalidConfig("sweep-target needs at least two targets".into()));
    }
    let mut results = Vec::with_capacity(targets.len());
    let mut rows = Vec::with_capacity(targets.len());
    for &t in targets {
        let profile = TargetProfile::constant(t)?;
        let r = run_regulation("sweep-target", scenario, &profile, solver)?;
        rows.push(TargetSweepRow {
            target: t,
            mean_acceptance: r.acceptance.mean,
            average_deviation: r.average_deviation,
            baseline_deviation: r.baseline_deviation,
        });
        results.push(r);
    }
    Ok((results, rows))
}

pub fn time_varying(scenario: &Scenario, profile: &TargetProfile, solver: Solver) -> Result<ExperimentResult> {
    if profile.segments().len() < 2 {
        return Err(Error::InvalidConfig("time-varying needs at least two target segments".into()));
    }
    run_regulation("time-varying", scenario, profile, solver)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LookaheadRow {
    pub lookahead: usize,
    pub average_deviation: f64,
    pub mean_acceptance: f64,
    /// Seconds on a monotonic clock; excluded from reproducibility checks.
    pub wall_time: f64,
}

/// Receding-horizon solve for every lookahead in `range`, evaluated on the
/// full-horizon tree.
pub fn sweep_lookahead(
    scenario: &Scenario,
    target: &TargetProfile,
    range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<LookaheadRow>> {
    let n = scenario.horizon();
    if *range.end() > n || range.is_empty() {
        return Err(Error::LookaheadOutOfRange { lookahead: *range.end(), horizon: n });
    }
    let tree = traverse(scenario, target)?;
    range
        .map(|k| {
            let start = Instant::now();
            let policy = h_dp(scenario, k, target)?;
            let wall_time = start.elapsed().as_secs_f64();
            Ok(LookaheadRow {
                lookahead: k,
                average_deviation: average_deviation(&tree, &policy),
                mean_acceptance: expected_acceptance_rates(&tree, &policy).mean,
                wall_time,
            })
        })
        .collect()
}

/// Formats with 9 significant digits in plain decimal notation.
pub fn fmt_sig9(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".to_string()
    } else {
        format!("{rounded}")
    }
}

fn csv_preamble(meta: &impl Serialize) -> Result<String> {
    Ok(format!("# {}\n", serde_json::to_string(&crate::canonical::to_canonical_value(meta)?)?))
}

/// `t,expected_ewt,baseline_ewt,target`, preceded by one `#` line carrying the
/// run metadata.
pub fn regulation_csv(result: &ExperimentResult) -> Result<String> {
    let mut out = csv_preamble(&result.metadata)?;
    out.push_str("t,expected_ewt,baseline_ewt,target\n");
    for p in &result.curve {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig9(p.t),
            fmt_sig9(p.expected_ewt),
            fmt_sig9(p.baseline_ewt),
            fmt_sig9(p.target)
        ));
    }
    Ok(out)
}

pub fn target_sweep_csv(meta: &Metadata, rows: &[TargetSweepRow]) -> Result<String> {
    let mut out = csv_preamble(meta)?;
    out.push_str("target,mean_acceptance,average_deviation,baseline_deviation\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig9(r.target),
            fmt_sig9(r.mean_acceptance),
            fmt_sig9(r.average_deviation),
            fmt_sig9(r.baseline_deviation)
        ));
    }
    Ok(out)
}

/// Deterministic part of the lookahead sweep: `lookahead,average_deviation,mean_acceptance`.
pub fn lookahead_csv(meta: &Metadata, rows: &[LookaheadRow]) -> Result<String> {
    let mut out = csv_preamble(meta)?;
    out.push_str("lookahead,average_deviation,mean_acceptance\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.lookahead,
            fmt_sig9(r.average_deviation),
            fmt_sig9(r.mean_acceptance)
        ));
    }
    Ok(out)
}

/// Timing side table: `lookahead,wall_time_s`.
pub fn lookahead_timing_csv(meta: &Metadata, rows: &[LookaheadRow]) -> Result<String> {
    let mut out = csv_preamble(meta)?;
    out.push_str("lookahead,wall_time_s\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.lookahead, fmt_sig9(r.wall_time)));
    }
    Ok(out)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Writes `<stem>.csv` and `<stem>.json`.
pub fn write_experiment(dir: &Path, stem: &str, result: &ExperimentResult) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write(dir, &format!("{stem}.csv"), &regulation_csv(result)?)?,
        write(dir, &format!("{stem}.json"), &to_canonical_json(result)?)?,
    ])
}

pub fn write_target_sweep(
    dir: &Path,
    scenario: &Scenario,
    solver: Solver,
    results: &[ExperimentResult],
    rows: &[TargetSweepRow],
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for r in results {
        let t = r.metadata.target_segments[0].1;
        written.extend(write_experiment(dir, &format!("target_{}", fmt_sig9(t)), r)?);
    }
    let segments = rows.iter().map(|r| (0.0, r.target)).collect();
    let meta = Metadata {
        target_segments: segments,
        ..metadata("sweep-target", scenario, &TargetProfile::constant(1.0)?, solver)
    };
    written.push(write(dir, "sweep_target.csv", &target_sweep_csv(&meta, rows)?)?);
    Ok(written)
}

pub fn write_lookahead_sweep(
    dir: &Path,
    scenario: &Scenario,
    target: &TargetProfile,
    rows: &[LookaheadRow],
) -> Result<Vec<PathBuf>> {
    let meta = metadata("sweep-lookahead", scenario, target, Solver::Edp);
    let meta = Metadata { solver: "hdp".into(), ..meta };
    #[derive(Serialize)]
    struct Summary<'a> {
        metadata: &'a Metadata,
        rows: Vec<(usize, f64, f64)>,
    }
    let summary = Summary {
        metadata: &meta,
        rows: rows.iter().map(|r| (r.lookahead, r.average_deviation, r.mean_acceptance)).collect(),
    };
    Ok(vec![
        write(dir, "sweep_lookahead.csv", &lookahead_csv(&meta, rows)?)?,
        write(dir, "sweep_lookahead.json", &to_canonical_json(&summary)?)?,
        write(dir, "sweep_lookahead_timing.csv", &lookahead_timing_csv(&meta, rows)?)?,
    ])
}
