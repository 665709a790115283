//! Argument parsing and dispatch for the `ewt-reg` binary.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{self, Solver};
use crate::mdp::TargetProfile;
use crate::scenario::{generate_scenario, Scenario, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Regulates the estimated waiting time of a shared-mobility vehicle by
/// choosing the desired acceptance probability of each ride request.
///
/// Curves are written as CSV with columns
/// `t,expected_ewt,baseline_ewt,target` (minutes); summaries as JSON. Every
/// CSV starts with one `#` line holding the run metadata as JSON.
#[derive(Debug, Parser)]
#[command(name = "ewt-reg", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regulate around a constant target; writes simulate.csv/json.
    Simulate(Common),
    /// One run per target; writes target_<T>.csv/json and sweep_target.csv
    /// (`target,mean_acceptance,average_deviation,baseline_deviation`).
    SweepTarget(Common),
    /// Regulate around a piecewise-constant target built from --target and
    /// --switch; writes time_varying.csv/json.
    TimeVarying(Common),
    /// Receding-horizon solves over a lookahead range; writes
    /// sweep_lookahead.csv (`lookahead,average_deviation,mean_acceptance`),
    /// sweep_lookahead.json and sweep_lookahead_timing.csv.
    SweepLookahead(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file with (a subset of) the scenario configuration.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Complete scenario JSON; overrides --config.
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    /// Override the generator seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Target waiting time(s) in minutes, comma separated.
    #[arg(long, value_name = "MIN[,MIN...]", value_delimiter = ',')]
    pub target: Vec<f64>,
    /// Target switch `T:MIN` (time-varying only); repeatable.
    #[arg(long = "switch", value_name = "T:MIN")]
    pub switches: Vec<String>,
    /// Lookahead range `A..B` (inclusive).
    #[arg(long, value_name = "A..B")]
    pub lookahead: Option<String>,
    /// `edp` or `hdp:K`.
    #[arg(long, default_value = "edp")]
    pub solver: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        if let Some(path) = &self.scenario {
            let mut s = Scenario::from_json(&fs::read_to_string(path)?)?;
            if let Some(seed) = self.seed {
                s.config.seed = seed;
                s = generate_scenario(&s.config)?;
            }
            return Ok(s);
        }
        let mut config = match &self.config {
            Some(path) => serde_json::from_str::<ScenarioConfig>(&fs::read_to_string(path)?)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        generate_scenario(&config)
    }

    fn solver(&self) -> Result<Solver> {
        self.solver.parse()
    }

    fn single_target(&self, default: f64) -> Result<TargetProfile> {
        match self.target.as_slice() {
            [] => TargetProfile::constant(default),
            [t] => TargetProfile::constant(*t),
            _ => Err(Error::InvalidConfig("expected a single --target".into())),
        }
    }

    fn profile(&self) -> Result<TargetProfile> {
        let (first, switches) = if self.target.is_empty() && self.switches.is_empty() {
            (4.0, vec!["20:6".to_string()])
        } else {
            (self.single_target(4.0)?.at(0.0), self.switches.clone())
        };
        let mut segments = vec![(0.0, first)];
        for s in &switches {
            segments.push(parse_switch(s)?);
        }
        TargetProfile::new(segments)
    }

    fn lookahead_range(&self, horizon: usize) -> Result<std::ops::RangeInclusive<usize>> {
        match &self.lookahead {
            None => Ok(0..=horizon),
            Some(text) => parse_range(text),
        }
    }
}

pub fn parse_switch(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidConfig(format!("bad --switch `{text}` (expected T:MIN)"));
    let (t, m) = text.split_once(':').ok_or_else(bad)?;
    Ok((t.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?))
}

pub fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::InvalidConfig(format!("bad --lookahead `{text}` (expected A..B)"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::LookaheadOutOfRange { .. }
        | Error::IndexOutOfRange { .. } => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

/// Runs one command and returns the summary lines printed on success.
pub fn execute(cli: &Cli) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    let mut report = |paths: Vec<PathBuf>| {
        for p in paths {
            lines.push(format!("wrote {}", p.display()));
        }
    };
    match &cli.command {
        Command::Simulate(c) => {
            let scenario = c.scenario()?;
            let r = experiments::simulate(&scenario, &c.single_target(5.0)?, c.solver()?)?;
            report(write_scenario(c, &scenario)?);
            report(experiments::write_experiment(&c.out, "simulate", &r)?);
            lines.push(summary_line(&r));
        }
        Command::SweepTarget(c) => {
            let scenario = c.scenario()?;
            let targets = if c.target.is_empty() { vec![4.0, 5.0, 6.0] } else { c.target.clone() };
            let solver = c.solver()?;
            let (results, rows) = experiments::sweep_target(&scenario, &targets, solver)?;
            report(write_scenario(c, &scenario)?);
            report(experiments::write_target_sweep(&c.out, &scenario, solver, &results, &rows)?);
            for r in &results {
                lines.push(summary_line(r));
            }
        }
        Command::TimeVarying(c) => {
            let scenario = c.scenario()?;
            let r = experiments::time_varying(&scenario, &c.profile()?, c.solver()?)?;
            report(write_scenario(c, &scenario)?);
            report(experiments::write_experiment(&c.out, "time_varying", &r)?);
            lines.push(summary_line(&r));
        }
        Command::SweepLookahead(c) => {
            let scenario = c.scenario()?;
            let target = c.single_target(5.0)?;
            let rows = experiments::sweep_lookahead(&scenario, &target, c.lookahead_range(scenario.horizon())?)?;
            report(write_scenario(c, &scenario)?);
            report(experiments::write_lookahead_sweep(&c.out, &scenario, &target, &rows)?);
            for r in &rows {
                lines.push(format!(
                    "lookahead {}: deviation {} min, mean acceptance {}, {:.3}s",
                    r.lookahead,
                    experiments::fmt_sig9(r.average_deviation),
                    experiments::fmt_sig9(r.mean_acceptance),
                    r.wall_time
                ));
            }
        }
    }
    Ok(lines)
}

fn write_scenario(c: &Common, scenario: &Scenario) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&c.out)?;
    let path = c.out.join("scenario.json");
    fs::write(&path, scenario.to_json()? + "\n")?;
    Ok(vec![path])
}

fn summary_line(r: &experiments::ExperimentResult) -> String {
    format!(
        "{} target {:?}: deviation {} min (baseline {}), mean acceptance {}",
        r.metadata.solver,
        r.metadata.target_segments,
        experiments::fmt_sig9(r.average_deviation),
        experiments::fmt_sig9(r.baseline_deviation),
        experiments::fmt_sig9(r.acceptance.mean)
    )
}

/// Parses `args` (including the program name), runs the command, prints the
/// outcome and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switch_and_range_parsing() {
        assert_eq!(parse_switch("20:6").unwrap(), (20.0, 6.0));
        assert!(parse_switch("20-6").is_err());
        assert_eq!(parse_range("0..8").unwrap(), 0..=8);
        assert_eq!(parse_range("2..=3").unwrap(), 2..=3);
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn default_time_varying_profile() {
        let cli = Cli::try_parse_from(["ewt-reg", "time-varying"]).unwrap();
        let Command::TimeVarying(c) = cli.command else { panic!() };
        assert_eq!(c.profile().unwrap().segments(), &[(0.0, 4.0), (20.0, 6.0)]);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["ewt-reg", "bogus"]), EXIT_CONFIG);
        assert_eq!(run(["ewt-reg", "simulate", "--solver", "nope", "--out", "/nonexistent/x"]), EXIT_CONFIG);
    }
}
