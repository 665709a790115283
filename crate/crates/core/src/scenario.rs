//! Scenario synthesis: seeded uniform requests on a square service area.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Mdp, RideRequest, SystemState};
use crate::rng::SplitMix64;
use crate::routing::{Location, PassengerId, Route, TravelModel};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Seed behind every canonical result and golden file.
pub const CANONICAL_SEED: u64 = 2019;

/// Origin/destination pairs closer than this (miles) are redrawn.
pub const MIN_TRIP_DISTANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Requests at t = 0 that are always accepted.
    pub n_initial: usize,
    /// Decision-bearing requests, one per interval.
    pub n_sequential: usize,
    /// Minutes between consecutive requests.
    pub interval: f64,
    pub square_side: f64,
    pub capacity: usize,
    /// Miles per minute.
    pub speed: f64,
    pub seed: u64,
    pub reward_samples: usize,
    pub discount: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_initial: 4,
            n_sequential: 8,
            interval: 4.0,
            square_side: 1.0,
            capacity: 6,
            speed: 0.25,
            seed: CANONICAL_SEED,
            reward_samples: 16,
            discount: 1.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if !(self.interval.is_finite() && self.interval > 0.0) {
            return fail(format!("interval must be positive, got {}", self.interval));
        }
        if !(self.square_side.is_finite() && self.square_side > 0.0) {
            return fail(format!("square_side must be positive, got {}", self.square_side));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return fail(format!("speed must be positive, got {}", self.speed));
        }
        if self.capacity == 0 {
            return fail("capacity must be at least 1".into());
        }
        if self.reward_samples == 0 {
            return fail("reward_samples must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return fail(format!("discount must lie in [0, 1], got {}", self.discount));
        }
        if self.n_sequential > 20 {
            return fail(format!("n_sequential {} too large for exact enumeration", self.n_sequential));
        }
        if self.square_side < MIN_TRIP_DISTANCE {
            return fail("square too small for the minimum trip distance".into());
        }
        Ok(())
    }

    pub fn mdp(&self) -> Mdp {
        Mdp {
            travel: TravelModel { speed: self.speed },
            square_side: self.square_side,
            reward_samples: self.reward_samples,
            discount: self.discount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    pub initial_requests: Vec<RideRequest>,
    pub sequential_requests: Vec<RideRequest>,
}

/// Draws every request from a [`SplitMix64`] stream seeded with
/// `config.seed`. Each request consumes four floats in the order origin x,
/// origin y, destination x, destination y, scaled by the square side; a pair
/// closer than [`MIN_TRIP_DISTANCE`] is discarded and all four redrawn.
/// Initial requests come first (ids `0..n_initial`, issued at t = 0), then the
/// sequential ones (issued at `k * interval`, k = 1..=N).
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = SplitMix64::new(config.seed);
    let side = config.square_side;
    let mut draw = |id: u32, t: f64| loop {
        let origin = Location::new(rng.next_f64() * side, rng.next_f64() * side);
        let destination = Location::new(rng.next_f64() * side, rng.next_f64() * side);
        if origin.distance(&destination) >= MIN_TRIP_DISTANCE {
            return RideRequest { passenger: PassengerId(id), origin, destination, issue_time: t };
        }
    };
    let initial_requests = (0..config.n_initial).map(|i| draw(i as u32, 0.0)).collect();
    let sequential_requests = (1..=config.n_sequential)
        .map(|k| draw((config.n_initial + k - 1) as u32, k as f64 * config.interval))
        .collect();
    Ok(Scenario {
        schema_version: SCENARIO_SCHEMA_VERSION,
        config: config.clone(),
        initial_requests,
        sequential_requests,
    })
}

/// Default configuration with [`CANONICAL_SEED`]: one vehicle of capacity 6,
/// four initial and eight sequential requests four minutes apart on the unit
/// square.
pub fn canonical_scenario() -> Scenario {
    generate_scenario(&ScenarioConfig::default()).expect("default config is valid")
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.sequential_requests.len()
    }

    /// Episode length: the interval before the first decision plus one per
    /// decision.
    pub fn episode_length(&self) -> f64 {
        (self.horizon() + 1) as f64 * self.config.interval
    }

    pub fn mdp(&self) -> Mdp {
        self.config.mdp()
    }

    /// Vehicle parked at the square's center with the initial passengers
    /// committed by sequential cheapest insertion, in request order.
    pub fn initial_state(&self) -> Result<SystemState> {
        let mdp = self.mdp();
        let c = 0.5 * self.config.square_side;
        let mut s = SystemState::new(Route::new(Location::new(c, c), self.config.capacity));
        for req in &self.initial_requests {
            s = mdp.receive_request(&s, *req)?;
            s = mdp.transition_accept(&s)?;
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported scenario schema version {}",
                self.schema_version
            )));
        }
        self.config.validate()?;
        if self.initial_requests.iter().any(|r| r.issue_time != 0.0) {
            return Err(Error::InvalidConfig("initial requests must be issued at t = 0".into()));
        }
        for (k, r) in self.sequential_requests.iter().enumerate() {
            let expected = (k + 1) as f64 * self.config.interval;
            if (r.issue_time - expected).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "sequential request {k} issued at {} instead of {expected}",
                    r.issue_time
                )));
            }
        }
        let all = || self.initial_requests.iter().chain(&self.sequential_requests);
        if all().any(|r| r.origin == r.destination) {
            return Err(Error::InvalidConfig("request origin equals destination".into()));
        }
        let mut ids: Vec<_> = all().map(|r| r.passenger).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != self.initial_requests.len() + self.sequential_requests.len() {
            return Err(Error::InvalidConfig("duplicate passenger ids".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}
