//! States, transitions, the corner-probe waiting-time estimate, the per-branch
//! regulation reward and the admissible action interval.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::routing::{Location, PassengerId, Route, StopKind, TravelModel};

/// Passenger id reserved for hypothetical probe requests.
pub const PROBE_PASSENGER: PassengerId = PassengerId(u32::MAX);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RideRequest {
    pub passenger: PassengerId,
    pub origin: Location,
    pub destination: Location,
    /// Minutes since the start of the episode.
    pub issue_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassengerStatus {
    Waiting,
    Onboard,
    Completed,
    Rejected,
}

/// Snapshot of the single-vehicle environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub time: f64,
    pub route: Route,
    pub statuses: BTreeMap<PassengerId, PassengerStatus>,
    pub pending_request: Option<RideRequest>,
}

impl SystemState {
    pub fn new(route: Route) -> Self {
        Self {
            time: 0.0,
            route,
            statuses: BTreeMap::new(),
            pending_request: None,
        }
    }

    /// Statuses agree with the route: waiting iff a pickup is pending,
    /// onboard iff in the vehicle.
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.route.validate()?;
        for (&p, status) in &self.statuses {
            let pending = self.route.has_pending_pickup(p);
            let onboard = self.route.onboard.contains(&p);
            let ok = match status {
                PassengerStatus::Waiting => pending && !onboard,
                PassengerStatus::Onboard => onboard && !pending,
                PassengerStatus::Completed | PassengerStatus::Rejected => !self.route.contains(p),
            };
            if !ok {
                return Err(format!("{p} is {status:?} but route disagrees"));
            }
        }
        for stop in &self.route.stops {
            if stop.kind == StopKind::Pickup
                && self.statuses.get(&stop.passenger) != Some(&PassengerStatus::Waiting)
            {
                return Err(format!("{} has a pickup but is not waiting", stop.passenger));
            }
        }
        Ok(())
    }
}

/// Admissible interval for the desired probability of acceptance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionBounds {
    pub lower: f64,
    pub upper: f64,
}

impl ActionBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0 < lower && lower < upper && upper < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "action bounds must satisfy 0 < lower < upper < 1, got ({lower}, {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, a: f64) -> bool {
        self.lower <= a && a <= self.upper
    }
}

/// Bounds when the shared ride is competitive with the alternative.
pub const FAVOURABLE_BOUNDS: ActionBounds = ActionBounds { lower: 0.5, upper: 0.9 };
/// Bounds when the shared ride is much slower than the alternative.
pub const UNFAVOURABLE_BOUNDS: ActionBounds = ActionBounds { lower: 0.2, upper: 0.6 };
/// Largest admissible ratio of shared to alternative total travel time for
/// the favourable bounds (inclusive).
pub const BOUNDS_RATIO_THRESHOLD: f64 = 1.5;
/// Waiting time of the exclusive alternative, as a fraction of the target.
pub const ALTERNATIVE_WAIT_FACTOR: f64 = 2.0 / 3.0;

/// Picks the action interval from the two total travel times.
pub fn select_bounds(shared_total: f64, alternative_total: f64) -> ActionBounds {
    if shared_total <= BOUNDS_RATIO_THRESHOLD * alternative_total {
        FAVOURABLE_BOUNDS
    } else {
        UNFAVOURABLE_BOUNDS
    }
}

/// Piecewise-constant target waiting time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetProfile {
    segments: Vec<(f64, f64)>,
}

impl TargetProfile {
    /// Segments are `(start_time, target)` pairs; the first must start at 0.
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("target profile: {msg}")));
        match segments.first() {
            None => return bad("no segments"),
            Some(&(start, _)) if start != 0.0 => return bad("first segment must start at 0"),
            _ => {}
        }
        if segments.windows(2).any(|w| w[1].0 <= w[0].0) {
            return bad("start times must be strictly increasing");
        }
        if segments.iter().any(|&(s, t)| !(s.is_finite() && t.is_finite() && t > 0.0)) {
            return bad("targets must be finite and positive");
        }
        Ok(Self { segments })
    }

    pub fn constant(target: f64) -> Result<Self> {
        Self::new(vec![(0.0, target)])
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    /// Target in force at absolute time `t`.
    pub fn at(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|&(start, _)| start <= t);
        self.segments[idx.saturating_sub(1)].1
    }
}

/// Perceived utilities of the competing options.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceUtilities(Vec<f64>);

impl ChoiceUtilities {
    pub fn new(utilities: Vec<f64>) -> Result<Self> {
        if utilities.is_empty() || utilities.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidConfig("utilities must be non-empty and finite".into()));
        }
        Ok(Self(utilities))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Logit probability of choosing option `index` (0-based).
pub fn choice_probability(u: &ChoiceUtilities, index: usize) -> Result<f64> {
    let us = &u.0;
    if index >= us.len() {
        return Err(Error::IndexOutOfRange { index, len: us.len() });
    }
    let max = us.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = us.iter().map(|x| (x - max).exp()).sum();
    Ok((us[index] - max).exp() / denom)
}

/// Parameters shared by every transition and reward evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mdp {
    pub travel: TravelModel,
    /// Side of the square service area; probes sit at its corners.
    pub square_side: f64,
    /// Midpoint-rule samples per inter-request interval.
    pub reward_samples: usize,
    pub discount: f64,
}

impl Default for Mdp {
    fn default() -> Self {
        Self {
            travel: TravelModel::default(),
            square_side: 1.0,
            reward_samples: 16,
            discount: 1.0,
        }
    }
}

impl Mdp {
    /// Internal dynamics: vehicle motion and the status changes it causes.
    pub fn advance(&self, s: &SystemState, minutes: f64) -> SystemState {
        let route = s.route.advance(minutes, &self.travel);
        let mut statuses = s.statuses.clone();
        for (p, status) in statuses.iter_mut() {
            if matches!(status, PassengerStatus::Waiting | PassengerStatus::Onboard) {
                *status = if route.has_pending_pickup(*p) {
                    PassengerStatus::Waiting
                } else if route.onboard.contains(p) {
                    PassengerStatus::Onboard
                } else {
                    PassengerStatus::Completed
                };
            }
        }
        SystemState {
            time: s.time + minutes,
            route,
            statuses,
            pending_request: s.pending_request,
        }
    }

    pub fn receive_request(&self, s: &SystemState, req: RideRequest) -> Result<SystemState> {
        if s.pending_request.is_some() {
            return Err(Error::RequestAlreadyPending);
        }
        if req.issue_time != s.time {
            return Err(Error::TimeMismatch { issue_time: req.issue_time, state_time: s.time });
        }
        Ok(SystemState { pending_request: Some(req), ..s.clone() })
    }

    /// The passenger accepts: the request is routed into the vehicle's plan.
    pub fn transition_accept(&self, s: &SystemState) -> Result<SystemState> {
        let req = s.pending_request.ok_or(Error::NoPendingRequest)?;
        let route = s.route.insert_request(&req, &self.travel)?;
        let mut statuses = s.statuses.clone();
        statuses.insert(req.passenger, PassengerStatus::Waiting);
        Ok(SystemState { time: s.time, route, statuses, pending_request: None })
    }

    /// The passenger declines: the route is left as it was before the request.
    pub fn transition_reject(&self, s: &SystemState) -> Result<SystemState> {
        let req = s.pending_request.ok_or(Error::NoPendingRequest)?;
        let mut statuses = s.statuses.clone();
        statuses.insert(req.passenger, PassengerStatus::Rejected);
        Ok(SystemState {
            time: s.time,
            route: s.route.clone(),
            statuses,
            pending_request: None,
        })
    }

    /// Decision followed by one interval of internal dynamics and the arrival
    /// of the next request (if any).
    pub fn step(
        &self,
        s: &SystemState,
        accept: bool,
        interval: f64,
        next: Option<RideRequest>,
    ) -> Result<SystemState> {
        let post = if accept { self.transition_accept(s)? } else { self.transition_reject(s)? };
        let moved = self.advance(&post, interval);
        match next {
            Some(req) => self.receive_request(&moved, req),
            None => Ok(moved),
        }
    }

    /// Pickup locations of the four probe requests.
    pub fn probe_corners(&self) -> [Location; 4] {
        let l = self.square_side;
        [
            Location::new(0.0, 0.0),
            Location::new(0.0, l),
            Location::new(l, 0.0),
            Location::new(l, l),
        ]
    }

    pub fn probe_dropoff(&self) -> Location {
        Location::new(0.5 * self.square_side, 0.5 * self.square_side)
    }

    /// Estimated waiting time: mean pickup time of four hypothetical requests
    /// from the square's corners to its center, each inserted into a copy of
    /// the current route.
    pub fn estimate_ewt(&self, s: &SystemState) -> f64 {
        self.estimate_ewt_route(&s.route)
    }

    pub fn estimate_ewt_route(&self, route: &Route) -> f64 {
        let dropoff = self.probe_dropoff();
        let total: f64 = self
            .probe_corners()
            .iter()
            .map(|corner| {
                let probe = route
                    .insert_trip(PROBE_PASSENGER, *corner, dropoff, &self.travel)
                    .expect("appending a probe at the end of a feasible route is always feasible");
                probe
                    .pickup_time(PROBE_PASSENGER, &self.travel)
                    .expect("probe pickup was just inserted")
            })
            .sum();
        total / 4.0
    }

    /// Regulation reward of one interval after a decision:
    /// `-(1/interval) * integral |EWT(t) - target(t)| dt`, midpoint rule with
    /// `samples` points. Always `<= 0`.
    pub fn branch_reward_with(
        &self,
        post: &SystemState,
        interval: f64,
        target: &TargetProfile,
        samples: usize,
    ) -> f64 {
        let samples = samples.max(1);
        let delta = interval / samples as f64;
        let mut acc = 0.0;
        for i in 0..samples {
            let tau = (i as f64 + 0.5) * delta;
            let route = post.route.advance(tau, &self.travel);
            let ewt = self.estimate_ewt_route(&route);
            acc += (ewt - target.at(post.time + tau)).abs() * delta;
        }
        -acc / interval
    }

    pub fn branch_reward(&self, post: &SystemState, interval: f64, target: &TargetProfile) -> f64 {
        self.branch_reward_with(post, interval, target, self.reward_samples)
    }

    /// Shared total travel time (wait + ride) of the pending passenger under
    /// the accept branch, and that of the exclusive alternative.
    pub fn travel_comparison(&self, s: &SystemState, target_now: f64) -> Result<(f64, f64)> {
        let req = s.pending_request.ok_or(Error::NoPendingRequest)?;
        let accepted = s.route.insert_request(&req, &self.travel)?;
        let shared = accepted.dropoff_time(req.passenger, &self.travel)?;
        let alternative = ALTERNATIVE_WAIT_FACTOR * target_now
            + self.travel.travel_time(&req.origin, &req.destination);
        Ok((shared, alternative))
    }

    pub fn action_bounds(&self, s: &SystemState, target_now: f64) -> Result<ActionBounds> {
        let (shared, alternative) = self.travel_comparison(s, target_now)?;
        Ok(select_bounds(shared, alternative))
    }
}
