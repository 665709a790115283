//! Single-vehicle routing: Euclidean travel model, stop sequences, cheapest
//! pickup/dropoff insertion and exact event-driven advancement.
//!
//! Every operation is pure; a new [`Route`] is returned and the input is left
//! untouched.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Remaining-time slack below which a stop counts as reached.
const ARRIVAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Location) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn lerp(&self, to: &Location, frac: f64) -> Location {
        Location::new(
            self.x + (to.x - self.x) * frac,
            self.y + (to.y - self.y) * frac,
        )
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct PassengerId(pub u32);

impl fmt::Display for PassengerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopKind {
    Pickup,
    Dropoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub kind: StopKind,
    pub passenger: PassengerId,
    pub location: Location,
}

impl Stop {
    pub fn pickup(passenger: PassengerId, location: Location) -> Self {
        Self { kind: StopKind::Pickup, passenger, location }
    }

    pub fn dropoff(passenger: PassengerId, location: Location) -> Self {
        Self { kind: StopKind::Dropoff, passenger, location }
    }
}

/// Straight-line travel at constant speed (miles per minute).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelModel {
    pub speed: f64,
}

impl Default for TravelModel {
    fn default() -> Self {
        // 15 mph
        Self { speed: 0.25 }
    }
}

impl TravelModel {
    pub fn new(speed: f64) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(Error::InvalidConfig(format!("speed must be positive, got {speed}")));
        }
        Ok(Self { speed })
    }

    /// Travel time in minutes between two locations.
    pub fn travel_time(&self, a: &Location, b: &Location) -> f64 {
        a.distance(b) / self.speed
    }
}

/// A vehicle's committed plan: where it is now, what it still has to visit and
/// who is on board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub vehicle_position: Location,
    pub stops: Vec<Stop>,
    pub onboard: BTreeSet<PassengerId>,
    pub capacity: usize,
}

impl Route {
    pub fn new(vehicle_position: Location, capacity: usize) -> Self {
        Self {
            vehicle_position,
            stops: Vec::new(),
            onboard: BTreeSet::new(),
            capacity,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.stops.is_empty()
    }

    /// True if the passenger is onboard or has any stop left in the route.
    pub fn contains(&self, passenger: PassengerId) -> bool {
        self.onboard.contains(&passenger) || self.stops.iter().any(|s| s.passenger == passenger)
    }

    pub fn has_pending_pickup(&self, passenger: PassengerId) -> bool {
        self.stops
            .iter()
            .any(|s| s.passenger == passenger && s.kind == StopKind::Pickup)
    }

    /// Load after executing each prefix of the stop list; entry `k` is the
    /// load after the first `k` stops, so the vector has `stops.len() + 1`
    /// entries.
    pub fn prefix_loads(&self) -> Vec<usize> {
        let mut loads = Vec::with_capacity(self.stops.len() + 1);
        let mut load = self.onboard.len() as i64;
        loads.push(load.max(0) as usize);
        for stop in &self.stops {
            match stop.kind {
                StopKind::Pickup => load += 1,
                StopKind::Dropoff => load -= 1,
            }
            loads.push(load.max(0) as usize);
        }
        loads
    }

    /// Elapsed time at which each stop is executed, assuming no further
    /// route changes.
    pub fn arrival_times(&self, model: &TravelModel) -> Vec<f64> {
        let mut at = self.vehicle_position;
        let mut t = 0.0;
        self.stops
            .iter()
            .map(|s| {
                t += model.travel_time(&at, &s.location);
                at = s.location;
                t
            })
            .collect()
    }

    /// Time until the last stop is executed (0 for an idle vehicle).
    pub fn completion_time(&self, model: &TravelModel) -> f64 {
        self.arrival_times(model).last().copied().unwrap_or(0.0)
    }

    /// Time until the given passenger is picked up.
    pub fn pickup_time(&self, passenger: PassengerId, model: &TravelModel) -> Result<f64> {
        self.stop_time(passenger, StopKind::Pickup, model)
    }

    /// Time until the given passenger is dropped off.
    pub fn dropoff_time(&self, passenger: PassengerId, model: &TravelModel) -> Result<f64> {
        self.stop_time(passenger, StopKind::Dropoff, model)
    }

    fn stop_time(&self, passenger: PassengerId, kind: StopKind, model: &TravelModel) -> Result<f64> {
        let idx = self
            .stops
            .iter()
            .position(|s| s.passenger == passenger && s.kind == kind)
            .ok_or(Error::NotInRoute(passenger))?;
        let mut at = self.vehicle_position;
        let mut t = 0.0;
        for s in &self.stops[..=idx] {
            t += model.travel_time(&at, &s.location);
            at = s.location;
        }
        Ok(t)
    }

    /// Cheapest insertion of a pickup/dropoff pair.
    ///
    /// Tries every pair of positions (pickup before dropoff) that keeps the
    /// load within capacity at every prefix and keeps the existing stop order,
    /// and returns the route with minimum completion time. Ties go to the
    /// lowest pickup index, then the lowest dropoff index.
    pub fn insert_trip(
        &self,
        passenger: PassengerId,
        origin: Location,
        destination: Location,
        model: &TravelModel,
    ) -> Result<Route> {
        if self.contains(passenger) {
            return Err(Error::DuplicatePassenger(passenger));
        }
        let (i, j) = self
            .best_insertion(&origin, &destination, model)
            .ok_or(Error::InfeasibleInsertion(passenger))?;
        Ok(self.with_insertion(passenger, origin, destination, i, j))
    }

    /// [`Route::insert_trip`] for a ride request.
    pub fn insert_request(&self, req: &crate::mdp::RideRequest, model: &TravelModel) -> Result<Route> {
        self.insert_trip(req.passenger, req.origin, req.destination, model)
    }

    /// Builds the route with the pickup placed before existing stop `i` and
    /// the dropoff before existing stop `j` (`i <= j`, both in `0..=len`).
    pub fn with_insertion(
        &self,
        passenger: PassengerId,
        origin: Location,
        destination: Location,
        i: usize,
        j: usize,
    ) -> Route {
        debug_assert!(i <= j && j <= self.stops.len());
        let mut stops = Vec::with_capacity(self.stops.len() + 2);
        stops.extend_from_slice(&self.stops[..i]);
        stops.push(Stop::pickup(passenger, origin));
        stops.extend_from_slice(&self.stops[i..j]);
        stops.push(Stop::dropoff(passenger, destination));
        stops.extend_from_slice(&self.stops[j..]);
        Route { stops, ..self.clone() }
    }

    /// Position pair `(i, j)` chosen by [`Route::insert_trip`], or `None` if
    /// no pair is capacity-feasible.
    pub fn best_insertion(
        &self,
        origin: &Location,
        destination: &Location,
        model: &TravelModel,
    ) -> Option<(usize, usize)> {
        let n = self.stops.len();
        let loads = self.prefix_loads();
        // points[k] is the location the vehicle departs from before stop k.
        let point = |k: usize| -> &Location {
            if k == 0 {
                &self.vehicle_position
            } else {
                &self.stops[k - 1].location
            }
        };
        let tt = |a: &Location, b: &Location| model.travel_time(a, b);
        let leg = |k: usize| tt(point(k), &self.stops[k].location);
        let base = self.completion_time(model);

        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..=n {
            if loads[i] + 1 > self.capacity {
                continue;
            }
            // Extra time from routing prev_i -> origin -> next_i.
            let pickup_detour = if i < n {
                tt(point(i), origin) + tt(origin, &self.stops[i].location) - leg(i)
            } else {
                tt(point(i), origin)
            };
            let mut max_load = loads[i];
            for (j, &load) in loads.iter().enumerate().skip(i) {
                max_load = max_load.max(load);
                if max_load + 1 > self.capacity {
                    break;
                }
                let extra = if j == i {
                    let direct = tt(point(i), origin) + tt(origin, destination);
                    if i < n {
                        direct + tt(destination, &self.stops[i].location) - leg(i)
                    } else {
                        direct
                    }
                } else {
                    let dropoff_detour = if j < n {
                        tt(point(j), destination) + tt(destination, &self.stops[j].location) - leg(j)
                    } else {
                        tt(point(j), destination)
                    };
                    pickup_detour + dropoff_detour
                };
                let cost = base + extra;
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, i, j));
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    /// Moves the vehicle along its stops for `minutes`, executing every stop
    /// reached on the way. Partial legs are interpolated exactly.
    pub fn advance(&self, minutes: f64, model: &TravelModel) -> Route {
        let mut route = self.clone();
        let mut remaining = minutes.max(0.0);
        let mut executed = 0;
        for stop in &self.stops {
            let needed = model.travel_time(&route.vehicle_position, &stop.location);
            if needed <= remaining + ARRIVAL_EPS {
                remaining = (remaining - needed).max(0.0);
                route.vehicle_position = stop.location;
                match stop.kind {
                    StopKind::Pickup => {
                        route.onboard.insert(stop.passenger);
                    }
                    StopKind::Dropoff => {
                        route.onboard.remove(&stop.passenger);
                    }
                }
                executed += 1;
            } else {
                if remaining > 0.0 {
                    let frac = remaining / needed;
                    route.vehicle_position = route.vehicle_position.lerp(&stop.location, frac);
                }
                break;
            }
        }
        route.stops.drain(..executed);
        route
    }

    /// Checks the structural invariants: capacity at every prefix, at most one
    /// pickup and one dropoff per passenger, pickup before dropoff, and no
    /// onboard passenger with a pending pickup.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut load = self.onboard.len();
        if load > self.capacity {
            return Err(format!("onboard {load} exceeds capacity {}", self.capacity));
        }
        let mut picked = BTreeSet::new();
        let mut dropped = BTreeSet::new();
        for (k, stop) in self.stops.iter().enumerate() {
            match stop.kind {
                StopKind::Pickup => {
                    if self.onboard.contains(&stop.passenger) {
                        return Err(format!("{} onboard but has pending pickup", stop.passenger));
                    }
                    if !picked.insert(stop.passenger) {
                        return Err(format!("{} picked up twice", stop.passenger));
                    }
                    load += 1;
                    if load > self.capacity {
                        return Err(format!("capacity exceeded after stop {k}"));
                    }
                }
                StopKind::Dropoff => {
                    if !dropped.insert(stop.passenger) {
                        return Err(format!("{} dropped off twice", stop.passenger));
                    }
                    if !picked.contains(&stop.passenger) && !self.onboard.contains(&stop.passenger) {
                        return Err(format!("{} dropped off before pickup", stop.passenger));
                    }
                    load = load
                        .checked_sub(1)
                        .ok_or_else(|| format!("negative load after stop {k}"))?;
                }
            }
        }
        Ok(())
    }
}
