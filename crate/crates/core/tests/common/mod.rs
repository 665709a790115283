#![allow(dead_code)]

use ewt_reg::mdp::{Mdp, RideRequest, SystemState};
use ewt_reg::rng::SplitMix64;
use ewt_reg::{Location, PassengerId, Route};

pub fn random_location(rng: &mut SplitMix64) -> Location {
    Location::new(rng.next_f64(), rng.next_f64())
}

/// A settled state built from random accepted requests and random motion.
pub fn random_state(rng: &mut SplitMix64, mdp: &Mdp) -> SystemState {
    let capacity = 1 + (rng.next_u64() % 6) as usize;
    let mut s = SystemState::new(Route::new(random_location(rng), capacity));
    let requests = rng.next_u64() % 8;
    for id in 0..requests {
        let req = RideRequest {
            passenger: PassengerId(id as u32),
            origin: random_location(rng),
            destination: random_location(rng),
            issue_time: s.time,
        };
        s = mdp.receive_request(&s, req).unwrap();
        s = if rng.next_f64() < 0.8 {
            mdp.transition_accept(&s).unwrap()
        } else {
            mdp.transition_reject(&s).unwrap()
        };
        s = mdp.advance(&s, rng.next_f64() * 3.0);
    }
    s
}

pub fn random_request(rng: &mut SplitMix64, id: u32, t: f64) -> RideRequest {
    RideRequest {
        passenger: PassengerId(id),
        origin: random_location(rng),
        destination: random_location(rng),
        issue_time: t,
    }
}
