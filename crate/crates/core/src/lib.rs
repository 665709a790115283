//! Regulation of a shared-mobility vehicle's estimated waiting time (EWT).
//!
//! Each arriving ride request is offered with a *desired probability of
//! acceptance*; the passenger accepts or declines, the vehicle's route is
//! updated by cheapest insertion, and the platform is rewarded for keeping
//! the EWT close to a target. With requests known in advance the decision
//! process is a finite binary tree, solved exactly by backward induction
//! ([`solver::e_dp`]) or approximately with a bounded lookahead
//! ([`solver::h_dp`]).
//!
//! Modules, bottom-up:
//! - [`routing`]: travel model, routes, insertion and advancement.
//! - [`mdp`]: states, transitions, EWT probe, rewards and action bounds.
//! - [`solver`]: episode trees, dynamic programs, oracles and expectations.
//! - [`scenario`]: seeded scenario generation.
//! - [`experiments`] / [`cli`]: the reproducible experiments and their files.

pub mod canonical;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod mdp;
pub mod rng;
pub mod routing;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};
pub use mdp::{ActionBounds, Mdp, RideRequest, SystemState, TargetProfile};
pub use routing::{Location, PassengerId, Route, Stop, StopKind, TravelModel};
pub use scenario::{canonical_scenario, generate_scenario, Scenario, ScenarioConfig};
pub use solver::{e_dp, h_dp, EpisodeTree, Policy};
