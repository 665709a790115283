//! Episode trees over passenger decisions and the dynamic programs solved on
//! them.
//!
//! A tree of horizon `N` has one decision vertex per history of earlier
//! decisions: level `k` (0-based) holds the `2^k` states at which request
//! `k + 1` is pending. Every vertex has two outgoing edges, reject (`0`) and
//! accept (`1`); the edge carries the post-decision state and the reward of
//! the interval that follows. Storage is dense: a history of length `k` is a
//! `k`-bit integer with the earliest decision in the most significant bit, so
//! the children of vertex `h` are `2h` (reject) and `2h + 1` (accept).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ActionBounds, Mdp, RideRequest, SystemState, TargetProfile};
use crate::scenario::Scenario;

/// Largest horizon accepted by [`exhaustive_policy_oracle`].
pub const ORACLE_MAX_HORIZON: usize = 4;

/// Decisions `d_1..d_k` of the first `k` passengers (`true` = accepted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecisionHistory {
    len: usize,
    bits: u64,
}

impl DecisionHistory {
    pub const EMPTY: DecisionHistory = DecisionHistory { len: 0, bits: 0 };

    pub fn new(len: usize, bits: u64) -> Self {
        debug_assert!(len < 64 && bits < (1u64 << len));
        Self { len, bits }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Index of this history within its level.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn push(&self, accepted: bool) -> Self {
        Self { len: self.len + 1, bits: (self.bits << 1) | accepted as u64 }
    }

    /// Decisions in chronological order.
    pub fn decisions(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).rev().map(move |i| (self.bits >> i) & 1 == 1)
    }
}

impl fmt::Display for DecisionHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("-");
        }
        for d in self.decisions() {
            f.write_str(if d { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    /// State with the request pending.
    pub state: SystemState,
    pub bounds: ActionBounds,
    pub action: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub reward: f64,
    /// State right after the passenger's decision.
    pub post_state: SystemState,
}

/// The interval between the initial commitments and the first decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Prelude {
    pub post_state: SystemState,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTree {
    pub mdp: Mdp,
    pub interval: f64,
    pub target: TargetProfile,
    pub prelude: Option<Prelude>,
    pub vertices: Vec<Vec<Vertex>>,
    pub edges: Vec<Vec<Edge>>,
}

impl EpisodeTree {
    /// Number of decision levels.
    pub fn horizon(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn vertex(&self, h: DecisionHistory) -> &Vertex {
        &self.vertices[h.len()][h.index()]
    }

    pub fn edge(&self, h: DecisionHistory) -> &Edge {
        &self.edges[h.len() - 1][h.index()]
    }

    /// Time of the first decision.
    pub fn first_decision_time(&self) -> f64 {
        self.vertices.first().map_or(0.0, |l| l[0].state.time)
    }

    /// Time at which the episode starts: the initial commitments if present,
    /// otherwise the first decision.
    pub fn start_time(&self) -> f64 {
        match &self.prelude {
            Some(p) => p.post_state.time,
            None => self.first_decision_time(),
        }
    }

    /// Length of the covered time span.
    pub fn duration(&self) -> f64 {
        let intervals = self.horizon() + usize::from(self.prelude.is_some());
        intervals as f64 * self.interval
    }

    /// Current actions as a policy.
    pub fn policy(&self) -> Policy {
        Policy {
            actions: self.vertices.iter().map(|l| l.iter().map(|v| v.action).collect()).collect(),
        }
    }

    /// Per-vertex bounds laid out like a policy.
    pub fn bounds(&self) -> Vec<Vec<ActionBounds>> {
        self.vertices.iter().map(|l| l.iter().map(|v| v.bounds).collect()).collect()
    }

    pub fn export(&self) -> TreeExport {
        let mut vertices = BTreeMap::new();
        let mut edges = BTreeMap::new();
        for (k, level) in self.vertices.iter().enumerate() {
            for (h, v) in level.iter().enumerate() {
                vertices.insert(
                    DecisionHistory::new(k, h as u64).to_string(),
                    VertexExport {
                        time: v.state.time,
                        lower: v.bounds.lower,
                        upper: v.bounds.upper,
                        action: v.action,
                        value: v.value,
                    },
                );
            }
        }
        for (k, level) in self.edges.iter().enumerate() {
            for (e, edge) in level.iter().enumerate() {
                edges.insert(DecisionHistory::new(k + 1, e as u64).to_string(), edge.reward);
            }
        }
        TreeExport {
            horizon: self.horizon(),
            prelude_reward: self.prelude.as_ref().map(|p| p.reward),
            vertices,
            edge_rewards: edges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexExport {
    pub time: f64,
    pub lower: f64,
    pub upper: f64,
    pub action: f64,
    pub value: f64,
}

/// JSON view of a tree keyed by decision history (`"-"` is the root,
/// `"101"` is accept, reject, accept).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeExport {
    pub horizon: usize,
    pub prelude_reward: Option<f64>,
    pub vertices: BTreeMap<String, VertexExport>,
    pub edge_rewards: BTreeMap<String, f64>,
}

/// Desired acceptance probability at every decision vertex, laid out like
/// [`EpisodeTree::vertices`].
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub actions: Vec<Vec<f64>>,
}

impl Policy {
    /// Same action everywhere on a tree of the given horizon.
    pub fn constant(horizon: usize, action: f64) -> Self {
        Self { actions: (0..horizon).map(|k| vec![action; 1 << k]).collect() }
    }

    pub fn from_fn(horizon: usize, mut f: impl FnMut(DecisionHistory) -> f64) -> Self {
        Self {
            actions: (0..horizon)
                .map(|k| (0..1u64 << k).map(|h| f(DecisionHistory::new(k, h))).collect())
                .collect(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.actions.len()
    }

    pub fn action(&self, h: DecisionHistory) -> f64 {
        self.actions[h.len()][h.index()]
    }

    /// True if every action lies within the tree's per-vertex bounds.
    pub fn is_admissible(&self, tree: &EpisodeTree) -> bool {
        self.horizon() == tree.horizon()
            && self
                .actions
                .iter()
                .zip(&tree.vertices)
                .all(|(a, v)| a.len() == v.len() && a.iter().zip(v).all(|(a, v)| v.bounds.contains(*a)))
    }

    pub fn export(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for (k, level) in self.actions.iter().enumerate() {
            for (h, a) in level.iter().enumerate() {
                out.insert(DecisionHistory::new(k, h as u64).to_string(), *a);
            }
        }
        out
    }
}

/// Builds the subtree of the given height rooted at `root` (a state with a
/// pending request). `upcoming` holds the requests that arrive after the
/// root's, in order; a missing request ends the episode. Values and actions
/// are left at zero.
pub fn traverse_from(
    mdp: &Mdp,
    root: SystemState,
    upcoming: &[RideRequest],
    height: usize,
    interval: f64,
    target: &TargetProfile,
) -> Result<EpisodeTree> {
    let mut vertices: Vec<Vec<Vertex>> = Vec::with_capacity(height);
    let mut edges: Vec<Vec<Edge>> = Vec::with_capacity(height);
    let mut frontier = vec![root];
    for k in 0..height {
        let mut level = Vec::with_capacity(frontier.len());
        let mut level_edges = Vec::with_capacity(2 * frontier.len());
        let mut next_frontier = Vec::new();
        let next_request = upcoming.get(k).copied();
        for state in frontier {
            let bounds = mdp.action_bounds(&state, target.at(state.time))?;
            for accept in [false, true] {
                let post = if accept {
                    mdp.transition_accept(&state)?
                } else {
                    mdp.transition_reject(&state)?
                };
                let reward = mdp.branch_reward(&post, interval, target);
                if k + 1 < height {
                    let moved = mdp.advance(&post, interval);
                    let next = match next_request {
                        Some(req) => mdp.receive_request(&moved, req)?,
                        None => moved,
                    };
                    next_frontier.push(next);
                }
                level_edges.push(Edge { reward, post_state: post });
            }
            level.push(Vertex { state, bounds, action: 0.0, value: 0.0 });
        }
        vertices.push(level);
        edges.push(level_edges);
        frontier = next_frontier;
    }
    Ok(EpisodeTree {
        mdp: *mdp,
        interval,
        target: target.clone(),
        prelude: None,
        vertices,
        edges,
    })
}

/// State at the first decision together with the prelude interval.
fn first_decision(scenario: &Scenario, target: &TargetProfile) -> Result<(SystemState, Prelude)> {
    let mdp = scenario.mdp();
    let interval = scenario.config.interval;
    let committed = scenario.initial_state()?;
    let reward = mdp.branch_reward(&committed, interval, target);
    let mut first = mdp.advance(&committed, interval);
    if let Some(req) = scenario.sequential_requests.first() {
        first = mdp.receive_request(&first, *req)?;
    }
    Ok((first, Prelude { post_state: committed, reward }))
}

/// Forward pass over the whole episode: every decision state, every branch
/// reward. Values and actions are zeroed.
pub fn traverse(scenario: &Scenario, target: &TargetProfile) -> Result<EpisodeTree> {
    scenario.validate()?;
    let (first, prelude) = first_decision(scenario, target)?;
    let n = scenario.horizon();
    let upcoming = scenario.sequential_requests.get(1..).unwrap_or(&[]);
    let mut tree = traverse_from(&scenario.mdp(), first, upcoming, n, scenario.config.interval, target)?;
    tree.prelude = Some(prelude);
    Ok(tree)
}

/// Backup from the leaves: at each vertex pick the upper bound when the
/// accept branch is worth at least as much as the reject branch, otherwise
/// the lower bound. Returns the policy and the root value.
pub fn backward_induction(tree: &mut EpisodeTree) -> (Policy, f64) {
    let gamma = tree.mdp.discount;
    for k in (0..tree.horizon()).rev() {
        let (head, tail) = tree.vertices.split_at_mut(k + 1);
        let children = tail.first();
        for (h, v) in head[k].iter_mut().enumerate() {
            let child_value = |d: usize| children.map_or(0.0, |c| c[2 * h + d].value);
            let reject = tree.edges[k][2 * h].reward + gamma * child_value(0);
            let accept = tree.edges[k][2 * h + 1].reward + gamma * child_value(1);
            v.action = if accept >= reject { v.bounds.upper } else { v.bounds.lower };
            v.value = v.action * accept + (1.0 - v.action) * reject;
        }
    }
    let root = tree.vertices.first().map_or(0.0, |l| l[0].value);
    (tree.policy(), root)
}

/// Exact dynamic program over the full episode.
pub fn e_dp(scenario: &Scenario, target: &TargetProfile) -> Result<(Policy, EpisodeTree)> {
    let mut tree = traverse(scenario, target)?;
    let (policy, _) = backward_induction(&mut tree);
    Ok((policy, tree))
}

/// Expected discounted reward of the decision intervals under `policy`,
/// by backward recursion.
pub fn evaluate_policy(tree: &EpisodeTree, policy: &Policy) -> f64 {
    evaluate_with_discount(tree, policy, tree.mdp.discount)
}

fn evaluate_with_discount(tree: &EpisodeTree, policy: &Policy, gamma: f64) -> f64 {
    let mut values: Vec<f64> = Vec::new();
    for k in (0..tree.horizon()).rev() {
        values = (0..tree.vertices[k].len())
            .map(|h| {
                let a = policy.actions[k][h];
                let child = |d: usize| values.get(2 * h + d).copied().unwrap_or(0.0);
                let reject = tree.edges[k][2 * h].reward + gamma * child(0);
                let accept = tree.edges[k][2 * h + 1].reward + gamma * child(1);
                a * accept + (1.0 - a) * reject
            })
            .collect();
    }
    values.first().copied().unwrap_or(0.0)
}

/// Probability of reaching each vertex (per level) and of traversing each
/// edge (per level) under `policy`.
pub fn path_probabilities(tree: &EpisodeTree, policy: &Policy) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut vertex_probs = Vec::with_capacity(tree.horizon());
    let mut edge_probs = Vec::with_capacity(tree.horizon());
    let mut current = vec![1.0];
    for k in 0..tree.horizon() {
        let edges: Vec<f64> = current
            .iter()
            .enumerate()
            .flat_map(|(h, p)| {
                let a = policy.actions[k][h];
                [p * (1.0 - a), p * a]
            })
            .collect();
        vertex_probs.push(current);
        current = edges.clone();
        edge_probs.push(edges);
    }
    (vertex_probs, edge_probs)
}

/// Expected undiscounted reward over the decision intervals computed leaf by
/// leaf: sum over all `2^N` complete histories of path probability times the
/// path's total reward.
pub fn path_sum_value(tree: &EpisodeTree, policy: &Policy) -> f64 {
    let n = tree.horizon();
    let mut total = 0.0;
    for leaf in 0..(1u64 << n) {
        let mut prob = 1.0;
        let mut reward = 0.0;
        let mut h = DecisionHistory::EMPTY;
        for d in DecisionHistory::new(n, leaf).decisions().collect::<Vec<_>>() {
            let a = policy.action(h);
            prob *= if d { a } else { 1.0 - a };
            h = h.push(d);
            reward += tree.edge(h).reward;
        }
        total += prob * reward;
    }
    total
}

/// Best expected reward over every bang-bang policy, each evaluated by
/// [`path_sum_value`]. There are `2^(2^N - 1)` of them, so `N` is capped at
/// [`ORACLE_MAX_HORIZON`].
pub fn exhaustive_policy_oracle(tree: &EpisodeTree) -> Result<f64> {
    let n = tree.horizon();
    if n > ORACLE_MAX_HORIZON {
        return Err(Error::HorizonTooLarge(n));
    }
    let vertex_count = (1usize << n) - 1;
    let mut best = f64::NEG_INFINITY;
    for mask in 0..(1u64 << vertex_count) {
        // Vertices are numbered in level order: level k, index h -> 2^k - 1 + h.
        let policy = Policy::from_fn(n, |h| {
            let flat = (1usize << h.len()) - 1 + h.index();
            let b = tree.vertex(h).bounds;
            if (mask >> flat) & 1 == 1 {
                b.upper
            } else {
                b.lower
            }
        });
        best = best.max(path_sum_value(tree, &policy));
    }
    Ok(best)
}

/// Receding-horizon dynamic program with `lookahead` steps.
///
/// Each decision vertex is solved by an exact program on the subtree of
/// height `lookahead` rooted there, and only its root action is kept. The
/// last window, where exactly `lookahead` requests remain, is solved once
/// per vertex and all of its actions are kept. With `lookahead == 0` the
/// upper bound is chosen when accepting leaves the immediate waiting-time
/// estimate at least as close to the target as rejecting.
pub fn h_dp(scenario: &Scenario, lookahead: usize, target: &TargetProfile) -> Result<Policy> {
    scenario.validate()?;
    let n = scenario.horizon();
    if lookahead > n {
        return Err(Error::LookaheadOutOfRange { lookahead, horizon: n });
    }
    let mdp = scenario.mdp();
    let interval = scenario.config.interval;
    let (first, _) = first_decision(scenario, target)?;
    let states = decision_states(&mdp, first, &scenario.sequential_requests, interval)?;
    let mut actions: Vec<Vec<f64>> = (0..n).map(|k| vec![0.0; 1 << k]).collect();

    if lookahead == 0 {
        for (k, level) in states.iter().enumerate() {
            for (h, s) in level.iter().enumerate() {
                let now = target.at(s.time);
                let bounds = mdp.action_bounds(s, now)?;
                let accept = (mdp.estimate_ewt(&mdp.transition_accept(s)?) - now).abs();
                let reject = (mdp.estimate_ewt(&mdp.transition_reject(s)?) - now).abs();
                actions[k][h] = if accept <= reject { bounds.upper } else { bounds.lower };
            }
        }
        return Ok(Policy { actions });
    }

    let last_window = n - lookahead;
    for p in 0..=last_window {
        let upcoming = &scenario.sequential_requests[p + 1..];
        for (h, s) in states[p].iter().enumerate() {
            let mut sub = traverse_from(&mdp, s.clone(), upcoming, lookahead, interval, target)?;
            let (local, _) = backward_induction(&mut sub);
            if p < last_window {
                actions[p][h] = local.actions[0][0];
            } else {
                for (j, level) in local.actions.iter().enumerate() {
                    let base = h << j;
                    for (g, a) in level.iter().enumerate() {
                        actions[p + j][base + g] = *a;
                    }
                }
            }
        }
    }
    Ok(Policy { actions })
}

/// Every decision state of the episode, per level, without rewards.
fn decision_states(
    mdp: &Mdp,
    first: SystemState,
    requests: &[RideRequest],
    interval: f64,
) -> Result<Vec<Vec<SystemState>>> {
    let n = requests.len();
    let mut levels = Vec::with_capacity(n);
    let mut frontier = vec![first];
    for k in 0..n {
        if k + 1 < n {
            let mut next = Vec::with_capacity(2 * frontier.len());
            for s in &frontier {
                for accept in [false, true] {
                    next.push(mdp.step(s, accept, interval, requests.get(k + 1).copied())?);
                }
            }
            levels.push(std::mem::replace(&mut frontier, next));
        } else {
            levels.push(std::mem::take(&mut frontier));
        }
    }
    Ok(levels)
}

/// One point of a waiting-time curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub ewt: f64,
}

/// Sample times `start, start + step, ...` up to the end of the tree.
pub fn sample_times(tree: &EpisodeTree, step: f64) -> Vec<f64> {
    let start = tree.start_time();
    let count = (tree.duration() / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}

/// State on edge/prelude covering time `t`, as (level, offset into the
/// interval). Level `None` is the prelude.
fn locate(tree: &EpisodeTree, t: f64) -> (Option<usize>, f64) {
    let first = tree.first_decision_time();
    if tree.prelude.is_some() && (t < first || tree.horizon() == 0) {
        return (None, t - tree.start_time());
    }
    let n = tree.horizon();
    let k = (((t - first) / tree.interval).floor().max(0.0) as usize).min(n - 1);
    let offset = t - (first + k as f64 * tree.interval);
    (Some(k), offset)
}

/// `E[EWT(t)]` under the path measure of `policy`, sampled every `step`
/// minutes. At a request instant the post-decision state is used; the last
/// sample is the end of the final interval.
pub fn expected_ewt_curve(tree: &EpisodeTree, policy: &Policy, step: f64) -> Vec<CurvePoint> {
    let (_, edge_probs) = path_probabilities(tree, policy);
    let mdp = &tree.mdp;
    sample_times(tree, step)
        .into_iter()
        .map(|t| {
            let ewt = match locate(tree, t) {
                (None, offset) => {
                    let p = tree.prelude.as_ref().expect("prelude");
                    mdp.estimate_ewt_route(&p.post_state.route.advance(offset, &mdp.travel))
                }
                (Some(k), offset) => tree.edges[k]
                    .iter()
                    .zip(&edge_probs[k])
                    .map(|(e, p)| {
                        if *p == 0.0 {
                            0.0
                        } else {
                            p * mdp.estimate_ewt_route(&e.post_state.route.advance(offset, &mdp.travel))
                        }
                    })
                    .sum(),
            };
            CurvePoint { t, ewt }
        })
        .collect()
}

/// `EWT(t)` along a single complete history (e.g. all-accept).
pub fn path_ewt_curve(tree: &EpisodeTree, leaf: DecisionHistory, step: f64) -> Vec<CurvePoint> {
    assert_eq!(leaf.len(), tree.horizon(), "history must be complete");
    let mdp = &tree.mdp;
    let n = leaf.len();
    sample_times(tree, step)
        .into_iter()
        .map(|t| {
            let route = match locate(tree, t) {
                (None, offset) => tree.prelude.as_ref().expect("prelude").post_state.route.advance(offset, &mdp.travel),
                (Some(k), offset) => {
                    let prefix = DecisionHistory::new(k + 1, leaf.bits >> (n - k - 1));
                    tree.edge(prefix).post_state.route.advance(offset, &mdp.travel)
                }
            };
            CurvePoint { t, ewt: mdp.estimate_ewt_route(&route) }
        })
        .collect()
}

/// The all-accept history of a tree.
pub fn all_accept(tree: &EpisodeTree) -> DecisionHistory {
    let n = tree.horizon();
    DecisionHistory::new(n, (1u64 << n) - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRates {
    pub per_passenger: Vec<f64>,
    pub mean: f64,
}

/// Expected desired acceptance probability of each sequential passenger and
/// their mean.
pub fn expected_acceptance_rates(tree: &EpisodeTree, policy: &Policy) -> AcceptanceRates {
    let (vertex_probs, _) = path_probabilities(tree, policy);
    let per_passenger: Vec<f64> = vertex_probs
        .iter()
        .zip(&policy.actions)
        .map(|(probs, actions)| probs.iter().zip(actions).map(|(p, a)| p * a).sum())
        .collect();
    let mean = if per_passenger.is_empty() {
        0.0
    } else {
        per_passenger.iter().sum::<f64>() / per_passenger.len() as f64
    };
    AcceptanceRates { per_passenger, mean }
}

/// Expected undiscounted reward over the whole episode, prelude included.
pub fn expected_total_reward(tree: &EpisodeTree, policy: &Policy) -> f64 {
    tree.prelude.as_ref().map_or(0.0, |p| p.reward) + evaluate_with_discount(tree, policy, 1.0)
}

/// Time-averaged expected `|EWT(t) - target(t)|` over the episode, in minutes.
pub fn average_deviation(tree: &EpisodeTree, policy: &Policy) -> f64 {
    -expected_total_reward(tree, policy) * tree.interval / tree.duration()
}

/// Deviation along one complete history.
pub fn path_deviation(tree: &EpisodeTree, leaf: DecisionHistory) -> f64 {
    let n = leaf.len();
    let mut total = tree.prelude.as_ref().map_or(0.0, |p| p.reward);
    for k in 0..n {
        total += tree.edge(DecisionHistory::new(k + 1, leaf.bits >> (n - k - 1))).reward;
    }
    -total * tree.interval / tree.duration()
}
