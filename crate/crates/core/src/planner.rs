//! Receding-horizon planner trading distance-to-goal against observability.
//!
//! The vehicle moves at constant speed and picks, at every planning step, a
//! heading change from a finite action set. A candidate sequence of `p`
//! actions is rolled out noise-free through the unicycle model from the
//! current estimate and scored by
//!
//! ```text
//! J(s) = w_goal · |s - goal|² + w_obs / max(det Oᵀ O, eps)
//! ```
//!
//! summed over the successor states `s_1 .. s_{p-1}` (or `s_1 .. s_p` with
//! [`ObsPlannerConfig::include_terminal`]). Every state of the rollout,
//! counted or not, must keep the derivative stencil on the map; otherwise the
//! sequence costs `+inf`.
//!
//! [`plan`] solves this with the backward recursion
//! `J*(s) = min_a [ J(f(s, a)) + J*(f(s, a)) ]` over the action tree.
//! [`brute_force_plan`] enumerates every sequence and sums its costs in the
//! same nested order, so both return bit-identical totals.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::map::GridMap;
use crate::observability::{self, DEFAULT_EPS_DET};
use crate::vehicle::{step_deterministic, ControlInput, Pose};

/// Exhaustive enumeration refuses action trees larger than this.
pub const MAX_BRUTE_FORCE_SEQUENCES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerWeights {
    pub w_goal: f64,
    pub w_obs: f64,
}

impl Default for PlannerWeights {
    fn default() -> Self {
        Self {
            w_goal: 1.0,
            w_obs: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObsPlannerConfig {
    /// Number of actions per candidate sequence.
    pub horizon: usize,
    /// Heading change per planning step, radians.
    pub action_set: Vec<f64>,
    pub v: f64,
    pub dt: f64,
    pub weights: PlannerWeights,
    pub goal: (f64, f64),
    pub eps_det: f64,
    /// Also score the last state of the rollout.
    pub include_terminal: bool,
}

impl ObsPlannerConfig {
    /// Five-step horizon over {-45, -22, 0, 22, 45} degrees at 0.2 m/s, 1 s steps.
    pub fn with_goal(goal: (f64, f64)) -> Self {
        Self {
            horizon: 5,
            action_set: [-45.0f64, -22.0, 0.0, 22.0, 45.0]
                .iter()
                .map(|d| d.to_radians())
                .collect(),
            v: 0.2,
            dt: 1.0,
            weights: PlannerWeights::default(),
            goal,
            eps_det: DEFAULT_EPS_DET,
            include_terminal: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if self.action_set.is_empty() {
            return Err(Error::InvalidArgument("action set is empty".into()));
        }
        if self.action_set.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("actions must be finite".into()));
        }
        if !(self.v > 0.0) || !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "v and dt must be positive, got v={} dt={}",
                self.v, self.dt
            )));
        }
        if !(self.weights.w_goal >= 0.0) || !(self.weights.w_obs >= 0.0) {
            return Err(Error::InvalidArgument(
                "planner weights must be non-negative".into(),
            ));
        }
        if !(self.eps_det > 0.0) {
            return Err(Error::InvalidArgument("eps_det must be positive".into()));
        }
        Ok(())
    }

    /// Control that realizes heading change `action` over one step.
    pub fn control_for(&self, action: f64) -> ControlInput {
        ControlInput::new(self.v, action / self.dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    /// Heading changes per step, radians.
    pub controls: Vec<f64>,
    pub states: Vec<Pose>,
    pub total_cost: f64,
}

/// Per-state cost. Off-map (stencil outside the grid) is `+inf`.
pub fn step_cost(map: &GridMap, pose: &Pose, u: &ControlInput, cfg: &ObsPlannerConfig) -> f64 {
    if !map.stencil_fits(pose.x, pose.y) {
        return f64::INFINITY;
    }
    let d2 = (pose.x - cfg.goal.0).powi(2) + (pose.y - cfg.goal.1).powi(2);
    let goal_term = cfg.weights.w_goal * d2;
    if cfg.weights.w_obs == 0.0 {
        return goal_term;
    }
    match observability::report(map, pose, u, cfg.eps_det) {
        Ok(r) => goal_term + cfg.weights.w_obs * r.cost,
        Err(_) => f64::INFINITY,
    }
}

/// Action indices from most to least preferred: smallest magnitude, then lowest index.
fn preference_order(actions: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..actions.len()).collect();
    idx.sort_by(|&a, &b| {
        actions[a]
            .abs()
            .partial_cmp(&actions[b].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

struct Rollout<'a> {
    map: &'a GridMap,
    cfg: &'a ObsPlannerConfig,
    order: Vec<usize>,
}

impl Rollout<'_> {
    /// Successor of `pose` under action `a` at 1-based depth `depth`, and its cost term.
    fn advance(&self, pose: &Pose, a: usize, depth: usize) -> (Pose, f64) {
        let u = self.cfg.control_for(self.cfg.action_set[a]);
        let next = step_deterministic(pose, &u, self.cfg.dt);
        let counted = depth < self.cfg.horizon || self.cfg.include_terminal;
        let cost = if counted {
            step_cost(self.map, &next, &u, self.cfg)
        } else if self.map.stencil_fits(next.x, next.y) {
            0.0
        } else {
            f64::INFINITY
        };
        (next, cost)
    }

    /// Optimal cost-to-go from `pose` with `depth - 1` actions already taken.
    /// Returns the value and the optimal remaining action indices.
    fn cost_to_go(&self, pose: &Pose, depth: usize) -> (f64, Vec<usize>) {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for &a in &self.order {
            let (next, stage) = self.advance(pose, a, depth);
            let (value, tail) = if depth == self.cfg.horizon || stage == f64::INFINITY {
                (stage + 0.0, Vec::new())
            } else {
                let (rest, tail) = self.cost_to_go(&next, depth + 1);
                (stage + rest, tail)
            };
            // strict improvement only: earlier entries in `order` win ties
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                let mut seq = Vec::with_capacity(tail.len() + 1);
                seq.push(a);
                seq.extend(tail);
                best = Some((value, seq));
            }
        }
        best.expect("non-empty action set")
    }

    fn path(&self, start: &Pose, seq: &[usize], total_cost: f64) -> PlannedPath {
        let mut states = Vec::with_capacity(seq.len());
        let mut pose = *start;
        for &a in seq {
            pose = step_deterministic(
                &pose,
                &self.cfg.control_for(self.cfg.action_set[a]),
                self.cfg.dt,
            );
            states.push(pose);
        }
        PlannedPath {
            controls: seq.iter().map(|&a| self.cfg.action_set[a]).collect(),
            states,
            total_cost,
        }
    }
}

fn check_start(map: &GridMap, est: &Pose) -> Result<()> {
    if !map.contains(est.x, est.y) {
        return Err(Error::InvalidArgument(format!(
            "estimate ({:.3}, {:.3}) is outside the map",
            est.x, est.y
        )));
    }
    Ok(())
}

/// Dynamic-programming planner. Returns the first heading change and the full argmin path.
pub fn plan(map: &GridMap, est: &Pose, cfg: &ObsPlannerConfig) -> Result<(f64, PlannedPath)> {
    cfg.validate()?;
    check_start(map, est)?;
    let r = Rollout {
        map,
        cfg,
        order: preference_order(&cfg.action_set),
    };
    let (cost, seq) = r.cost_to_go(est, 1);
    if cost == f64::INFINITY {
        return Err(Error::NoFeasiblePlan);
    }
    let path = r.path(est, &seq, cost);
    Ok((path.controls[0], path))
}

/// Exhaustive enumeration with the same cost and tie-breaks as [`plan`].
pub fn brute_force_plan(
    map: &GridMap,
    est: &Pose,
    cfg: &ObsPlannerConfig,
) -> Result<(f64, PlannedPath)> {
    cfg.validate()?;
    let n = cfg.action_set.len();
    let total = u32::try_from(cfg.horizon)
        .ok()
        .and_then(|p| n.checked_pow(p))
        .filter(|&t| t <= MAX_BRUTE_FORCE_SEQUENCES)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{n}^{} sequences exceeds the enumeration limit of {MAX_BRUTE_FORCE_SEQUENCES}",
                cfg.horizon
            ))
        })?;
    check_start(map, est)?;
    let r = Rollout {
        map,
        cfg,
        order: preference_order(&cfg.action_set),
    };

    // Sequences are visited in lexicographic preference order, so the first
    // minimum found is also the preferred one under ties.
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut digits = vec![0usize; cfg.horizon];
    for _ in 0..total {
        let seq: Vec<usize> = digits.iter().map(|&d| r.order[d]).collect();
        let mut pose = *est;
        let mut stages = Vec::with_capacity(cfg.horizon);
        for (k, &a) in seq.iter().enumerate() {
            let (next, c) = r.advance(&pose, a, k + 1);
            stages.push(c);
            pose = next;
            if c == f64::INFINITY {
                break;
            }
        }
        // nested sum c1 + (c2 + (... + (cp + 0))), matching the recursion
        let cost = stages.iter().rev().fold(0.0, |acc, c| c + acc);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, seq));
        }
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < n {
                break;
            }
            *d = 0;
        }
    }
    let (cost, seq) = best.expect("at least one sequence");
    if cost == f64::INFINITY {
        return Err(Error::NoFeasiblePlan);
    }
    let path = r.path(est, &seq, cost);
    Ok((path.controls[0], path))
}
