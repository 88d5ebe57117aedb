//! Closed-loop runs: a simulated vehicle, an estimator and a guidance law.
//!
//! Each run owns two ChaCha8 streams derived from the seed: one drives the
//! truth (process and sensor noise), the other the particle filter. Keeping
//! them apart lets a logged trace be replayed through the filter alone.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{PlannerKind, SimConfig};
use super::trace::SimTraceRecord;
use crate::belief::{choose_action, BeliefGrid};
use crate::error::{Error, Result};
use crate::map::GridMap;
use crate::observability::{gramian_det, observability_matrix};
use crate::particle_filter::ParticleSet;
use crate::planner::plan;
use crate::vehicle::{measure, normalize_angle, step_noisy, ControlInput, Pose};

const TRUTH_STREAM: u64 = 0;
const FILTER_STREAM: u64 = 1;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Entropy of the belief around one step: before the measurement, after it, and after prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPhases {
    pub prior: f64,
    pub posterior: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EerRun {
    pub records: Vec<SimTraceRecord>,
    pub phases: Vec<EntropyPhases>,
    /// Entropy of the initial belief.
    pub initial_entropy: f64,
}

impl EerRun {
    /// Entropy removed by measurement updates, summed over the run.
    pub fn total_entropy_reduction(&self) -> f64 {
        self.phases.iter().map(|p| p.prior - p.posterior).sum()
    }

    /// Initial entropy minus the entropy at the end of the run.
    pub fn net_entropy_change(&self) -> f64 {
        let last = self
            .phases
            .last()
            .map_or(self.initial_entropy, |p| p.predicted);
        self.initial_entropy - last
    }
}

/// Loads the configured map and runs the configured planner.
pub fn run_sim(cfg: &SimConfig) -> Result<Vec<SimTraceRecord>> {
    let map = cfg.map.load()?;
    run_sim_on(&map, cfg)
}

pub fn run_sim_on(map: &GridMap, cfg: &SimConfig) -> Result<Vec<SimTraceRecord>> {
    match cfg.planner {
        PlannerKind::Observability | PlannerKind::Straight => run_observability_sim(map, cfg),
        PlannerKind::Eer => run_eer_sim(map, cfg),
    }
}

/// Mean of `trace_position` over a trace.
pub fn time_averaged_trace(records: &[SimTraceRecord]) -> f64 {
    if records.is_empty() {
        return f64::NAN;
    }
    records.iter().map(|r| r.trace_position).sum::<f64>() / records.len() as f64
}

/// Smallest distance from the true path (including the start) to a point.
pub fn min_distance_to(start: &Pose, records: &[SimTraceRecord], p: (f64, f64)) -> f64 {
    std::iter::once(start)
        .chain(records.iter().map(|r| &r.truth))
        .map(|q| q.distance_to(p.0, p.1))
        .fold(f64::INFINITY, f64::min)
}

/// 75th percentile (nearest rank) of the Gramian determinant over interior nodes
/// and headings {0, 45, 90, 135} degrees at speed `v`.
pub fn default_obs_rate_threshold(map: &GridMap, v: f64) -> f64 {
    let (nx, ny) = map.dims();
    let u = ControlInput::new(v, 0.0);
    let mut dets = Vec::new();
    for i in 1..nx.saturating_sub(1) {
        for j in 1..ny.saturating_sub(1) {
            let (x, y) = map.node_position(i, j);
            for theta in [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] {
                if let Ok(o) = observability_matrix(map, &Pose::new(x, y, theta), &u) {
                    dets.push(gramian_det(&o));
                }
            }
        }
    }
    if dets.is_empty() {
        return f64::INFINITY;
    }
    dets.sort_by(f64::total_cmp);
    let rank = ((0.75 * dets.len() as f64).ceil() as usize).clamp(1, dets.len());
    dets[rank - 1]
}

/// Heading change from `actions` that best points the vehicle at `goal`; ties go to the smaller turn.
pub fn straight_action(est: &Pose, goal: (f64, f64), actions: &[f64]) -> f64 {
    let bearing = (goal.1 - est.y).atan2(goal.0 - est.x);
    let err = |a: f64| normalize_angle(bearing - est.theta - a).abs();
    let mut best = actions[0];
    for &a in &actions[1..] {
        let (ea, eb) = (err(a), err(best));
        if ea < eb || (ea == eb && a.abs() < best.abs()) {
            best = a;
        }
    }
    best
}

fn reached(p: (f64, f64), cfg: &SimConfig) -> bool {
    (p.0 - cfg.goal.0).hypot(p.1 - cfg.goal.1) <= cfg.goal_radius
}

fn check_on_map(map: &GridMap, pose: &Pose) -> Result<()> {
    if map.contains(pose.x, pose.y) {
        Ok(())
    } else {
        Err(Error::OutOfBounds {
            x: pose.x,
            y: pose.y,
        })
    }
}

/// Particle-filter run guided by the observability planner, or by the straight baseline.
///
/// Each step: plan from the filter estimate, apply the first control to the
/// truth, propagate the filter, measure when the active period says so, then
/// log. The fast period applies while the Gramian determinant at the
/// estimate exceeds the threshold.
pub fn run_observability_sim(map: &GridMap, cfg: &SimConfig) -> Result<Vec<SimTraceRecord>> {
    cfg.validate()?;
    let pcfg = cfg.obs_planner();
    let threshold = cfg
        .obs_rate_threshold
        .unwrap_or_else(|| default_obs_rate_threshold(map, cfg.v));
    let mut truth_rng = rng_for(cfg.seed, TRUTH_STREAM);
    let mut filter_rng = rng_for(cfg.seed, FILTER_STREAM);

    check_on_map(map, &cfg.start)?;
    let mut truth = cfg.start;
    let mut pf = ParticleSet::init(
        &cfg.start,
        &cfg.initial_covariance,
        cfg.particles,
        &mut filter_rng,
    )?;
    let mut est = pf.estimate_mean()?;
    let mut records = Vec::new();

    for k in 0..cfg.max_steps {
        if reached((est.x, est.y), cfg) {
            break;
        }
        let step = k + 1;
        let action = match cfg.planner {
            PlannerKind::Straight => straight_action(&est, cfg.goal, &cfg.obs_actions),
            _ => plan(map, &est, &pcfg).map_err(|e| e.at_step(step))?.0,
        };
        let u = pcfg.control_for(action);
        let gdet = observability_matrix(map, &est, &u)
            .map(|o| gramian_det(&o))
            .ok();
        let period = if gdet.is_some_and(|d| d > threshold) {
            cfg.fast_measurement_period
        } else {
            cfg.measurement_period
        };

        truth = step_noisy(&truth, &u, cfg.dt, &cfg.noise, &mut truth_rng);
        check_on_map(map, &truth).map_err(|e| e.at_step(step))?;
        pf.propagate(&u, cfg.dt, &cfg.noise, &mut filter_rng);

        let measurement = if k % period == 0 {
            let z = measure(map, &truth, cfg.noise.sigma_z, &mut truth_rng)
                .map_err(|e| e.at_step(step))?;
            pf.update_weights(map, z, cfg.filter_sigma_z)
                .map_err(|e| e.at_step(step))?;
            pf.resample_if_degenerate(&mut filter_rng);
            Some(z)
        } else {
            None
        };

        est = pf.estimate_mean().map_err(|e| e.at_step(step))?;
        records.push(SimTraceRecord {
            step,
            truth,
            estimate: est,
            trace_position: pf.trace_position(),
            entropy: None,
            measurement,
            control: u,
            gramian_det: gdet,
        });
    }
    Ok(records)
}

/// Re-runs the particle filter from a trace's logged controls and measurements.
///
/// Returns the estimate and position-covariance trace after every step; for a
/// trace produced by [`run_observability_sim`] with the same config these
/// match the logged columns exactly.
pub fn replay_filter(
    map: &GridMap,
    cfg: &SimConfig,
    records: &[SimTraceRecord],
) -> Result<Vec<(Pose, f64)>> {
    let mut filter_rng = rng_for(cfg.seed, FILTER_STREAM);
    let mut pf = ParticleSet::init(
        &cfg.start,
        &cfg.initial_covariance,
        cfg.particles,
        &mut filter_rng,
    )?;
    records
        .iter()
        .map(|r| {
            pf.propagate(&r.control, cfg.dt, &cfg.noise, &mut filter_rng);
            if let Some(z) = r.measurement {
                pf.update_weights(map, z, cfg.filter_sigma_z)
                    .map_err(|e| e.at_step(r.step))?;
                pf.resample_if_degenerate(&mut filter_rng);
            }
            Ok((
                pf.estimate_mean().map_err(|e| e.at_step(r.step))?,
                pf.trace_position(),
            ))
        })
        .collect()
}

/// Initial belief: the start distribution integrated over grid cells covering the map.
pub fn initial_belief(map: &GridMap, cfg: &SimConfig) -> Result<BeliefGrid> {
    BeliefGrid::covering(map, cfg.belief_resolution, cfg.start.theta)?.with_gaussian(
        cfg.start.x,
        cfg.start.y,
        cfg.initial_covariance[(0, 0)].sqrt(),
        cfg.initial_covariance[(1, 1)].sqrt(),
    )
}

pub fn run_eer_sim(map: &GridMap, cfg: &SimConfig) -> Result<Vec<SimTraceRecord>> {
    Ok(run_eer_sim_with_phases(map, cfg)?.records)
}

/// Belief-grid run guided by expected entropy reduction.
///
/// Each step: measure and update the belief, choose a turn rate, move the
/// truth (turn, then translate), predict the belief, log. The logged
/// estimate is the belief mean with the tracked heading.
pub fn run_eer_sim_with_phases(map: &GridMap, cfg: &SimConfig) -> Result<EerRun> {
    cfg.validate()?;
    let ecfg = cfg.eer_planner();
    let mut truth_rng = rng_for(cfg.seed, TRUTH_STREAM);

    check_on_map(map, &cfg.start)?;
    let mut truth = cfg.start;
    let mut belief = initial_belief(map, cfg)?;
    let initial_entropy = belief.entropy();
    let mut records = Vec::new();
    let mut phases = Vec::new();

    for k in 0..cfg.max_steps {
        if reached(belief.mean_position(), cfg) {
            break;
        }
        let step = k + 1;
        let at = |e: Error| e.at_step(step);
        let prior = belief.entropy();
        let z = measure(map, &truth, cfg.noise.sigma_z, &mut truth_rng).map_err(at)?;
        belief = belief
            .measurement_update(z, map, cfg.filter_sigma_z)
            .map_err(at)?;
        let posterior = belief.entropy();

        let u = choose_action(&belief, map, &ecfg).map_err(at)?;
        let turn = ControlInput::new(0.0, u.omega);
        let advance = ControlInput::new(u.v, 0.0);
        truth = step_noisy(&truth, &turn, cfg.dt, &cfg.noise, &mut truth_rng);
        truth = step_noisy(&truth, &advance, cfg.dt, &cfg.noise, &mut truth_rng);
        check_on_map(map, &truth).map_err(at)?;

        belief = belief
            .predict(&u, cfg.dt, ecfg.motion_kernel_sigma)
            .map_err(at)?;
        let predicted = belief.entropy();
        let (ex, ey) = belief.mean_position();
        phases.push(EntropyPhases {
            prior,
            posterior,
            predicted,
        });
        records.push(SimTraceRecord {
            step,
            truth,
            estimate: Pose::new(ex, ey, belief.heading()),
            trace_position: belief.trace_position(),
            entropy: Some(predicted),
            measurement: Some(z),
            control: u,
            gramian_det: None,
        });
    }
    Ok(EerRun {
        records,
        phases,
        initial_entropy,
    })
}
