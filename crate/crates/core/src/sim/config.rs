//! Simulation configuration and its TOML file format.
//!
//! All keys live at the top level. Angles in the file are in degrees; the
//! in-memory [`SimConfig`] uses radians. Exactly one of `map_file`,
//! `map_builtin` and `map_spec` selects the map; relative paths are resolved
//! against the directory holding the config file. Unknown keys are rejected.
//!
//! ```toml
//! seed = 7                        # required
//! planner = "observability"       # observability | eer | straight
//! map_builtin = "lab_like"        # or map_file = "room.magmap", map_spec = "room.toml"
//! start = [1.0, 3.75, -30.0]      # x, y (m), heading (deg)
//! goal = [4.75, 1.5]
//! goal_radius = 0.25
//! max_steps = 120
//! particles = 1000
//! sigma_z = 100.0                 # sensor noise used by the truth model (nT)
//! # filter_sigma_z = 100.0        # sensor noise assumed by the estimators; defaults to sigma_z
//! sigma_xy_per_step = 0.01        # m per 5 cm travelled
//! sigma_theta_per_step_deg = 1.0  # deg per 10 deg turned
//! initial_sigma_xy = 0.1
//! initial_sigma_theta_deg = 2.0
//! v = 0.2
//! dt = 1.0
//! w_goal = 1.0
//! w_obs = 1.5
//! horizon = 5
//! obs_actions_deg = [-45.0, -22.0, 0.0, 22.0, 45.0]
//! include_terminal = false
//! eps_det = 1e-12
//! eer_actions_deg_per_s = [-40.0, -20.0, 0.0, 20.0, 40.0]
//! belief_resolution = 0.25
//! # motion_kernel_sigma = 0.04    # defaults to the translational process noise of one step
//! n_z_quadrature = 21
//! measurement_period = 1
//! fast_measurement_period = 1
//! # obs_rate_threshold = 1e6      # defaults to the 75th percentile of the map's Gramian determinant
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;

use super::scenario::{Builtin, MapSpec};
use crate::belief::{default_kernel_sigma, EerPlannerConfig};
use crate::error::{Error, Result};
use crate::map::GridMap;
use crate::planner::{ObsPlannerConfig, PlannerWeights};
use crate::vehicle::{NoiseConfig, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlannerKind {
    Observability,
    Eer,
    Straight,
}

impl PlannerKind {
    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Observability => "observability",
            PlannerKind::Eer => "eer",
            PlannerKind::Straight => "straight",
        }
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "observability" => Ok(PlannerKind::Observability),
            "eer" => Ok(PlannerKind::Eer),
            "straight" => Ok(PlannerKind::Straight),
            other => Err(Error::Config(format!(
                "unknown planner `{other}` (expected observability, eer or straight)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSource {
    File(PathBuf),
    Builtin(Builtin),
    Spec(MapSpec),
}

impl MapSource {
    pub fn load(&self) -> Result<GridMap> {
        match self {
            MapSource::File(p) => GridMap::load(p),
            MapSource::Builtin(b) => Ok(b.map()),
            MapSource::Spec(s) => s.build(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub map: MapSource,
    pub planner: PlannerKind,
    pub start: Pose,
    pub goal: (f64, f64),
    pub goal_radius: f64,
    pub max_steps: usize,
    pub seed: u64,
    /// Noise of the simulated truth (process and sensor).
    pub noise: NoiseConfig,
    /// Sensor noise assumed by the particle filter and the belief grid.
    pub filter_sigma_z: f64,
    pub v: f64,
    pub dt: f64,
    pub weights: PlannerWeights,
    pub horizon: usize,
    /// Heading change per step, radians.
    pub obs_actions: Vec<f64>,
    pub include_terminal: bool,
    pub eps_det: f64,
    /// Turn rates, rad/s.
    pub eer_actions: Vec<f64>,
    pub belief_resolution: f64,
    /// `None` uses the one-step translational process noise.
    pub motion_kernel_sigma: Option<f64>,
    pub n_z_quadrature: usize,
    pub initial_covariance: Matrix3<f64>,
    pub particles: usize,
    pub measurement_period: usize,
    pub fast_measurement_period: usize,
    /// `None` derives the threshold from the map.
    pub obs_rate_threshold: Option<f64>,
}

impl SimConfig {
    /// Defaults for every tunable, with the given map, planner and mission.
    pub fn new(
        map: MapSource,
        planner: PlannerKind,
        start: Pose,
        goal: (f64, f64),
        seed: u64,
    ) -> Self {
        let noise = NoiseConfig::simulation_default();
        let obs = ObsPlannerConfig::with_goal(goal);
        let eer = EerPlannerConfig::with_goal(goal);
        Self {
            map,
            planner,
            start,
            goal,
            goal_radius: 0.25,
            max_steps: 120,
            seed,
            noise,
            filter_sigma_z: noise.sigma_z,
            v: obs.v,
            dt: obs.dt,
            weights: PlannerWeights::default(),
            horizon: obs.horizon,
            obs_actions: obs.action_set,
            include_terminal: obs.include_terminal,
            eps_det: obs.eps_det,
            eer_actions: eer.action_set,
            belief_resolution: 0.25,
            motion_kernel_sigma: None,
            n_z_quadrature: eer.n_z_quadrature,
            initial_covariance: crate::particle_filter::default_initial_covariance(),
            particles: 1000,
            measurement_period: 1,
            fast_measurement_period: 1,
            obs_rate_threshold: None,
        }
    }

    /// A built-in scenario with its default mission.
    pub fn builtin(b: Builtin, planner: PlannerKind, seed: u64) -> Self {
        let (start, goal) = b.mission();
        Self {
            motion_kernel_sigma: b.motion_kernel_sigma(),
            ..Self::new(MapSource::Builtin(b), planner, start, goal, seed)
        }
    }

    pub fn obs_planner(&self) -> ObsPlannerConfig {
        ObsPlannerConfig {
            horizon: self.horizon,
            action_set: self.obs_actions.clone(),
            v: self.v,
            dt: self.dt,
            weights: self.weights,
            goal: self.goal,
            eps_det: self.eps_det,
            include_terminal: self.include_terminal,
        }
    }

    pub fn eer_planner(&self) -> EerPlannerConfig {
        EerPlannerConfig {
            action_set: self.eer_actions.clone(),
            v: self.v,
            dt: self.dt,
            weights: self.weights,
            goal: self.goal,
            sigma_z: self.filter_sigma_z,
            motion_kernel_sigma: self
                .motion_kernel_sigma
                .unwrap_or_else(|| default_kernel_sigma(&self.noise, self.v * self.dt)),
            n_z_quadrature: self.n_z_quadrature,
        }
    }

    /// Same configuration with `w_obs = ratio * w_goal`.
    pub fn with_ratio(&self, ratio: f64) -> Self {
        let mut c = self.clone();
        c.weights.w_obs = ratio * c.weights.w_goal;
        c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.goal_radius > 0.0) {
            return bad(format!(
                "goal_radius must be positive, got {}",
                self.goal_radius
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if self.particles == 0 {
            return bad("particles must be at least 1".into());
        }
        if self.measurement_period == 0 || self.fast_measurement_period == 0 {
            return bad("measurement periods must be at least 1".into());
        }
        if !(self.noise.sigma_z >= 0.0
            && self.noise.sigma_xy_per_step >= 0.0
            && self.noise.sigma_theta_per_step >= 0.0)
        {
            return bad("noise levels must be non-negative".into());
        }
        if !(self.filter_sigma_z > 0.0) {
            return bad(
                "filter_sigma_z must be positive (set it explicitly when sigma_z = 0)".into(),
            );
        }
        if !(self.belief_resolution > 0.0) {
            return bad("belief_resolution must be positive".into());
        }
        if !self
            .initial_covariance
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
        {
            return bad("initial covariance must be finite and non-negative".into());
        }
        let as_config = |e: Error| Error::Config(e.to_string());
        match self.planner {
            PlannerKind::Observability | PlannerKind::Straight => {
                self.obs_planner().validate().map_err(as_config)?
            }
            PlannerKind::Eer => self.eer_planner().validate().map_err(as_config)?,
        }
        Ok(())
    }
}

/// On-disk form of [`SimConfig`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: u64,
    planner: String,
    map_file: Option<PathBuf>,
    map_builtin: Option<String>,
    map_spec: Option<PathBuf>,
    start: [f64; 3],
    goal: [f64; 2],
    goal_radius: Option<f64>,
    max_steps: Option<usize>,
    particles: Option<usize>,
    sigma_z: Option<f64>,
    filter_sigma_z: Option<f64>,
    sigma_xy_per_step: Option<f64>,
    sigma_theta_per_step_deg: Option<f64>,
    initial_sigma_xy: Option<f64>,
    initial_sigma_theta_deg: Option<f64>,
    v: Option<f64>,
    dt: Option<f64>,
    w_goal: Option<f64>,
    w_obs: Option<f64>,
    horizon: Option<usize>,
    obs_actions_deg: Option<Vec<f64>>,
    include_terminal: Option<bool>,
    eps_det: Option<f64>,
    eer_actions_deg_per_s: Option<Vec<f64>>,
    belief_resolution: Option<f64>,
    motion_kernel_sigma: Option<f64>,
    n_z_quadrature: Option<usize>,
    measurement_period: Option<usize>,
    fast_measurement_period: Option<usize>,
    obs_rate_threshold: Option<f64>,
}

fn degrees(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(f64::to_radians).collect()
}

/// Parses a config; `base_dir` anchors relative map paths.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<SimConfig> {
    let f: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base_dir.join(p)
        }
    };

    let map = match (&f.map_file, &f.map_builtin, &f.map_spec) {
        (Some(p), None, None) => MapSource::File(resolve(p)),
        (None, Some(name), None) => MapSource::Builtin(name.parse()?),
        (None, None, Some(p)) => MapSource::Spec(MapSpec::load(resolve(p))?),
        _ => {
            return Err(Error::Config(
                "exactly one of map_file, map_builtin or map_spec must be given".into(),
            ))
        }
    };
    let planner: PlannerKind = f.planner.parse()?;
    let start = Pose::new(f.start[0], f.start[1], f.start[2].to_radians());
    let mut c = SimConfig::new(map, planner, start, (f.goal[0], f.goal[1]), f.seed);

    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = f.$field { c.$field = v; } )* };
    }
    set!(
        goal_radius,
        max_steps,
        particles,
        v,
        dt,
        horizon,
        include_terminal,
        eps_det
    );
    set!(
        belief_resolution,
        n_z_quadrature,
        measurement_period,
        fast_measurement_period
    );
    c.motion_kernel_sigma = f.motion_kernel_sigma;
    c.obs_rate_threshold = f.obs_rate_threshold;
    if let Some(s) = f.sigma_z {
        c.noise.sigma_z = s;
    }
    c.filter_sigma_z = f.filter_sigma_z.unwrap_or(c.noise.sigma_z);
    if let Some(s) = f.sigma_xy_per_step {
        c.noise.sigma_xy_per_step = s;
    }
    if let Some(s) = f.sigma_theta_per_step_deg {
        c.noise.sigma_theta_per_step = s.to_radians();
    }
    if let Some(w) = f.w_goal {
        c.weights.w_goal = w;
    }
    if let Some(w) = f.w_obs {
        c.weights.w_obs = w;
    }
    if let Some(a) = f.obs_actions_deg {
        c.obs_actions = degrees(a);
    }
    if let Some(a) = f.eer_actions_deg_per_s {
        c.eer_actions = degrees(a);
    }
    if f.initial_sigma_xy.is_some() || f.initial_sigma_theta_deg.is_some() {
        let sxy = f.initial_sigma_xy.unwrap_or(0.1);
        let sth = f.initial_sigma_theta_deg.unwrap_or(2.0).to_radians();
        c.initial_covariance =
            Matrix3::from_diagonal(&Vector3::new(sxy * sxy, sxy * sxy, sth * sth));
    }
    c.validate()?;
    Ok(c)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
