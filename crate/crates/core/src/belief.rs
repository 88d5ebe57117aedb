//! Histogram belief over position and one-step expected-entropy-reduction guidance.
//!
//! The belief is a probability mass function over the cells of a regular
//! `(x, y)` grid; cell `(i, j)` is centered at `origin + (i, j) * resolution`.
//! Heading is carried as a single deterministic value advanced by the
//! commanded turn rate.
//!
//! Motion prediction turns first and then translates along the new heading by
//! `v * dt`. The shift is applied with bilinear mass splitting between the
//! four cells around the displaced position, followed by a truncated
//! isotropic Gaussian blur. Mass pushed off the grid is dropped and the
//! remainder renormalized.
//!
//! The expected posterior entropy of an action is computed against a
//! discretized measurement: the predicted measurement range is split into
//! `n_z` equal-width bins (the outer two extended to infinity) and the
//! posterior for each bin uses the exact bin probability `P(bin | cell)` as
//! the likelihood. With that choice the expected posterior entropy can never
//! exceed the prior entropy.

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::map::GridMap;
use crate::planner::PlannerWeights;
use crate::vehicle::{normalize_angle, ControlInput, NoiseConfig, Pose, XY_NOISE_STEP};

/// Half-width of the predicted-measurement quadrature range, in sensor sigmas.
const Z_RANGE_SIGMAS: f64 = 3.0;
/// Kernel truncation radius in kernel sigmas.
const KERNEL_SIGMAS: f64 = 3.0;
/// Fractional shifts closer than this to a whole cell are treated as whole.
const SHIFT_SNAP: f64 = 1e-12;
/// Relative cost difference below which two actions count as tied.
const COST_TIE_RTOL: f64 = 1e-12;
/// Cells lighter than this do not widen the measurement range (they still count in the outer bins).
const RANGE_MASS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefGrid {
    origin_x: f64,
    origin_y: f64,
    resolution: f64,
    nx: usize,
    ny: usize,
    mass: Vec<f64>,
    heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EerPlannerConfig {
    /// Candidate turn rates, rad/s.
    pub action_set: Vec<f64>,
    pub v: f64,
    pub dt: f64,
    pub weights: PlannerWeights,
    pub goal: (f64, f64),
    pub sigma_z: f64,
    /// Standard deviation of the motion blur, meters.
    pub motion_kernel_sigma: f64,
    pub n_z_quadrature: usize,
}

impl EerPlannerConfig {
    /// Turn rates {-40, -20, 0, 20, 40} deg/s at 0.2 m/s, 1 s steps, 21 measurement bins.
    pub fn with_goal(goal: (f64, f64)) -> Self {
        let noise = NoiseConfig::simulation_default();
        let v = 0.2;
        let dt = 1.0;
        Self {
            action_set: [-40.0f64, -20.0, 0.0, 20.0, 40.0]
                .iter()
                .map(|d| d.to_radians())
                .collect(),
            v,
            dt,
            weights: PlannerWeights::default(),
            goal,
            sigma_z: noise.sigma_z,
            motion_kernel_sigma: default_kernel_sigma(&noise, v * dt),
            n_z_quadrature: 21,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.action_set.is_empty() || self.action_set.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument(
                "action set must be non-empty and finite".into(),
            ));
        }
        if !(self.v >= 0.0) || !(self.dt > 0.0) {
            return Err(Error::InvalidArgument("need v >= 0 and dt > 0".into()));
        }
        if !(self.sigma_z > 0.0) {
            return Err(Error::InvalidArgument("sigma_z must be positive".into()));
        }
        if !(self.motion_kernel_sigma >= 0.0) {
            return Err(Error::InvalidArgument(
                "motion kernel sigma must be >= 0".into(),
            ));
        }
        if self.n_z_quadrature < 3 {
            return Err(Error::InvalidArgument(
                "need at least 3 measurement bins".into(),
            ));
        }
        if !(self.weights.w_goal >= 0.0) || !(self.weights.w_obs >= 0.0) {
            return Err(Error::InvalidArgument(
                "planner weights must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn control_for(&self, omega: f64) -> ControlInput {
        ControlInput::new(self.v, omega)
    }
}

/// Translational process noise accumulated over a step of `step_length` meters.
pub fn default_kernel_sigma(noise: &NoiseConfig, step_length: f64) -> f64 {
    noise.sigma_xy_per_step * step_length.abs() / XY_NOISE_STEP
}

/// Standard normal CDF.
fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

fn entropy_of(masses: impl Iterator<Item = f64>) -> f64 {
    -masses.filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}

impl BeliefGrid {
    fn check_geometry(resolution: f64, nx: usize, ny: usize) -> Result<()> {
        if !(resolution > 0.0 && resolution.is_finite()) || nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!(
                "bad belief grid geometry: resolution {resolution}, {nx}x{ny}"
            )));
        }
        Ok(())
    }

    pub fn uniform(
        origin: (f64, f64),
        resolution: f64,
        nx: usize,
        ny: usize,
        heading: f64,
    ) -> Result<Self> {
        Self::check_geometry(resolution, nx, ny)?;
        let m = 1.0 / (nx * ny) as f64;
        Ok(Self {
            origin_x: origin.0,
            origin_y: origin.1,
            resolution,
            nx,
            ny,
            mass: vec![m; nx * ny],
            heading: normalize_angle(heading),
        })
    }

    /// Builds a belief from unnormalized row-major masses.
    pub fn from_masses(
        origin: (f64, f64),
        resolution: f64,
        nx: usize,
        ny: usize,
        masses: Vec<f64>,
        heading: f64,
    ) -> Result<Self> {
        Self::check_geometry(resolution, nx, ny)?;
        if masses.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "expected {} masses, got {}",
                nx * ny,
                masses.len()
            )));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidArgument(
                "masses must be finite and non-negative".into(),
            ));
        }
        let mut b = Self {
            origin_x: origin.0,
            origin_y: origin.1,
            resolution,
            nx,
            ny,
            mass: masses,
            heading: normalize_angle(heading),
        };
        b.normalize()?;
        Ok(b)
    }

    /// Grid with cells on the map nodes spaced by `resolution`, uniform mass.
    pub fn covering(map: &GridMap, resolution: f64, heading: f64) -> Result<Self> {
        let b = map.bounds();
        let nx = ((b.x_max - b.x_min) / resolution + 1e-9).floor() as usize + 1;
        let ny = ((b.y_max - b.y_min) / resolution + 1e-9).floor() as usize + 1;
        Self::uniform((b.x_min, b.y_min), resolution, nx, ny, heading)
    }

    /// Replaces the mass with a Gaussian around `mean` (cell-integrated, axis-aligned).
    pub fn with_gaussian(
        mut self,
        mean_x: f64,
        mean_y: f64,
        sigma_x: f64,
        sigma_y: f64,
    ) -> Result<Self> {
        let axis = |n: usize, origin: f64, mu: f64, sigma: f64| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let c = origin + i as f64 * self.resolution;
                    let (lo, hi) = (c - 0.5 * self.resolution, c + 0.5 * self.resolution);
                    if sigma > 0.0 {
                        std_normal_cdf((hi - mu) / sigma) - std_normal_cdf((lo - mu) / sigma)
                    } else if mu >= lo && mu < hi {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let px = axis(self.nx, self.origin_x, mean_x, sigma_x);
        let py = axis(self.ny, self.origin_y, mean_y, sigma_y);
        for (row, a) in self.mass.chunks_mut(self.ny).zip(&px) {
            for (m, b) in row.iter_mut().zip(&py) {
                *m = a * b;
            }
        }
        self.normalize()?;
        Ok(self)
    }

    fn normalize(&mut self) -> Result<()> {
        let total: f64 = self.mass.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateBelief);
        }
        for m in &mut self.mass {
            *m /= total;
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.ny + j]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin_x + i as f64 * self.resolution,
            self.origin_y + j as f64 * self.resolution,
        )
    }

    fn center_of(&self, k: usize) -> (f64, f64) {
        self.cell_center(k / self.ny, k % self.ny)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy_of(self.mass.iter().copied())
    }

    /// Most probable cell center; ties go to the lowest row-major index.
    pub fn most_probable_position(&self) -> (f64, f64) {
        let mut best = 0;
        for (k, &m) in self.mass.iter().enumerate() {
            if m > self.mass[best] {
                best = k;
            }
        }
        self.center_of(best)
    }

    /// Most probable position refined to sub-cell precision.
    ///
    /// Starts at the argmax cell and shifts it along each axis by the centroid
    /// offset of the 3×3 block around it. Axes where the block would leave the
    /// grid are not refined.
    pub fn mode_position(&self) -> (f64, f64) {
        let mut best = 0;
        for (k, &m) in self.mass.iter().enumerate() {
            if m > self.mass[best] {
                best = k;
            }
        }
        let (i, j) = (best / self.ny, best % self.ny);
        let (cx, cy) = self.cell_center(i, j);
        let interior_x = i > 0 && i + 1 < self.nx;
        let interior_y = j > 0 && j + 1 < self.ny;
        let rows = |di: usize| -> f64 {
            (j.saturating_sub(1)..=(j + 1).min(self.ny - 1))
                .map(|jj| self.mass[(i + di - 1) * self.ny + jj])
                .sum()
        };
        let cols = |dj: usize| -> f64 {
            (i.saturating_sub(1)..=(i + 1).min(self.nx - 1))
                .map(|ii| self.mass[ii * self.ny + j + dj - 1])
                .sum()
        };
        let offset = |lo: f64, mid: f64, hi: f64| (hi - lo) / (lo + mid + hi);
        let dx = if interior_x {
            offset(rows(0), rows(1), rows(2))
        } else {
            0.0
        };
        let dy = if interior_y {
            offset(cols(0), cols(1), cols(2))
        } else {
            0.0
        };
        (cx + dx * self.resolution, cy + dy * self.resolution)
    }

    pub fn mean_position(&self) -> (f64, f64) {
        self.mass
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(x, y), (k, &m)| {
                let (cx, cy) = self.center_of(k);
                (x + m * cx, y + m * cy)
            })
    }

    /// Trace of the position covariance of the cell-center distribution, m².
    pub fn trace_position(&self) -> f64 {
        let (mx, my) = self.mean_position();
        self.mass
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let (cx, cy) = self.center_of(k);
                m * ((cx - mx).powi(2) + (cy - my).powi(2))
            })
            .sum()
    }

    /// Field at every cell center under the current heading; `None` off the map.
    fn cell_fields(&self, map: &GridMap) -> Vec<Option<f64>> {
        (0..self.mass.len())
            .map(|k| {
                let (x, y) = self.center_of(k);
                map.field_with_heading(&Pose::new(x, y, self.heading)).ok()
            })
            .collect()
    }

    /// Bayes update with a Gaussian sensor model.
    pub fn measurement_update(&self, z: f64, map: &GridMap, sigma_z: f64) -> Result<Self> {
        if !(sigma_z > 0.0) {
            return Err(Error::InvalidArgument("sigma_z must be positive".into()));
        }
        let inv = 1.0 / (2.0 * sigma_z * sigma_z);
        let fields = self.cell_fields(map);
        let log_w: Vec<f64> = self
            .mass
            .iter()
            .zip(&fields)
            .map(|(&m, h)| match h {
                Some(h) if m > 0.0 => m.ln() - (z - h).powi(2) * inv,
                _ => f64::NEG_INFINITY,
            })
            .collect();
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::DegenerateBelief);
        }
        let mut out = self.clone();
        for (m, l) in out.mass.iter_mut().zip(log_w) {
            *m = (l - max).exp();
        }
        out.normalize()?;
        Ok(out)
    }

    /// Motion update: turn by `omega * dt`, shift by `v * dt` along the new heading, blur.
    pub fn predict(&self, u: &ControlInput, dt: f64, kernel_sigma: f64) -> Result<Self> {
        let heading = normalize_angle(self.heading + u.omega * dt);
        let (s, c) = heading.sin_cos();
        let sx = u.v * dt * c / self.resolution;
        let sy = u.v * dt * s / self.resolution;

        let mut out = Self {
            mass: self.shifted(sx, sy),
            heading,
            ..self.clone()
        };
        if kernel_sigma > 0.0 {
            out.blur(kernel_sigma / self.resolution);
        }
        out.normalize()?;
        Ok(out)
    }

    fn shifted(&self, sx: f64, sy: f64) -> Vec<f64> {
        let split = |s: f64| -> (isize, f64) {
            let base = s.floor();
            let mut frac = s - base;
            let mut base = base as isize;
            if frac < SHIFT_SNAP {
                frac = 0.0;
            } else if 1.0 - frac < SHIFT_SNAP {
                frac = 0.0;
                base += 1;
            }
            (base, frac)
        };
        let (bx, fx) = split(sx);
        let (by, fy) = split(sy);
        let parts = [
            (0, 0, (1.0 - fx) * (1.0 - fy)),
            (1, 0, fx * (1.0 - fy)),
            (0, 1, (1.0 - fx) * fy),
            (1, 1, fx * fy),
        ];
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let mut out = vec![0.0; self.mass.len()];
        for (k, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let i = (k / self.ny) as isize;
            let j = (k % self.ny) as isize;
            for &(di, dj, w) in &parts {
                if w == 0.0 {
                    continue;
                }
                let (ti, tj) = (i + bx + di, j + by + dj);
                if ti >= 0 && ti < nx && tj >= 0 && tj < ny {
                    out[(ti * ny + tj) as usize] += m * w;
                }
            }
        }
        out
    }

    /// Separable truncated Gaussian blur with `sigma_cells` in grid units.
    fn blur(&mut self, sigma_cells: f64) {
        let radius = (KERNEL_SIGMAS * sigma_cells).ceil() as isize;
        if radius == 0 {
            return;
        }
        let mut kernel: Vec<f64> = (-radius..=radius)
            .map(|d| (-(d * d) as f64 / (2.0 * sigma_cells * sigma_cells)).exp())
            .collect();
        let total: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|w| *w /= total);

        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let mut tmp = vec![0.0; self.mass.len()];
        // along x
        for i in 0..nx {
            for j in 0..ny {
                let m = self.mass[(i * ny + j) as usize];
                if m == 0.0 {
                    continue;
                }
                for (o, &w) in kernel.iter().enumerate() {
                    let ti = i + o as isize - radius;
                    if ti >= 0 && ti < nx {
                        tmp[(ti * ny + j) as usize] += m * w;
                    }
                }
            }
        }
        // along y
        let mut out = vec![0.0; self.mass.len()];
        for i in 0..nx {
            for j in 0..ny {
                let m = tmp[(i * ny + j) as usize];
                if m == 0.0 {
                    continue;
                }
                for (o, &w) in kernel.iter().enumerate() {
                    let tj = j + o as isize - radius;
                    if tj >= 0 && tj < ny {
                        out[(i * ny + tj) as usize] += m * w;
                    }
                }
            }
        }
        self.mass = out;
    }

    /// Discretized predictive measurement distribution as `(bin center, probability)`.
    pub fn predictive_measurement_quadrature(
        &self,
        map: &GridMap,
        sigma_z: f64,
        n_z: usize,
    ) -> Result<Vec<(f64, f64)>> {
        let q = MeasurementQuadrature::new(self, map, sigma_z, n_z)?;
        Ok(q.centers.iter().copied().zip(q.bin_probs).collect())
    }
}

/// Per-cell bin likelihoods `P(bin | cell)` for the cells carrying mass.
struct MeasurementQuadrature {
    centers: Vec<f64>,
    /// (prior mass, likelihood per bin) per supported cell.
    cells: Vec<(f64, Vec<f64>)>,
    bin_probs: Vec<f64>,
}

impl MeasurementQuadrature {
    fn new(b: &BeliefGrid, map: &GridMap, sigma_z: f64, n_z: usize) -> Result<Self> {
        if !(sigma_z > 0.0) {
            return Err(Error::InvalidArgument("sigma_z must be positive".into()));
        }
        if n_z < 3 {
            return Err(Error::InvalidArgument(
                "need at least 3 measurement bins".into(),
            ));
        }
        let fields = b.cell_fields(map);
        let support: Vec<(f64, f64)> = b
            .mass
            .iter()
            .zip(&fields)
            .filter_map(|(&m, h)| match h {
                Some(h) if m > 0.0 => Some((m, *h)),
                _ => None,
            })
            .collect();
        let total: f64 = support.iter().map(|(m, _)| m).sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateBelief);
        }

        let heavy = support.iter().filter(|s| s.0 >= RANGE_MASS_FLOOR * total);
        let (h_min, h_max) = heavy.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.1), hi.max(s.1))
        });
        let lo = h_min - Z_RANGE_SIGMAS * sigma_z;
        let hi = h_max + Z_RANGE_SIGMAS * sigma_z;
        let width = (hi - lo) / n_z as f64;
        let centers: Vec<f64> = (0..n_z).map(|k| lo + (k as f64 + 0.5) * width).collect();
        let edges: Vec<f64> = (0..=n_z)
            .map(|k| match k {
                0 => f64::NEG_INFINITY,
                k if k == n_z => f64::INFINITY,
                k => lo + k as f64 * width,
            })
            .collect();

        let mut bin_probs = vec![0.0; n_z];
        let cells: Vec<(f64, Vec<f64>)> = support
            .into_iter()
            .map(|(m, h)| {
                let m = m / total;
                let cdf: Vec<f64> = edges
                    .iter()
                    .map(|e| std_normal_cdf((e - h) / sigma_z))
                    .collect();
                let lik: Vec<f64> = cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
                for (p, l) in bin_probs.iter_mut().zip(&lik) {
                    *p += m * l;
                }
                (m, lik)
            })
            .collect();
        Ok(Self {
            centers,
            cells,
            bin_probs,
        })
    }

    /// `E_z[H(posterior)]` over the bins.
    fn expected_posterior_entropy(&self) -> f64 {
        self.bin_probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| p * entropy_of(self.cells.iter().map(|(m, lik)| m * lik[k] / p)))
            .sum()
    }
}

/// Diagnostics for one candidate action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionScore {
    pub omega: f64,
    pub eer: f64,
    pub dist: f64,
    pub cost: f64,
}

/// Expected entropy reduction `H(b) - E_z[H(b' | z)]` for action `u`, where `b'` is the prediction.
pub fn eer(
    b_post: &BeliefGrid,
    u: &ControlInput,
    map: &GridMap,
    cfg: &EerPlannerConfig,
) -> Result<f64> {
    let predicted = b_post.predict(u, cfg.dt, cfg.motion_kernel_sigma)?;
    eer_with_prediction(b_post, &predicted, map, cfg.sigma_z, cfg.n_z_quadrature)
}

fn eer_with_prediction(
    b_post: &BeliefGrid,
    predicted: &BeliefGrid,
    map: &GridMap,
    sigma_z: f64,
    n_z: usize,
) -> Result<f64> {
    let q = MeasurementQuadrature::new(predicted, map, sigma_z, n_z)?;
    Ok(b_post.entropy() - q.expected_posterior_entropy())
}

/// Distance from the most probable predicted position to the goal.
pub fn dist_to_goal(b: &BeliefGrid, u: &ControlInput, cfg: &EerPlannerConfig) -> Result<f64> {
    let predicted = b.predict(u, cfg.dt, cfg.motion_kernel_sigma)?;
    let (x, y) = predicted.mode_position();
    Ok((x - cfg.goal.0).hypot(y - cfg.goal.1))
}

/// Whether a fixed-speed vehicle at `(x, y, heading)` can turn around at the
/// fastest available rate, in either direction, without leaving the region
/// where the map stencil fits.
fn can_turn_around(
    map: &GridMap,
    (x, y, heading): (f64, f64, f64),
    cfg: &EerPlannerConfig,
) -> bool {
    if !map.stencil_fits(x, y) {
        return false;
    }
    let max_rate = cfg.action_set.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let turn = max_rate * cfg.dt;
    if turn == 0.0 || cfg.v == 0.0 {
        return true;
    }
    let steps = (std::f64::consts::PI / turn).ceil() as usize;
    [1.0, -1.0].iter().any(|sign| {
        let (mut px, mut py, mut ph) = (x, y, heading);
        (0..steps).all(|_| {
            ph += sign * turn;
            px += cfg.v * cfg.dt * ph.cos();
            py += cfg.v * cfg.dt * ph.sin();
            map.stencil_fits(px, py)
        })
    })
}

/// Scores every action with `w_obs * 0.5^eer + w_goal * dist`.
///
/// An action costs `+inf` when, from the displaced belief mean, the vehicle
/// could not turn around without coming within one map cell of the edge.
pub fn score_actions(
    b: &BeliefGrid,
    map: &GridMap,
    cfg: &EerPlannerConfig,
) -> Result<Vec<ActionScore>> {
    cfg.validate()?;
    let (mx, my) = b.mean_position();
    cfg.action_set
        .par_iter()
        .map(|&omega| {
            let u = cfg.control_for(omega);
            let heading = b.heading + omega * cfg.dt;
            let step = cfg.v * cfg.dt;
            let next = (
                mx + step * heading.cos(),
                my + step * heading.sin(),
                heading,
            );
            let clear = can_turn_around(map, next, cfg);
            if !clear {
                let inf = f64::INFINITY;
                return Ok(ActionScore {
                    omega,
                    eer: f64::NAN,
                    dist: inf,
                    cost: inf,
                });
            }
            let predicted = b.predict(&u, cfg.dt, cfg.motion_kernel_sigma)?;
            let (x, y) = predicted.mode_position();
            let dist = (x - cfg.goal.0).hypot(y - cfg.goal.1);
            let eer = if cfg.weights.w_obs == 0.0 {
                0.0
            } else {
                eer_with_prediction(b, &predicted, map, cfg.sigma_z, cfg.n_z_quadrature)?
            };
            let cost = cfg.weights.w_obs * 0.5f64.powf(eer) + cfg.weights.w_goal * dist;
            Ok(ActionScore {
                omega,
                eer,
                dist,
                cost,
            })
        })
        .collect()
}

/// Index of the chosen action: minimum cost, near-ties to the smallest |omega|, then lowest index.
pub fn select_action(scores: &[ActionScore]) -> usize {
    let min = scores.iter().map(|s| s.cost).fold(f64::INFINITY, f64::min);
    let tol = COST_TIE_RTOL * min.abs().max(1.0);
    let mut best: Option<usize> = None;
    for (k, s) in scores.iter().enumerate() {
        if s.cost <= min + tol && best.is_none_or(|b| s.omega.abs() < scores[b].omega.abs()) {
            best = Some(k);
        }
    }
    best.expect("non-empty action set")
}

pub fn choose_action(
    b: &BeliefGrid,
    map: &GridMap,
    cfg: &EerPlannerConfig,
) -> Result<ControlInput> {
    let scores = score_actions(b, map, cfg)?;
    if scores.iter().all(|s| s.cost == f64::INFINITY) {
        return Err(Error::NoFeasiblePlan);
    }
    Ok(cfg.control_for(scores[select_action(&scores)].omega))
}
