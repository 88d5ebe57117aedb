//! Discrete-time unicycle kinematics and the scalar magnetometer model.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::map::GridMap;

/// Translation over which `sigma_xy_per_step` accrues, in meters.
pub const XY_NOISE_STEP: f64 = 0.05;
/// Rotation over which `sigma_theta_per_step` accrues, in radians (10 degrees).
pub const THETA_NOISE_STEP: f64 = 10.0 * PI / 180.0;

/// Wraps an angle into `(-pi, pi]`. Angles already in range are returned untouched.
pub fn normalize_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut a = theta.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    if a <= -PI {
        a += TAU;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

/// Forward speed (m/s) and turn rate (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    pub v: f64,
    pub omega: f64,
}

impl ControlInput {
    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }
}

/// Sensor and process noise levels.
///
/// Process noise is specified per unit of motion: `sigma_xy_per_step` per
/// [`XY_NOISE_STEP`] of translation and `sigma_theta_per_step` per
/// [`THETA_NOISE_STEP`] of rotation, scaled linearly with the actual motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub sigma_z: f64,
    pub sigma_xy_per_step: f64,
    pub sigma_theta_per_step: f64,
}

impl NoiseConfig {
    pub const ZERO: NoiseConfig = NoiseConfig {
        sigma_z: 0.0,
        sigma_xy_per_step: 0.0,
        sigma_theta_per_step: 0.0,
    };

    /// 100 nT sensor noise, 1 cm per 5 cm translated, 1 degree per 10 degrees rotated.
    pub fn simulation_default() -> Self {
        Self {
            sigma_z: 100.0,
            sigma_xy_per_step: 0.01,
            sigma_theta_per_step: 1f64.to_radians(),
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::simulation_default()
    }
}

/// One step of the unicycle model. Position advances along the pre-update heading.
pub fn step_deterministic(pose: &Pose, u: &ControlInput, dt: f64) -> Pose {
    let (s, c) = pose.theta.sin_cos();
    Pose {
        x: pose.x + u.v * c * dt,
        y: pose.y + u.v * s * dt,
        theta: normalize_angle(pose.theta + u.omega * dt),
    }
}

/// [`step_deterministic`] plus inertial-frame Gaussian noise scaled to the motion.
///
/// Always draws three standard normals from `rng`, so the stream position does
/// not depend on the noise levels or on the motion.
pub fn step_noisy<R: Rng + ?Sized>(
    pose: &Pose,
    u: &ControlInput,
    dt: f64,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Pose {
    let mut next = step_deterministic(pose, u, dt);
    let nx: f64 = rng.sample(StandardNormal);
    let ny: f64 = rng.sample(StandardNormal);
    let nt: f64 = rng.sample(StandardNormal);

    let sigma_xy = noise.sigma_xy_per_step * (u.v * dt).abs() / XY_NOISE_STEP;
    if sigma_xy > 0.0 {
        next.x += sigma_xy * nx;
        next.y += sigma_xy * ny;
    }
    let sigma_theta = noise.sigma_theta_per_step * (u.omega * dt).abs() / THETA_NOISE_STEP;
    if sigma_theta > 0.0 {
        next.theta = normalize_angle(next.theta + sigma_theta * nt);
    }
    next
}

/// A noisy scalar magnetometer reading at `pose`.
pub fn measure<R: Rng + ?Sized>(
    map: &GridMap,
    pose: &Pose,
    sigma_z: f64,
    rng: &mut R,
) -> Result<f64> {
    let h = map.field_with_heading(pose)?;
    let n: f64 = rng.sample(StandardNormal);
    Ok(if sigma_z > 0.0 { h + sigma_z * n } else { h })
}
