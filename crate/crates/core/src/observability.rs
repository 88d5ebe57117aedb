//! Local nonlinear observability of the position states.
//!
//! For the unicycle with a scalar field measurement `h(x, y)`, the zeroth and
//! first Lie derivatives along the drift `f = [V cosθ, V sinθ]` are
//!
//! ```text
//! L0 = h
//! L1 = ∇h · f
//! ```
//!
//! and the observability matrix stacks their position gradients:
//!
//! ```text
//! O = [ ∇h ; H f ]        (2×2, H the Hessian of h)
//! ```
//!
//! The Gramian is `Oᵀ O`; its determinant is the information score used by
//! the planner, which penalizes `1 / max(det, eps)`.
//!
//! Units: row one of `O` is in nT/m and row two in nT/(m·s), so the
//! determinant carries nT⁴/(m⁴·s²). Planner weights are tuned against these
//! raw units.

use nalgebra::{Matrix2, Vector2};

use crate::error::Result;
use crate::map::GridMap;
use crate::vehicle::{ControlInput, Pose};

/// Floor applied to the Gramian determinant before inversion.
pub const DEFAULT_EPS_DET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservabilityReport {
    pub o_nl: Matrix2<f64>,
    pub gramian_det: f64,
    pub cost: f64,
}

fn drift(pose: &Pose, u: &ControlInput) -> Vector2<f64> {
    let (s, c) = pose.theta.sin_cos();
    Vector2::new(u.v * c, u.v * s)
}

/// `(L0, L1)`: the field value (nT) and its rate along the motion (nT/s).
pub fn lie_derivatives(map: &GridMap, pose: &Pose, u: &ControlInput) -> Result<(f64, f64)> {
    let h = map.field_at(pose.x, pose.y)?;
    let grad = map.gradient_at(pose.x, pose.y)?;
    Ok((h, grad.dot(&drift(pose, u))))
}

pub fn observability_matrix(map: &GridMap, pose: &Pose, u: &ControlInput) -> Result<Matrix2<f64>> {
    let grad = map.gradient_at(pose.x, pose.y)?;
    let hf = map.hessian_at(pose.x, pose.y)? * drift(pose, u);
    Ok(Matrix2::new(grad.x, grad.y, hf.x, hf.y))
}

/// `det(Oᵀ O)`, clamped at zero against rounding.
pub fn gramian_det(o_nl: &Matrix2<f64>) -> f64 {
    (o_nl.transpose() * o_nl).determinant().max(0.0)
}

pub fn obs_cost(gramian_det: f64, eps_det: f64) -> f64 {
    1.0 / gramian_det.max(eps_det)
}

pub fn report(
    map: &GridMap,
    pose: &Pose,
    u: &ControlInput,
    eps_det: f64,
) -> Result<ObservabilityReport> {
    let o_nl = observability_matrix(map, pose, u)?;
    let det = gramian_det(&o_nl);
    Ok(ObservabilityReport {
        o_nl,
        gramian_det: det,
        cost: obs_cost(det, eps_det),
    })
}
