//! Scalar magnetic-anomaly maps on a regular grid.
//!
//! A [`GridMap`] stores field samples (nT) at the nodes of a regular grid.
//! Off-node queries are bilinearly interpolated; derivatives are central
//! finite differences of the interpolant with a step equal to the grid
//! resolution. Queries outside the grid are errors, never extrapolated.
//!
//! The on-disk format is line-oriented text:
//!
//! ```text
//! MAGMAP 1
//! origin_x origin_y resolution nx ny heading_amp heading_phase
//! v[0][0] v[0][1] ... v[0][ny-1]
//! ...
//! ```
//!
//! Values are row-major with `v[i][j]` located at
//! `(origin_x + i * resolution, origin_y + j * resolution)`. Any text after a
//! `#` on a line is a comment.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::vehicle::Pose;

/// Fractional-index slack tolerated at the grid edges and when snapping to nodes.
const INDEX_SLACK: f64 = 1e-9;

const MAGIC: &str = "MAGMAP 1";

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    origin_x: f64,
    origin_y: f64,
    resolution: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    heading_amp: f64,
    heading_phase: f64,
}

/// An isotropic Gaussian field source used to synthesize maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSource {
    pub cx: f64,
    pub cy: f64,
    pub amplitude: f64,
    pub sigma: f64,
}

impl GaussianSource {
    pub fn new(cx: f64, cy: f64, amplitude: f64, sigma: f64) -> Self {
        Self {
            cx,
            cy,
            amplitude,
            sigma,
        }
    }

    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let d2 = (x - self.cx).powi(2) + (y - self.cy).powi(2);
        self.amplitude * (-d2 / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }
}

impl GridMap {
    /// Builds a map from row-major values, checking every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        origin_x: f64,
        origin_y: f64,
        resolution: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
        heading_amp: f64,
        heading_phase: f64,
    ) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!(
                "map needs at least 2x2 nodes, got {nx}x{ny}"
            )));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {nx}x{ny} map, got {}",
                nx * ny,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "value #{bad} is not finite"
            )));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(Error::InvalidArgument("origin must be finite".into()));
        }
        if !(heading_amp >= 0.0 && heading_amp.is_finite()) || !heading_phase.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "heading correction must be finite with amplitude >= 0, got ({heading_amp}, {heading_phase})"
            )));
        }
        Ok(Self {
            origin_x,
            origin_y,
            resolution,
            nx,
            ny,
            values,
            heading_amp,
            heading_phase,
        })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(
        origin_x: f64,
        origin_y: f64,
        resolution: f64,
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let x = origin_x + i as f64 * resolution;
            for j in 0..ny {
                values.push(f(x, origin_y + j as f64 * resolution));
            }
        }
        Self::new(origin_x, origin_y, resolution, nx, ny, values, 0.0, 0.0)
    }

    pub fn with_heading_correction(mut self, amplitude: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) || !phase.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "heading correction must be finite with amplitude >= 0, got ({amplitude}, {phase})"
            )));
        }
        self.heading_amp = amplitude;
        self.heading_phase = phase;
        Ok(self)
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.origin_x, self.origin_y)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn heading_amp(&self) -> f64 {
        self.heading_amp
    }

    pub fn heading_phase(&self) -> f64 {
        self.heading_phase
    }

    /// Node value `v[i][j]`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    pub fn node_position(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin_x + i as f64 * self.resolution,
            self.origin_y + j as f64 * self.resolution,
        )
    }

    pub fn bounds(&self) -> Bounds {
        let (x1, y1) = self.node_position(self.nx - 1, self.ny - 1);
        Bounds::new(self.origin_x, x1, self.origin_y, y1)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.fractional_index(x, y).is_some()
    }

    /// True when every finite-difference stencil point around `(x, y)` is on the map.
    pub fn stencil_fits(&self, x: f64, y: f64) -> bool {
        let d = self.resolution;
        self.contains(x - d, y - d) && self.contains(x + d, y + d)
    }

    fn fractional_index(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let fx = snap((x - self.origin_x) / self.resolution, self.nx);
        let fy = snap((y - self.origin_y) / self.resolution, self.ny);
        match (fx, fy) {
            (Some(fx), Some(fy)) => Some((fx, fy)),
            _ => None,
        }
    }

    /// Bilinearly interpolated field value.
    pub fn field_at(&self, x: f64, y: f64) -> Result<f64> {
        let (fx, fy) = self
            .fractional_index(x, y)
            .ok_or(Error::OutOfBounds { x, y })?;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.value(i, j);
        let v10 = self.value(i + 1, j);
        let v01 = self.value(i, j + 1);
        let v11 = self.value(i + 1, j + 1);
        Ok(v00 * (1.0 - tx) * (1.0 - ty)
            + v10 * tx * (1.0 - ty)
            + v01 * (1.0 - tx) * ty
            + v11 * tx * ty)
    }

    /// Field value including the heading-dependent sinusoidal term.
    pub fn field_with_heading(&self, pose: &Pose) -> Result<f64> {
        let base = self.field_at(pose.x, pose.y)?;
        if self.heading_amp == 0.0 {
            return Ok(base);
        }
        Ok(base + self.heading_amp * (pose.theta + self.heading_phase).sin())
    }

    /// Central-difference gradient `(dh/dx, dh/dy)` in nT/m.
    pub fn gradient_at(&self, x: f64, y: f64) -> Result<Vector2<f64>> {
        let d = self.resolution;
        let gx = (self.field_at(x + d, y)? - self.field_at(x - d, y)?) / (2.0 * d);
        let gy = (self.field_at(x, y + d)? - self.field_at(x, y - d)?) / (2.0 * d);
        Ok(Vector2::new(gx, gy))
    }

    /// Central-difference Hessian in nT/m². Always exactly symmetric.
    pub fn hessian_at(&self, x: f64, y: f64) -> Result<Matrix2<f64>> {
        let d = self.resolution;
        let c = self.field_at(x, y)?;
        let hxx = (self.field_at(x + d, y)? - 2.0 * c + self.field_at(x - d, y)?) / (d * d);
        let hyy = (self.field_at(x, y + d)? - 2.0 * c + self.field_at(x, y - d)?) / (d * d);
        let hxy = (self.field_at(x + d, y + d)?
            - self.field_at(x + d, y - d)?
            - self.field_at(x - d, y + d)?
            + self.field_at(x - d, y - d)?)
            / (4.0 * d * d);
        Ok(Matrix2::new(hxx, hxy, hxy, hyy))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 20 + 64);
        // Display for f64 is the shortest string that round-trips exactly.
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            self.origin_x,
            self.origin_y,
            self.resolution,
            self.nx,
            self.ny,
            self.heading_amp,
            self.heading_phase
        );
        for row in self.values.chunks(self.ny) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line, magic) = lines.next().ok_or(Error::MalformedMap {
            line: 0,
            msg: "empty file".into(),
        })?;
        if magic.split_whitespace().collect::<Vec<_>>() != ["MAGMAP", "1"] {
            return Err(Error::MalformedMap {
                line,
                msg: format!("expected `{MAGIC}`, found `{magic}`"),
            });
        }

        let (line, header) = lines.next().ok_or(Error::MalformedMap {
            line,
            msg: "missing header line".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(Error::MalformedMap {
                line,
                msg: format!("header needs 7 fields, found {}", fields.len()),
            });
        }
        let float = |k: usize, name: &str| -> Result<f64> {
            fields[k].parse::<f64>().map_err(|_| Error::MalformedMap {
                line,
                msg: format!("bad {name} `{}`", fields[k]),
            })
        };
        let count = |k: usize, name: &str| -> Result<usize> {
            fields[k].parse::<usize>().map_err(|_| Error::MalformedMap {
                line,
                msg: format!("bad {name} `{}`", fields[k]),
            })
        };
        let origin_x = float(0, "origin_x")?;
        let origin_y = float(1, "origin_y")?;
        let resolution = float(2, "resolution")?;
        let nx = count(3, "nx")?;
        let ny = count(4, "ny")?;
        let heading_amp = float(5, "heading_amp")?;
        let heading_phase = float(6, "heading_phase")?;

        let mut values = Vec::with_capacity(nx.saturating_mul(ny).min(1 << 24));
        let mut last_line = line;
        for (line, body) in lines {
            last_line = line;
            for tok in body.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| Error::MalformedMap {
                    line,
                    msg: format!("bad value `{tok}`"),
                })?);
            }
        }
        if values.len() != nx.saturating_mul(ny) {
            return Err(Error::MalformedMap {
                line: last_line,
                msg: format!(
                    "header declares {nx}x{ny} = {} values but {} were found",
                    nx.saturating_mul(ny),
                    values.len()
                ),
            });
        }
        Self::new(
            origin_x,
            origin_y,
            resolution,
            nx,
            ny,
            values,
            heading_amp,
            heading_phase,
        )
        .map_err(|e| Error::MalformedMap {
            line: 2,
            msg: e.to_string(),
        })
    }
}

/// Clamps a fractional index into `[0, n-1]` within slack and snaps near-integers.
fn snap(f: f64, n: usize) -> Option<f64> {
    let top = (n - 1) as f64;
    if !f.is_finite() || f < -INDEX_SLACK || f > top + INDEX_SLACK {
        return None;
    }
    let r = f.round();
    let f = if (f - r).abs() < INDEX_SLACK { r } else { f };
    Some(f.clamp(0.0, top))
}

/// Synthesizes a map as a constant baseline plus Gaussian sources.
pub fn generate_gaussian_map(
    sources: &[GaussianSource],
    bounds: Bounds,
    resolution: f64,
    baseline: f64,
) -> Result<GridMap> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let width = bounds.x_max - bounds.x_min;
    let height = bounds.y_max - bounds.y_min;
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "degenerate bounds {bounds:?}"
        )));
    }
    if let Some(s) = sources.iter().find(|s| !(s.sigma > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "source sigma must be positive, got {}",
            s.sigma
        )));
    }
    let nx = (width / resolution).round() as usize + 1;
    let ny = (height / resolution).round() as usize + 1;
    GridMap::from_fn(bounds.x_min, bounds.y_min, resolution, nx, ny, |x, y| {
        sources
            .iter()
            .fold(baseline, |acc, s| acc + s.value_at(x, y))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn corner_map() -> GridMap {
        GridMap::new(0.0, 0.0, 1.0, 2, 2, vec![0.0, 1.0, 1.0, 2.0], 0.0, 0.0).unwrap()
    }

    #[test]
    fn zero_map_is_zero_everywhere() {
        let m = GridMap::from_fn(0.0, 0.0, 0.5, 5, 5, |_, _| 0.0).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.3, 1.7), (2.0, 2.0)] {
            assert_eq!(m.field_at(x, y).unwrap(), 0.0);
        }
    }

    #[test]
    fn bilinear_cell_center() {
        assert_abs_diff_eq!(
            corner_map().field_at(0.5, 0.5).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn node_queries_are_exact() {
        let m =
            GridMap::from_fn(-1.3, 2.1, 0.25, 7, 6, |x, y| (3.0 * x).sin() * 1e3 + y * y).unwrap();
        for i in 0..7 {
            for j in 0..6 {
                let (x, y) = m.node_position(i, j);
                assert_eq!(m.field_at(x, y).unwrap(), m.value(i, j));
            }
        }
    }

    #[test]
    fn out_of_bounds_is_an_error() {
        let m = corner_map();
        assert!(matches!(
            m.field_at(1.1, 0.5),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(matches!(
            m.field_at(0.5, -0.01),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(matches!(
            m.gradient_at(0.5, 0.5),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn heading_correction() {
        let m = corner_map();
        let p = Pose::new(0.5, 0.5, FRAC_PI_2);
        assert_eq!(
            m.field_with_heading(&p).unwrap(),
            m.field_at(0.5, 0.5).unwrap()
        );
        let m = m.with_heading_correction(50.0, 0.0).unwrap();
        assert_abs_diff_eq!(m.field_with_heading(&p).unwrap(), 51.0, epsilon = 1e-12);
        let p0 = Pose::new(0.5, 0.5, 0.0);
        assert_eq!(m.field_with_heading(&p0).unwrap(), 1.0);
    }

    #[test]
    fn gradient_of_linear_and_constant_maps() {
        let lin = GridMap::from_fn(0.0, 0.0, 0.5, 10, 10, |x, _| 100.0 * x).unwrap();
        let g = lin.gradient_at(2.2, 2.9).unwrap();
        assert_abs_diff_eq!(g.x, 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.y, 0.0, epsilon = 1e-9);
        let flat = GridMap::from_fn(0.0, 0.0, 0.5, 10, 10, |_, _| 45_000.0).unwrap();
        assert_eq!(flat.gradient_at(2.2, 2.9).unwrap(), Vector2::zeros());
    }

    #[test]
    fn hessian_of_quadratic() {
        let m = GridMap::from_fn(-1.0, -1.0, 1e-3, 2001, 21, |x, _| x * x).unwrap();
        let h = m.hessian_at(0.3217, -0.9871).unwrap();
        assert_abs_diff_eq!(h[(0, 0)], 2.0, epsilon = 1e-5);
        assert_abs_diff_eq!(h[(0, 1)], 0.0, epsilon = 1e-5);
        assert_abs_diff_eq!(h[(1, 1)], 0.0, epsilon = 1e-5);
        let lin = GridMap::from_fn(0.0, 0.0, 0.5, 10, 10, |x, y| 3.0 * x - 7.0 * y).unwrap();
        let h = lin.hessian_at(2.0, 2.0).unwrap();
        assert_abs_diff_eq!(h.norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_map_construction() {
        let b = Bounds::new(-2.0, 2.0, -2.0, 2.0);
        let flat = generate_gaussian_map(&[], b, 0.25, 45_000.0).unwrap();
        assert!(flat.values().iter().all(|&v| v == 45_000.0));

        let one = generate_gaussian_map(
            &[GaussianSource::new(0.0, 0.0, 1000.0, 0.5)],
            b,
            0.25,
            45_000.0,
        )
        .unwrap();
        assert_eq!(one.field_at(0.0, 0.0).unwrap(), 46_000.0);
        assert!(one.gradient_at(0.0, 0.0).unwrap().norm() < 1e-9);

        let pair = generate_gaussian_map(
            &[
                GaussianSource::new(-0.7, 0.2, 800.0, 0.6),
                GaussianSource::new(0.7, 0.2, 800.0, 0.6),
            ],
            b,
            0.25,
            0.0,
        )
        .unwrap();
        let (nx, ny) = pair.dims();
        for i in 0..nx {
            for j in 0..ny {
                let a = pair.value(i, j);
                let m = pair.value(nx - 1 - i, j);
                assert!((a - m).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn degenerate_bounds_rejected() {
        let r = generate_gaussian_map(&[], Bounds::new(1.0, 1.0, 0.0, 2.0), 0.25, 0.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let r = generate_gaussian_map(&[], Bounds::new(0.0, 1.0, 0.0, 2.0), 0.0, 0.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let m = GridMap::from_fn(-0.1, 0.7, 0.25, 3, 3, |x, y| {
            45_000.0 + (x * 7.1).sin() * 333.3 + y / 3.0
        })
        .unwrap()
        .with_heading_correction(12.5, 0.3)
        .unwrap();
        let back = GridMap::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn value_count_mismatch() {
        let mut text = String::from("MAGMAP 1\n# a comment\n0 0 1 4 4 0 0\n");
        for k in 0..15 {
            text.push_str(&format!("{k} "));
        }
        let err = GridMap::from_text(&text).unwrap_err();
        assert!(matches!(err, Error::MalformedMap { .. }), "{err}");
    }

    #[test]
    fn comments_and_bad_magic() {
        let ok = "# leading comment\nMAGMAP 1\n0 0 1 2 2 0 0 # header\n1 2\n3 4\n";
        let m = GridMap::from_text(ok).unwrap();
        assert_eq!(m.value(1, 0), 3.0);
        assert!(matches!(
            GridMap::from_text("MAGMAP 2\n0 0 1 2 2 0 0\n1 2 3 4\n"),
            Err(Error::MalformedMap { line: 1, .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            GridMap::load("/definitely/not/here.magmap"),
            Err(Error::Io { .. })
        ));
    }
}
