//! Built-in synthetic maps and the text spec used to generate Gaussian-source maps.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::map::{generate_gaussian_map, Bounds, GaussianSource, GridMap};
use crate::vehicle::Pose;

/// Gaussian-source map description, as read from a TOML spec file.
///
/// ```toml
/// bounds = [0.0, 6.0, 0.0, 5.0]   # x_min, x_max, y_min, y_max (m)
/// resolution = 0.25
/// baseline = 0.0                  # nT, optional
/// heading_amp = 0.0               # nT, optional
/// heading_phase = 0.0             # rad, optional
///
/// [[source]]
/// cx = 2.0
/// cy = 3.5
/// amplitude = 3000.0
/// sigma = 0.8
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub bounds: [f64; 4],
    pub resolution: f64,
    #[serde(default)]
    pub baseline: f64,
    #[serde(default)]
    pub heading_amp: f64,
    #[serde(default)]
    pub heading_phase: f64,
    #[serde(default, rename = "source")]
    pub sources: Vec<SourceSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub cx: f64,
    pub cy: f64,
    pub amplitude: f64,
    pub sigma: f64,
}

impl From<SourceSpec> for GaussianSource {
    fn from(s: SourceSpec) -> Self {
        GaussianSource::new(s.cx, s.cy, s.amplitude, s.sigma)
    }
}

impl MapSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn build(&self) -> Result<GridMap> {
        let [x_min, x_max, y_min, y_max] = self.bounds;
        let sources: Vec<GaussianSource> = self.sources.iter().copied().map(Into::into).collect();
        generate_gaussian_map(
            &sources,
            Bounds::new(x_min, x_max, y_min, y_max),
            self.resolution,
            self.baseline,
        )?
        .with_heading_correction(self.heading_amp, self.heading_phase)
    }
}

/// Synthetic scenarios shipped with the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Several Gaussian sources over a 6 m x 5 m room. Synthetic; stands in for a surveyed lab map.
    LabLike,
    /// One symmetric source at the origin of a 10 m x 10 m area.
    SingleGaussian,
}

impl Builtin {
    pub const ALL: [Builtin; 2] = [Builtin::LabLike, Builtin::SingleGaussian];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::LabLike => "lab_like",
            Builtin::SingleGaussian => "single_gaussian",
        }
    }

    pub fn spec(self) -> MapSpec {
        let src = |cx, cy, amplitude, sigma| SourceSpec {
            cx,
            cy,
            amplitude,
            sigma,
        };
        match self {
            Builtin::LabLike => MapSpec {
                bounds: [0.0, 6.0, 0.0, 5.0],
                resolution: 0.25,
                baseline: 0.0,
                heading_amp: 0.0,
                heading_phase: 0.0,
                sources: vec![
                    src(0.9, 2.2, 1125.0, 0.8),
                    src(2.3, 4.0, -1350.0, 0.8),
                    src(2.6, 1.0, 990.0, 0.7),
                    src(4.1, 2.9, -1170.0, 0.8),
                    src(5.2, 4.2, 900.0, 0.6),
                    src(5.1, 0.6, 810.0, 0.6),
                    src(3.6, 4.8, 675.0, 0.6),
                ],
            },
            Builtin::SingleGaussian => MapSpec {
                bounds: [-5.0, 5.0, -5.0, 5.0],
                resolution: 0.25,
                baseline: 0.0,
                heading_amp: 0.0,
                heading_phase: 0.0,
                sources: vec![src(0.0, 0.0, 3000.0, 0.8)],
            },
        }
    }

    pub fn map(self) -> GridMap {
        self.spec().build().expect("built-in map specs are valid")
    }

    /// Default start pose and goal for the scenario.
    pub fn mission(self) -> (Pose, (f64, f64)) {
        match self {
            Builtin::LabLike => (Pose::new(1.0, 3.75, (-30.0f64).to_radians()), (4.75, 1.5)),
            Builtin::SingleGaussian => (Pose::new(-3.5, -3.5, 0.0), (3.5, -3.5)),
        }
    }

    /// Belief motion kernel for the scenario, if it overrides the noise-derived default.
    ///
    /// The lab-like value also absorbs the drift caused by heading noise on turns,
    /// which the 2-D belief does not track.
    pub fn motion_kernel_sigma(self) -> Option<f64> {
        match self {
            Builtin::LabLike => Some(0.15),
            Builtin::SingleGaussian => None,
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown built-in map `{s}` (expected lab_like or single_gaussian)"
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_build_and_contain_their_missions() {
        for b in Builtin::ALL {
            let m = b.map();
            let (start, goal) = b.mission();
            assert!(m.stencil_fits(start.x, start.y), "{}", b.name());
            assert!(m.stencil_fits(goal.0, goal.1), "{}", b.name());
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        let lab = Builtin::LabLike.map();
        assert_eq!(lab.dims(), (25, 21));
    }

    #[test]
    fn spec_parsing() {
        let spec = MapSpec::parse(
            "bounds = [0.0, 2.0, 0.0, 1.0]\nresolution = 0.5\n[[source]]\ncx = 1.0\ncy = 0.5\namplitude = 10.0\nsigma = 0.3\n",
        )
        .unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.dims(), (5, 3));
        assert_eq!(m.field_at(1.0, 0.5).unwrap(), 10.0);

        let err =
            MapSpec::parse("bounds = [0.0, 2.0, 0.0, 1.0]\nresolution = 0.5\nresolutoin = 1.0\n")
                .unwrap_err();
        assert!(err.to_string().contains("resolutoin"), "{err}");
        assert!("nope".parse::<Builtin>().is_err());
    }
}
