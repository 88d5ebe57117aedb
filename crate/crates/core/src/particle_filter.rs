//! Monte Carlo localization over a scalar field map.
//!
//! The filter cycle is propagate → weight → (resample when the effective
//! sample size drops below half the particle count). Weights are kept
//! normalized after every update and the likelihood is evaluated in log space,
//! so a measurement far from every particle's prediction still produces a
//! usable posterior instead of an all-zero weight vector.
//!
//! All stochastic steps draw from a caller-supplied RNG in particle index
//! order. Running the same operations with an RNG in the same state therefore
//! reproduces the particle set exactly.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::map::GridMap;
use crate::vehicle::{normalize_angle, step_noisy, ControlInput, NoiseConfig, Pose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub pose: Pose,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
}

/// Circular means with a resultant shorter than this are rejected.
const MIN_RESULTANT: f64 = 1e-12;

/// Initial covariance `diag[0.1², 0.1², (2°)²]`.
pub fn default_initial_covariance() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(0.01, 0.01, 2f64.to_radians().powi(2)))
}

impl ParticleSet {
    /// Draws `n` particles from a Gaussian around `mean` with uniform weights.
    pub fn init<R: Rng + ?Sized>(
        mean: &Pose,
        cov: &Matrix3<f64>,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "particle count must be at least 1".into(),
            ));
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("covariance must be finite".into()));
        }
        let scale = cov.abs().max().max(1.0);
        if (cov - cov.transpose()).abs().max() > 1e-12 * scale {
            return Err(Error::InvalidArgument(
                "covariance must be symmetric".into(),
            ));
        }
        let eig = SymmetricEigen::new(*cov);
        if eig.eigenvalues.min() < -1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "covariance is not positive semi-definite (eigenvalues {:?})",
                eig.eigenvalues.as_slice()
            )));
        }
        let sqrt_l = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = eig.eigenvectors * Matrix3::from_diagonal(&sqrt_l);

        let w = 1.0 / n as f64;
        let particles = (0..n)
            .map(|_| {
                let z = Vector3::new(
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                );
                let d = factor * z;
                Particle {
                    pose: Pose::new(mean.x + d.x, mean.y + d.y, mean.theta + d.z),
                    weight: w,
                }
            })
            .collect();
        Ok(Self { particles })
    }

    /// Wraps explicit particles; weights are normalized.
    pub fn from_particles(mut particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidArgument(
                "particle set cannot be empty".into(),
            ));
        }
        if particles
            .iter()
            .any(|p| !(p.weight >= 0.0 && p.weight.is_finite()))
        {
            return Err(Error::InvalidArgument(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = particles.iter().map(|p| p.weight).sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateWeights);
        }
        for p in &mut particles {
            p.weight /= total;
        }
        Ok(Self { particles })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.particles.iter().map(|p| p.weight)
    }

    /// Advances every particle through the noisy motion model. Weights are untouched.
    pub fn propagate<R: Rng + ?Sized>(
        &mut self,
        u: &ControlInput,
        dt: f64,
        noise: &NoiseConfig,
        rng: &mut R,
    ) {
        for p in &mut self.particles {
            p.pose = step_noisy(&p.pose, u, dt, noise, rng);
        }
    }

    /// Multiplies weights by the Gaussian likelihood of the residual `z - h(pose)`.
    ///
    /// Particles off the map get zero weight. On error the set is left unchanged.
    pub fn update_weights(&mut self, map: &GridMap, z: f64, sigma_z: f64) -> Result<()> {
        if !(sigma_z > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma_z must be positive, got {sigma_z}"
            )));
        }
        let inv = 1.0 / (2.0 * sigma_z * sigma_z);
        let log_w: Vec<f64> = self
            .particles
            .iter()
            .map(|p| match map.field_with_heading(&p.pose) {
                Ok(h) if p.weight > 0.0 => p.weight.ln() - (z - h).powi(2) * inv,
                _ => f64::NEG_INFINITY,
            })
            .collect();
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::DegenerateWeights);
        }
        let unnorm: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = unnorm.iter().sum();
        for (p, w) in self.particles.iter_mut().zip(unnorm) {
            p.weight = w / total;
        }
        Ok(())
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self
            .particles
            .iter()
            .map(|p| p.weight * p.weight)
            .sum::<f64>()
    }

    /// Low-variance resampling: one uniform offset, `N` evenly spaced pointers.
    pub fn resample_systematic<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.particles.len();
        let step = 1.0 / n as f64;
        let total: f64 = self.weights().sum();
        let offset: f64 = rng.random::<f64>() * step;

        let last_live = self
            .particles
            .iter()
            .rposition(|p| p.weight > 0.0)
            .unwrap_or(n - 1);
        let mut out = Vec::with_capacity(n);
        let mut i = 0;
        let mut cumulative = self.particles[0].weight / total;
        for k in 0..n {
            let target = offset + k as f64 * step;
            while cumulative <= target && i < last_live {
                i += 1;
                cumulative += self.particles[i].weight / total;
            }
            out.push(Particle {
                pose: self.particles[i].pose,
                weight: step,
            });
        }
        self.particles = out;
    }

    /// Resamples when the effective sample size drops below `N/2`. Returns whether it did.
    pub fn resample_if_degenerate<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if self.effective_sample_size() < self.len() as f64 / 2.0 {
            self.resample_systematic(rng);
            true
        } else {
            false
        }
    }

    /// Weighted mean position and circular-mean heading.
    pub fn estimate_mean(&self) -> Result<Pose> {
        let (mut x, mut y, mut s, mut c) = (0.0, 0.0, 0.0, 0.0);
        for p in &self.particles {
            x += p.weight * p.pose.x;
            y += p.weight * p.pose.y;
            s += p.weight * p.pose.theta.sin();
            c += p.weight * p.pose.theta.cos();
        }
        if s.hypot(c) < MIN_RESULTANT {
            return Err(Error::AmbiguousHeading);
        }
        Ok(Pose::new(x, y, s.atan2(c)))
    }

    /// Weighted population covariance of `(x, y, theta)` about the mean.
    ///
    /// Heading residuals are wrapped. When the circular mean is undefined the
    /// heading residuals are taken about zero.
    pub fn sample_covariance(&self) -> Matrix3<f64> {
        let (mean_x, mean_y, mean_theta) = match self.estimate_mean() {
            Ok(p) => (p.x, p.y, p.theta),
            Err(_) => {
                let x = self.particles.iter().map(|p| p.weight * p.pose.x).sum();
                let y = self.particles.iter().map(|p| p.weight * p.pose.y).sum();
                (x, y, 0.0)
            }
        };
        let mut cov = Matrix3::zeros();
        for p in &self.particles {
            let d = Vector3::new(
                p.pose.x - mean_x,
                p.pose.y - mean_y,
                normalize_angle(p.pose.theta - mean_theta),
            );
            cov += p.weight * d * d.transpose();
        }
        // exact symmetry
        (cov + cov.transpose()) * 0.5
    }

    /// Trace of the position block of the covariance, in m².
    pub fn trace_position(&self) -> f64 {
        let c = self.sample_covariance();
        c[(0, 0)] + c[(1, 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn at(x: f64, y: f64, theta: f64, weight: f64) -> Particle {
        Particle {
            pose: Pose::new(x, y, theta),
            weight,
        }
    }

    #[test]
    fn init_zero_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean = Pose::new(1.5, -2.0, 0.3);
        let set = ParticleSet::init(&mean, &Matrix3::zeros(), 50, &mut rng).unwrap();
        assert_eq!(set.len(), 50);
        for p in set.particles() {
            assert_eq!(p.pose, mean);
            assert_eq!(p.weight, 1.0 / 50.0);
        }
    }

    #[test]
    fn init_spread_matches_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = ParticleSet::init(
            &Pose::new(0.0, 0.0, 0.0),
            &default_initial_covariance(),
            1000,
            &mut rng,
        )
        .unwrap();
        let xs: Vec<f64> = set.particles().iter().map(|p| p.pose.x).collect();
        let m = xs.iter().sum::<f64>() / 1000.0;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 999.0).sqrt();
        assert!((0.09..=0.11).contains(&sd), "sd = {sd}");
    }

    #[test]
    fn init_rejects_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Pose::new(0.0, 0.0, 0.0);
        assert!(ParticleSet::init(&p, &Matrix3::identity(), 0, &mut rng).is_err());
        let not_psd = Matrix3::from_diagonal(&Vector3::new(1.0, -0.5, 1.0));
        assert!(matches!(
            ParticleSet::init(&p, &not_psd, 10, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn propagate_keeps_weights_and_is_deterministic_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut set =
            ParticleSet::from_particles(vec![at(0.0, 0.0, 0.0, 0.2), at(1.0, 1.0, 1.0, 0.8)])
                .unwrap();
        let before = set.clone();
        set.propagate(&ControlInput::default(), 1.0, &NoiseConfig::ZERO, &mut rng);
        assert_eq!(set, before);

        let u = ControlInput::new(0.2, 0.1);
        set.propagate(&u, 1.0, &NoiseConfig::ZERO, &mut rng);
        for (a, b) in set.particles().iter().zip(before.particles()) {
            assert_eq!(a.pose, crate::vehicle::step_deterministic(&b.pose, &u, 1.0));
            assert_eq!(a.weight, b.weight);
        }
    }

    #[test]
    fn weights_on_constant_map_unchanged() {
        let map = GridMap::from_fn(0.0, 0.0, 0.5, 5, 5, |_, _| 45_000.0).unwrap();
        let mut set = ParticleSet::from_particles(vec![
            at(0.5, 0.5, 0.0, 0.1),
            at(1.0, 1.5, 0.0, 0.6),
            at(2.0, 0.2, 0.0, 0.3),
        ])
        .unwrap();
        let before: Vec<f64> = set.weights().collect();
        set.update_weights(&map, 45_321.0, 100.0).unwrap();
        for (a, b) in set.weights().zip(before) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_particle_likelihood_ratio() {
        let map =
            GridMap::new(0.0, 0.0, 1.0, 2, 2, vec![0.0, 0.0, 100.0, 100.0], 0.0, 0.0).unwrap();
        let mut set =
            ParticleSet::from_particles(vec![at(0.0, 0.5, 0.0, 0.5), at(1.0, 0.5, 0.0, 0.5)])
                .unwrap();
        set.update_weights(&map, 0.0, 100.0).unwrap();
        let w: Vec<f64> = set.weights().collect();
        let expected = 1.0 / (1.0 + (-0.5f64).exp());
        assert_abs_diff_eq!(w[0], expected, epsilon = 1e-12);
        assert_abs_diff_eq!(w[0], 0.6225, epsilon = 1e-4);
        assert_abs_diff_eq!(w[1], 0.3775, epsilon = 1e-4);
    }

    #[test]
    fn off_map_particles_lose_weight() {
        let map = GridMap::from_fn(0.0, 0.0, 1.0, 3, 3, |x, _| x).unwrap();
        let mut set =
            ParticleSet::from_particles(vec![at(1.0, 1.0, 0.0, 0.5), at(9.0, 1.0, 0.0, 0.5)])
                .unwrap();
        set.update_weights(&map, 1.0, 1.0).unwrap();
        assert_eq!(set.particles()[1].weight, 0.0);
        assert_eq!(set.particles()[0].weight, 1.0);

        let mut lost = ParticleSet::from_particles(vec![at(9.0, 1.0, 0.0, 1.0)]).unwrap();
        assert!(matches!(
            lost.update_weights(&map, 1.0, 1.0),
            Err(Error::DegenerateWeights)
        ));
    }

    #[test]
    fn far_measurement_does_not_underflow() {
        let map = GridMap::from_fn(0.0, 0.0, 1.0, 3, 3, |x, _| x * 1000.0).unwrap();
        let mut set =
            ParticleSet::from_particles(vec![at(0.0, 1.0, 0.0, 0.5), at(1.0, 1.0, 0.0, 0.5)])
                .unwrap();
        set.update_weights(&map, 1e7, 1.0).unwrap();
        assert_eq!(set.particles()[1].weight, 1.0);
    }

    #[test]
    fn effective_sample_size_examples() {
        let n = 8;
        let uniform = ParticleSet::from_particles(vec![at(0.0, 0.0, 0.0, 1.0); n]).unwrap();
        assert_abs_diff_eq!(uniform.effective_sample_size(), n as f64, epsilon = 1e-12);
        let one = ParticleSet::from_particles(vec![at(0.0, 0.0, 0.0, 1.0), at(0.0, 0.0, 0.0, 0.0)])
            .unwrap();
        assert_eq!(one.effective_sample_size(), 1.0);
        let half = ParticleSet::from_particles(vec![
            at(0.0, 0.0, 0.0, 0.5),
            at(0.0, 0.0, 0.0, 0.5),
            at(0.0, 0.0, 0.0, 0.0),
            at(0.0, 0.0, 0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(half.effective_sample_size(), 2.0);
    }

    #[test]
    fn systematic_resampling_exact_multiples() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut set = ParticleSet::from_particles(vec![
                at(1.0, 0.0, 0.0, 0.75),
                at(2.0, 0.0, 0.0, 0.25),
                at(3.0, 0.0, 0.0, 0.0),
                at(4.0, 0.0, 0.0, 0.0),
            ])
            .unwrap();
            set.resample_systematic(&mut rng);
            let xs: Vec<f64> = set.particles().iter().map(|p| p.pose.x).collect();
            assert_eq!(xs, vec![1.0, 1.0, 1.0, 2.0]);
            assert!(set.weights().all(|w| w == 0.25));
        }
    }

    #[test]
    fn resampling_a_single_survivor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut parts = vec![at(0.0, 0.0, 0.0, 0.0); 10];
        parts[6] = at(6.0, 6.0, 0.6, 1.0);
        let mut set = ParticleSet::from_particles(parts).unwrap();
        set.resample_systematic(&mut rng);
        assert!(set
            .particles()
            .iter()
            .all(|p| p.pose == Pose::new(6.0, 6.0, 0.6)));
    }

    #[test]
    fn uniform_resampling_keeps_each_particle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let parts: Vec<_> = (0..16).map(|k| at(k as f64, 0.0, 0.0, 1.0)).collect();
        let mut set = ParticleSet::from_particles(parts).unwrap();
        set.resample_systematic(&mut rng);
        let xs: Vec<f64> = set.particles().iter().map(|p| p.pose.x).collect();
        assert_eq!(xs, (0..16).map(|k| k as f64).collect::<Vec<_>>());
    }

    #[test]
    fn resampling_preserves_mean_statistically() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 500;
        let parts: Vec<_> = (0..n)
            .map(|k| {
                let x = (k as f64 * 0.37).sin() * 3.0;
                at(x, 0.0, 0.0, (x * 0.7).exp())
            })
            .collect();
        let set = ParticleSet::from_particles(parts).unwrap();
        let mean = set.estimate_mean().unwrap().x;
        let var: f64 = set
            .particles()
            .iter()
            .map(|p| p.weight * (p.pose.x - mean).powi(2))
            .sum();
        let sigma_mean = (var / n as f64).sqrt();
        for _ in 0..100 {
            let mut s = set.clone();
            s.resample_systematic(&mut rng);
            let m = s.estimate_mean().unwrap().x;
            assert!((m - mean).abs() <= 3.0 * sigma_mean, "{m} vs {mean}");
        }
    }

    #[test]
    fn circular_mean_across_seam() {
        let set = ParticleSet::from_particles(vec![
            at(0.0, 0.0, 170f64.to_radians(), 0.5),
            at(0.0, 0.0, (-170f64).to_radians(), 0.5),
        ])
        .unwrap();
        let m = set.estimate_mean().unwrap();
        assert_abs_diff_eq!(m.theta.abs(), std::f64::consts::PI, epsilon = 1e-12);

        let first =
            ParticleSet::from_particles(vec![at(1.0, 2.0, 0.5, 1.0), at(5.0, 5.0, -2.0, 0.0)])
                .unwrap();
        let m = first.estimate_mean().unwrap();
        assert_abs_diff_eq!(m.x, 1.0);
        assert_abs_diff_eq!(m.y, 2.0);
        assert_abs_diff_eq!(m.theta, 0.5, epsilon = 1e-15);

        let opposed = ParticleSet::from_particles(vec![
            at(0.0, 0.0, 0.0, 0.5),
            at(0.0, 0.0, std::f64::consts::PI, 0.5),
        ])
        .unwrap();
        assert!(matches!(
            opposed.estimate_mean(),
            Err(Error::AmbiguousHeading)
        ));
    }

    #[test]
    fn covariance_examples() {
        let same = ParticleSet::from_particles(vec![at(1.0, 1.0, 0.2, 1.0); 5]).unwrap();
        assert!(same.sample_covariance().abs().max() < 1e-30);

        let pair =
            ParticleSet::from_particles(vec![at(-1.0, 3.0, 0.1, 1.0), at(1.0, 3.0, 0.1, 1.0)])
                .unwrap();
        let c = pair.sample_covariance();
        assert_abs_diff_eq!(c[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pair.trace_position(), 1.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn covariance_symmetric_psd(seed in any::<u64>(), n in 1usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let parts: Vec<_> = (0..n).map(|_| at(
                rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0),
                rng.random_range(-3.0..3.0), rng.random_range(0.01..1.0))).collect();
            let c = ParticleSet::from_particles(parts).unwrap().sample_covariance();
            prop_assert_eq!(c, c.transpose());
            let eig = SymmetricEigen::new(c);
            prop_assert!(eig.eigenvalues.min() >= -1e-12);
        }

        #[test]
        fn weights_normalized_after_update(seed in any::<u64>(), z in 44_000.0..46_000.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = GridMap::from_fn(0.0, 0.0, 0.25, 21, 21,
                |x, y| 45_000.0 + 600.0 * (x * 1.3).sin() * (y * 0.9).cos()).unwrap();
            let mut set = ParticleSet::init(&Pose::new(2.5, 2.5, 0.0),
                &Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, 0.1)), 300, &mut rng).unwrap();
            set.update_weights(&map, z, 100.0).unwrap();
            let total: f64 = set.weights().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
