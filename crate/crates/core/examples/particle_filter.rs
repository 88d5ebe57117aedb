//! Track a vehicle driving straight across the lab-like map with a particle filter.
//!
//! Run with `cargo run --release --example particle_filter`.

use magnav::particle_filter::{default_initial_covariance, ParticleSet};
use magnav::sim::Builtin;
use magnav::vehicle::{measure, step_noisy};
use magnav::{ControlInput, NoiseConfig, Pose};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> magnav::Result<()> {
    let map = Builtin::LabLike.map();
    let noise = NoiseConfig::simulation_default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut truth = Pose::new(0.75, 2.5, 0.0);
    let mut pf = ParticleSet::init(&truth, &default_initial_covariance(), 1000, &mut rng)?;
    let u = ControlInput::new(0.2, 0.0);

    println!("step   truth_x  est_x   est_y   err_m   trace_m2  ess");
    for step in 1..=22 {
        truth = step_noisy(&truth, &u, 1.0, &noise, &mut rng);
        pf.propagate(&u, 1.0, &noise, &mut rng);
        let z = measure(&map, &truth, noise.sigma_z, &mut rng)?;
        pf.update_weights(&map, z, noise.sigma_z)?;
        let ess = pf.effective_sample_size();
        let est = pf.estimate_mean()?;
        println!(
            "{step:4}   {:6.3}  {:6.3}  {:6.3}  {:6.3}  {:8.5}  {ess:6.1}",
            truth.x,
            est.x,
            est.y,
            truth.distance_to(est.x, est.y),
            pf.trace_position()
        );
        pf.resample_if_degenerate(&mut rng);
    }
    Ok(())
}
