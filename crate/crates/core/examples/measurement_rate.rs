//! A slow magnetometer that speeds up where the map is informative.
//!
//! Run with `cargo run --release --example measurement_rate`.

use magnav::sim::{
    default_obs_rate_threshold, run_observability_sim, time_averaged_trace, Builtin, PlannerKind,
    SimConfig,
};

fn main() -> magnav::Result<()> {
    let map = Builtin::LabLike.map();
    let base = SimConfig::builtin(Builtin::LabLike, PlannerKind::Observability, 2);
    println!(
        "default threshold: {:.4e}",
        default_obs_rate_threshold(&map, base.v)
    );

    for (label, slow, fast) in [
        ("every step", 1, 1),
        ("every 2nd step", 2, 2),
        ("adaptive 2 -> 1", 2, 1),
    ] {
        let cfg = SimConfig {
            measurement_period: slow,
            fast_measurement_period: fast,
            ..base.clone()
        };
        let records = run_observability_sim(&map, &cfg)?;
        let readings = records.iter().filter(|r| r.measurement.is_some()).count();
        println!(
            "{label:<16} {:3} steps, {readings:3} readings, mean trace {:.5} m^2",
            records.len(),
            time_averaged_trace(&records)
        );
    }
    Ok(())
}
