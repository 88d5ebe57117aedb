//! Closed-loop runs with each planner on the lab-like map, written as trace CSVs.
//!
//! Run with `cargo run --release --example closed_loop [output-dir]`.

use magnav::sim::{
    read_trace, run_sim_on, time_averaged_trace, write_trace, Builtin, PlannerKind, SimConfig,
};

fn main() -> magnav::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(std::env::temp_dir);
    let map = Builtin::LabLike.map();

    for planner in [
        PlannerKind::Straight,
        PlannerKind::Observability,
        PlannerKind::Eer,
    ] {
        let cfg = SimConfig::builtin(Builtin::LabLike, planner, 4);
        let records = run_sim_on(&map, &cfg)?;
        let path = dir.join(format!("magnav_{}.csv", planner.name()));
        write_trace(&records, &path)?;
        let last = records.last().expect("at least one step");
        println!(
            "{:<13} {:3} steps, final truth ({:.2}, {:.2}), goal error {:.3} m, mean trace {:.5} m^2 -> {}",
            planner.name(),
            records.len(),
            last.truth.x,
            last.truth.y,
            last.truth.distance_to(cfg.goal.0, cfg.goal.1),
            time_averaged_trace(&records),
            path.display()
        );
        assert_eq!(read_trace(&path)?, records);
    }
    Ok(())
}
