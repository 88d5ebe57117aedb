//! Sweep the observability weight for both planners over a handful of seeds.
//!
//! Run with `cargo run --release --example ratio_sweep`.

use magnav::sim::{sweep_ratios, Builtin, PlannerKind, SimConfig};

fn main() -> magnav::Result<()> {
    let map = Builtin::LabLike.map();
    let ratios = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
    let seeds: Vec<u64> = (0..8).collect();

    for planner in [PlannerKind::Observability, PlannerKind::Eer] {
        let base = SimConfig::builtin(Builtin::LabLike, planner, 0);
        let summary = sweep_ratios(&base, &map, &ratios, &seeds)?;
        println!(
            "{} planner, metric {}",
            planner.name(),
            summary.metric.name()
        );
        for r in &summary.rows {
            let flag = if r.flagged {
                "  (above the useful range)"
            } else {
                ""
            };
            println!(
                "  ratio {:3.1}: mean {:10.5}  std {:9.5}  ok {}  failed {}{flag}",
                r.ratio, r.mean, r.std, r.n_ok, r.n_failed
            );
        }
        summary.write_csv(std::io::stdout())?;
    }
    Ok(())
}
