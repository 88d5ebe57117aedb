//! Receding-horizon planning: the dynamic program against exhaustive search.
//!
//! Run with `cargo run --release --example dp_planner`.

use magnav::planner::{brute_force_plan, plan, ObsPlannerConfig, PlannerWeights};
use magnav::sim::Builtin;

fn main() -> magnav::Result<()> {
    let map = Builtin::LabLike.map();
    let (start, goal) = Builtin::LabLike.mission();

    for w_obs in [0.0, 1.5] {
        let cfg = ObsPlannerConfig {
            weights: PlannerWeights { w_goal: 1.0, w_obs },
            ..ObsPlannerConfig::with_goal(goal)
        };
        let t = std::time::Instant::now();
        let (first, path) = plan(&map, &start, &cfg)?;
        let dp_time = t.elapsed();
        let t = std::time::Instant::now();
        let (bf_first, bf) = brute_force_plan(&map, &start, &cfg)?;
        let bf_time = t.elapsed();

        println!("w_obs = {w_obs}");
        println!(
            "  dp:          first turn {:+.0} deg, cost {:.6} ({dp_time:?})",
            first.to_degrees(),
            path.total_cost
        );
        println!(
            "  brute force: first turn {:+.0} deg, cost {:.6} ({bf_time:?})",
            bf_first.to_degrees(),
            bf.total_cost
        );
        let turns: Vec<String> = path
            .controls
            .iter()
            .map(|a| format!("{:+.0}", a.to_degrees()))
            .collect();
        println!("  turns (deg): {}", turns.join(" "));
        for s in &path.states {
            println!(
                "    ({:.3}, {:.3}) heading {:+.1} deg",
                s.x,
                s.y,
                s.theta.to_degrees()
            );
        }
    }
    Ok(())
}
