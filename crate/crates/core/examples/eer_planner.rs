//! One step of expected-entropy-reduction guidance on a histogram belief.
//!
//! Run with `cargo run --release --example eer_planner`.

use magnav::belief::{choose_action, score_actions, BeliefGrid, EerPlannerConfig};
use magnav::sim::Builtin;

fn main() -> magnav::Result<()> {
    let map = Builtin::LabLike.map();
    let (start, goal) = Builtin::LabLike.mission();
    let belief =
        BeliefGrid::covering(&map, 0.25, start.theta)?.with_gaussian(start.x, start.y, 0.1, 0.1)?;
    println!(
        "prior: entropy {:.4} nats, mean ({:.3}, {:.3})",
        belief.entropy(),
        belief.mean_position().0,
        belief.mean_position().1
    );

    let z = map.field_at(start.x, start.y)?;
    let post = belief.measurement_update(z, &map, 100.0)?;
    println!(
        "after a reading of {z:.1} nT: entropy {:.4} nats",
        post.entropy()
    );

    let mut cfg = EerPlannerConfig::with_goal(goal);
    cfg.motion_kernel_sigma = Builtin::LabLike
        .motion_kernel_sigma()
        .unwrap_or(cfg.motion_kernel_sigma);
    println!("\n omega(deg/s)   eer(nats)   dist(m)    cost");
    for s in score_actions(&post, &map, &cfg)? {
        println!(
            "  {:+8.1}   {:9.5}  {:8.4}  {:8.4}",
            s.omega.to_degrees(),
            s.eer,
            s.dist,
            s.cost
        );
    }
    let u = choose_action(&post, &map, &cfg)?;
    println!(
        "chosen: omega {:+.1} deg/s at {} m/s",
        u.omega.to_degrees(),
        u.v
    );

    let q = post
        .predict(&u, cfg.dt, cfg.motion_kernel_sigma)?
        .predictive_measurement_quadrature(&map, 100.0, 21)?;
    let spread: Vec<String> = q
        .iter()
        .filter(|(_, p)| *p > 0.05)
        .map(|(z, p)| format!("{z:.0}:{p:.2}"))
        .collect();
    println!("likely next readings (nT:prob): {}", spread.join(" "));
    Ok(())
}
