//! Print the Gramian determinant over the lab-like map for eastbound motion.
//!
//! Run with `cargo run --example observability_field`.

use magnav::observability::report;
use magnav::planner::ObsPlannerConfig;
use magnav::sim::Builtin;
use magnav::{ControlInput, Pose};

fn main() -> magnav::Result<()> {
    let map = Builtin::LabLike.map();
    let eps = ObsPlannerConfig::with_goal((0.0, 0.0)).eps_det;
    let u = ControlInput::new(0.2, 0.0);
    let b = map.bounds();

    println!("log10 gramian_det, heading east, v = 0.2 m/s ('.' = off the stencil)");
    let mut y = b.y_max - 0.25;
    while y > b.y_min {
        let mut row = format!("{y:4.2} ");
        let mut x = b.x_min + 0.25;
        while x < b.x_max {
            let cell = if map.stencil_fits(x, y) {
                let r = report(&map, &Pose::new(x, y, 0.0), &u, eps)?;
                format!("{:4.0}", r.gramian_det.max(eps).log10())
            } else {
                "   .".to_string()
            };
            row.push_str(&cell);
            x += 0.5;
        }
        println!("{row}");
        y -= 0.5;
    }

    let r = report(&map, &Pose::new(3.0, 2.0, 0.0), &u, eps)?;
    println!(
        "\nat (3.0, 2.0): O =\n{}gramian_det = {:.4e}, cost = {:.4e}",
        r.o_nl, r.gramian_det, r.cost
    );
    Ok(())
}
